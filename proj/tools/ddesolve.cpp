// Batch front door: load a problem config, run solve / oracle / probe /
// lipschitz / compare, emit CSV trajectories and JSON reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dde/config.hpp"
#include "dde/csv.hpp"
#include "dde/dde.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_escape = 2;

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dde::Error("cannot write " + path);
    out << body;
}

void write_csv_rows(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dde::Error("cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

int cmd_solve(const std::string& config_path, const std::string& out_path, int dense) {
    dde::Problem p = dde::load_problem_file(config_path);
    std::vector<dde::SolveDiagnostics> diags;
    auto [traj, report] = dde::continue_maximal(p.F, p.initial, p.t0, p.horizon, p.solve, &diags);
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw dde::Error("cannot write " + out_path);
        dde::write_trajectory_csv(out, traj, dense);
    }
    write_file(out_path + ".escape.json", dde::escape_report_to_json(report, diags).dump(2) + "\n");
    return report.cause == dde::EscapeCause::HorizonReached ? exit_ok : exit_escape;
}

int cmd_oracle(const std::string& config_path, const std::string& method,
               const std::string& out_path, double rk_step, int terms, int dense) {
    dde::Problem p = dde::load_problem_file(config_path);
    if (method == "step") {
        if (!p.constant_lag || !p.f_point)
            throw dde::MethodInapplicable("oracle step: model must be constant_lag");
        dde::Trajectory traj = dde::step_method_solve(p.f_point, *p.constant_lag, p.initial,
                                                      p.t0, p.horizon, rk_step);
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw dde::Error("cannot write " + out_path);
        dde::write_trajectory_csv(out, traj, dense);
        return exit_ok;
    }
    if (method == "series") {
        if (!p.pantograph)
            throw dde::MethodInapplicable("oracle series: model must be builtin:pantograph");
        const auto pp = *p.pantograph;
        const double x0 = p.initial.value_at_zero()[0];
        const auto rows_n = std::max(2, static_cast<int>(p.horizon * dense + 0.5) + 1);
        std::vector<std::vector<double>> rows;
        for (int k = 0; k < rows_n; ++k) {
            const double t = p.t0 + p.horizon * k / static_cast<double>(rows_n - 1);
            const double x = dde::pantograph_series(pp.a, pp.b, pp.lambda, x0, t, terms);
            const double xl = dde::pantograph_series(pp.a, pp.b, pp.lambda, x0, pp.lambda * t, terms);
            rows.push_back({t, x, pp.a * xl + pp.b * x});
        }
        write_csv_rows(out_path, {"t", "x0", "dx0"}, rows);
        return exit_ok;
    }
    if (method == "ode_closed_form") {
        const double x0 = p.initial.value_at_zero()[0];
        const auto rows_n = std::max(2, static_cast<int>(p.horizon * dense + 0.5) + 1);
        std::vector<std::vector<double>> rows;
        for (int k = 0; k < rows_n; ++k) {
            const double t = p.t0 + p.horizon * k / static_cast<double>(rows_n - 1);
            double x = 0.0;
            if (p.ode_square) {
                x = dde::closed_form::quadratic_blowup(x0, t - p.t0);
            } else if (p.ode_linear_rate) {
                x = dde::closed_form::exponential(*p.ode_linear_rate, x0, t - p.t0);
            } else {
                throw dde::MethodInapplicable(
                    "oracle ode_closed_form: model must be builtin:ode_square or builtin:ode_linear");
            }
            const double dx = p.ode_square ? x * x : *p.ode_linear_rate * x;
            rows.push_back({t, x, dx});
        }
        write_csv_rows(out_path, {"t", "x0", "dx0"}, rows);
        return exit_ok;
    }
    throw dde::MethodInapplicable("oracle: unknown method '" + method + "'");
}

int cmd_probe(const std::string& config_path, const std::string& name,
              const std::string& out_path, std::uint64_t seed, int samples, double T,
              double tau1, double tau2, double eps, int threads) {
    dde::Problem p = dde::load_problem_file(config_path);
    dde::ProbeReport rep;
    if (name == "uniqueness") {
        rep = dde::probe_uniqueness(p.F, p.t0, p.initial, p.solve, samples > 0 ? samples : 5, seed);
    } else if (name == "dependence") {
        const double window = T > 0 ? T : std::min(p.horizon, 1.0);
        rep = dde::probe_dependence(p.F, p.t0, p.initial, window, {1e-2, 5e-3, 2.5e-3}, seed, p.solve);
    } else if (name == "semiflow") {
        rep = dde::probe_semiflow(p.interval, p.n, std::min(p.interval.depth(), 1.0),
                                  T > 0 ? T : 1.0, samples > 0 ? samples : 1000, seed, threads);
    } else if (name == "cocycle") {
        rep = dde::probe_cocycle(p.F, p.t0, p.initial, tau1, tau2, p.solve);
    } else if (name == "escape_lsc") {
        rep = dde::probe_escape_lsc(p.F, p.t0, p.initial, eps, samples > 0 ? samples : 5, seed,
                                    p.solve, p.horizon, threads);
    } else {
        throw dde::Error("probe: unknown probe '" + name + "'");
    }
    const std::string body = dde::probe_report_to_json(rep).dump(2) + "\n";
    if (out_path.empty())
        std::cout << body;
    else
        write_file(out_path, body);
    return rep.passed ? exit_ok : exit_escape;
}

int cmd_lipschitz(const std::string& config_path, const std::string& mode, int samples,
                  std::uint64_t seed, double T, double delta, double R, double budget,
                  int threads) {
    dde::Problem p = dde::load_problem_file(config_path);
    dde::LipschitzOptions lo;
    lo.samples = samples;
    lo.seed = seed;
    lo.horizon = T;
    lo.radius = delta;
    lo.memory_window = R;
    lo.lip_budget = budget;
    lo.threads = threads;
    if (mode == "prolongations")
        lo.mode = dde::LipschitzMode::AboutProlongations;
    else if (mode == "c1_prolongations")
        lo.mode = dde::LipschitzMode::AboutC1Prolongations;
    else if (mode == "memories")
        lo.mode = dde::LipschitzMode::AboutMemories;
    else if (mode == "almost_local")
        lo.mode = dde::LipschitzMode::AlmostLocal;
    else
        throw dde::Error("lipschitz: unknown mode '" + mode + "'");

    dde::Trajectory holder(p.initial, p.t0);
    const dde::HistoryView psi = dde::history_at(holder, p.t0);
    const auto est = dde::estimate_lipschitz(p.F, p.t0, psi, lo);

    dde::json j;
    j["schema"] = 1;
    j["mode"] = mode;
    j["estimate"] = est.value;
    j["valid_pairs"] = est.samples;
    j["max_pair"] = {{"t", est.max_pair.t},
                     {"numerator", est.max_pair.numerator},
                     {"denominator", est.max_pair.denominator},
                     {"sample_index", est.max_pair.sample_index}};
    std::cout << j.dump(2) << "\n";
    return exit_ok;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, double tol) {
    const auto a = dde::read_csv(a_path);
    const auto b = dde::read_csv(b_path);
    const double diff = dde::compare_csv(a, b);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", diff);
    std::cout << buf << "\n";
    return diff <= tol ? exit_ok : exit_escape;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay differential equation solver with history spaces"};
    app.require_subcommand(1);

    std::string config_path, out_path = "out.csv", method = "step", probe_name, mode = "c1_prolongations";
    std::string csv_a, csv_b;
    int dense = 64, samples = 0, terms = 50, threads = 0;  // threads 0: logical cores
    std::uint64_t seed = 1;
    double rk_step = 1.0 / 128.0, T = 0.0, tau1 = 0.7, tau2 = 0.7, eps = 1e-3;
    double tol = 1e-9, delta = 1.0, R = 0.5, budget = 1.0, lipT = 0.25;

    auto* solve = app.add_subcommand("solve", "integrate a problem to its horizon");
    solve->add_option("--config", config_path, "problem config (JSON)")->required();
    solve->add_option("--out", out_path, "trajectory CSV path");
    solve->add_option("--dense", dense, "output points per unit time");

    auto* oracle = app.add_subcommand("oracle", "reference trajectories (step method, series, closed forms)");
    oracle->add_option("--config", config_path)->required();
    oracle->add_option("--method", method, "step | series | ode_closed_form")->required();
    oracle->add_option("--out", out_path);
    oracle->add_option("--rk-step", rk_step, "RK4 step for the step method");
    oracle->add_option("--terms", terms, "series truncation order");
    oracle->add_option("--dense", dense);

    auto* probe = app.add_subcommand("probe", "well-posedness probes");
    probe->add_option("--config", config_path)->required();
    probe->add_option("--probe", probe_name,
                      "uniqueness | dependence | semiflow | cocycle | escape_lsc")->required();
    probe->add_option("--out", out_path, "report JSON path (stdout when omitted)")->default_val("");
    probe->add_option("--seed", seed);
    probe->add_option("--samples", samples, "sample count (probe-specific default when 0)");
    probe->add_option("--T", T, "window for dependence/semiflow");
    probe->add_option("--tau1", tau1);
    probe->add_option("--tau2", tau2);
    probe->add_option("--eps", eps, "perturbation size for escape_lsc");
    probe->add_option("--threads", threads);

    auto* lips = app.add_subcommand("lipschitz", "sampled Lipschitz estimates");
    lips->add_option("--config", config_path)->required();
    lips->add_option("--mode", mode, "prolongations | c1_prolongations | memories | almost_local");
    lips->add_option("--samples", samples)->default_val(200);
    lips->add_option("--seed", seed);
    lips->add_option("--T", lipT, "rectangle horizon");
    lips->add_option("--delta", delta, "rectangle radius");
    lips->add_option("--R", R, "memory window");
    lips->add_option("--budget", budget, "Lipschitz budget for almost_local");
    lips->add_option("--threads", threads);

    auto* cmp = app.add_subcommand("compare", "sup-norm difference of two trajectory CSVs");
    cmp->add_option("a", csv_a, "first CSV")->required();
    cmp->add_option("b", csv_b, "second CSV")->required();
    cmp->add_option("--tol", tol, "pass threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(config_path, out_path, dense);
        if (oracle->parsed()) return cmd_oracle(config_path, method, out_path, rk_step, terms, dense);
        if (probe->parsed())
            return cmd_probe(config_path, probe_name, out_path, seed, samples, T, tau1, tau2, eps, threads);
        if (lips->parsed())
            return cmd_lipschitz(config_path, mode, samples, seed, lipT, delta, R, budget, threads);
        if (cmp->parsed()) return cmd_compare(csv_a, csv_b, tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
