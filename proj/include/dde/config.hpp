#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dde/expr.hpp"
#include "dde/functional.hpp"
#include "dde/solver.hpp"
#include "dde/wellposedness.hpp"

namespace dde {

using json = nlohmann::json;

/// A fully bound problem: the functional, the initial datum, and the solve
/// window, plus enough model metadata for the oracle command.
struct Problem {
    std::size_t n = 1;
    PastInterval interval = PastInterval::point();
    std::string model_kind;
    HistoryFunctional F;
    InitialHistory initial = InitialHistory::constant(PastInterval::point(), Vec{0.0});
    double t0 = 0.0;
    double horizon = 1.0;
    SolveOptions solve;

    // Model details the oracles need.
    std::optional<double> constant_lag;     // r of a constant-lag model
    PointMap2 f_point;                      // f(t, x, y) when the model has one
    struct PantographParams {
        double a = 1.0, b = 0.0, lambda = 0.5;
    };
    std::optional<PantographParams> pantograph;
    std::optional<double> ode_linear_rate;  // builtin:ode_linear
    bool ode_square = false;                // builtin:ode_square
};

namespace config_detail {

inline PointMap2 bind_f2(std::vector<expr::ExprPtr> comps) {
    return [comps](double t, const Vec& x, const Vec& y) {
        Vec out(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i) out[i] = expr::eval(comps[i], t, x, y);
        return out;
    };
}

inline std::vector<expr::ExprPtr> parse_components(const json& arr, std::size_t n,
                                                   const std::string& what) {
    if (!arr.is_array() || arr.size() != n)
        throw Error("config: '" + what + "' must be an array of " + std::to_string(n) +
                    " expression string(s)");
    std::vector<expr::ExprPtr> out;
    out.reserve(n);
    for (const auto& s : arr) out.push_back(expr::parse(s.get<std::string>(), n));
    return out;
}

inline PastInterval parse_interval(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "whole") return PastInterval::whole_past();
        if (s == "point") return PastInterval::point();
        throw Error("config: past_interval must be {\"compact\": r}, \"whole\", or \"point\"");
    }
    if (j.is_object() && j.contains("compact"))
        return PastInterval::compact(j.at("compact").get<double>());
    throw Error("config: past_interval must be {\"compact\": r}, \"whole\", or \"point\"");
}

inline InitialHistory parse_initial(const json& j, const PastInterval& I, std::size_t n) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "closed_form") {
        // Expressions in the single variable t, standing for theta <= 0.
        auto comps = parse_components(j.at("expr"), n, "initial_history.expr");
        std::vector<InitialHistory::Component> fns;
        fns.reserve(n);
        const Vec zero(n, 0.0);
        for (auto& c : comps) {
            if (expr::references_y(c))
                throw Error("config: initial history expressions may only use t");
            fns.push_back([c, zero](double th) { return expr::eval(c, th, zero, zero); });
        }
        return InitialHistory::closed_form(I, std::move(fns));
    }
    if (kind == "sampled") {
        const auto& grid = j.at("grid");
        const auto& values = j.at("values");
        const auto& derivs = j.at("derivatives");
        if (!grid.is_array() || grid.size() < 2 || values.size() != grid.size() ||
            derivs.size() != grid.size())
            throw Error("config: sampled initial history needs matching grid/values/derivatives");
        std::vector<Vec> vals, ders;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            vals.push_back(values.at(k).get<Vec>());
            ders.push_back(derivs.at(k).get<Vec>());
            if (vals.back().size() != n || ders.back().size() != n)
                throw Error("config: sampled rows must have dimension n");
        }
        const double a = grid.front().get<double>();
        const double b = grid.back().get<double>();
        const double h = (b - a) / static_cast<double>(grid.size() - 1);
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (std::abs(grid.at(k).get<double>() - (a + h * static_cast<double>(k))) > 1e-9)
                throw Error("config: sampled grid must be uniform");
        return InitialHistory::sampled(I, Segment(a, b, std::move(vals), std::move(ders)));
    }
    throw Error("config: initial_history.kind must be closed_form or sampled");
}

inline void apply_solve_overrides(const json& j, SolveOptions& o) {
    if (j.contains("grid_nodes_per_unit")) o.grid_nodes_per_unit = j.at("grid_nodes_per_unit").get<int>();
    if (j.contains("fixed_point_tol")) o.fixed_point_tol = j.at("fixed_point_tol").get<double>();
    if (j.contains("max_picard_iters")) o.max_picard_iters = j.at("max_picard_iters").get<int>();
    if (j.contains("delta")) o.delta = j.at("delta").get<double>();
    if (j.contains("T_cap")) o.T_cap = j.at("T_cap").get<double>();
    if (j.contains("T_min")) o.T_min = j.at("T_min").get<double>();
    if (j.contains("blow_threshold")) o.blow_threshold = j.at("blow_threshold").get<double>();
    if (j.contains("lipschitz")) {
        const auto& l = j.at("lipschitz");
        const auto source = l.at("source").get<std::string>();
        if (source == "user") {
            o.lipschitz_source = UserProvidedL{l.at("L").get<double>()};
        } else if (source == "estimated") {
            EstimatedL e;
            if (l.contains("samples")) e.samples = l.at("samples").get<int>();
            if (l.contains("seed")) e.seed = l.at("seed").get<std::uint64_t>();
            o.lipschitz_source = e;
        } else {
            throw Error("config: lipschitz.source must be user or estimated");
        }
    }
    o.validate();
}

} // namespace config_detail

/// Parses and binds a problem configuration. Expressions are compiled
/// eagerly so malformed models fail at load time.
inline Problem load_problem(const json& j) {
    if (!j.contains("schema") || j.at("schema").get<int>() != 1)
        throw Error("config: missing or unsupported schema (expected \"schema\": 1)");
    Problem p;
    p.n = j.at("n").get<std::size_t>();
    if (p.n == 0) throw Error("config: n must be positive");
    p.interval = config_detail::parse_interval(j.at("past_interval"));
    p.t0 = j.value("t0", 0.0);
    p.horizon = j.at("horizon").get<double>();
    if (j.contains("solve")) config_detail::apply_solve_overrides(j.at("solve"), p.solve);

    const auto& model = j.at("model");
    p.model_kind = model.at("kind").get<std::string>();

    if (p.model_kind == "trivial") {
        Vec v = model.at("v").get<Vec>();
        if (v.size() != p.n) throw Error("config: trivial model needs v of dimension n");
        p.F = build_trivial(p.interval, std::move(v));
    } else if (p.model_kind == "constant_lag") {
        auto comps = config_detail::parse_components(model.at("f"), p.n, "model.f");
        p.f_point = config_detail::bind_f2(std::move(comps));
        p.constant_lag = model.at("r").get<double>();
        p.F = build_constant_lag(p.interval, p.f_point, *p.constant_lag, p.n);
    } else if (p.model_kind == "state_dependent") {
        auto comps = config_detail::parse_components(model.at("f"), p.n, "model.f");
        p.f_point = config_detail::bind_f2(std::move(comps));
        DelayFunctional tau;
        const auto& tj = model.at("tau");
        if (tj.is_number()) {
            const double r = tj.get<double>();
            tau.eval = [r](double, const HistoryView&) { return r; };
        } else {
            // Delay expressions may read t and the current state x = phi(0),
            // not the delayed value y.
            auto te = expr::parse(tj.get<std::string>(), p.n);
            if (expr::references_y(te))
                throw Error("config: delay expressions may reference t and x[i] only");
            const Vec zero(p.n, 0.0);
            tau.eval = [te, zero](double t, const HistoryView& phi) {
                return expr::eval(te, t, phi(0.0), zero);
            };
        }
        p.F = build_state_dependent(p.interval, p.f_point, std::move(tau), p.n);
    } else if (p.model_kind == "ode") {
        auto comps = config_detail::parse_components(model.at("f"), p.n, "model.f");
        for (const auto& c : comps)
            if (expr::references_y(c))
                throw Error("config: ode right-hand sides may not reference y");
        auto f2 = config_detail::bind_f2(std::move(comps));
        p.f_point = f2;
        p.F = build_ode(p.interval, [f2](double t, const Vec& x) { return f2(t, x, x); }, p.n);
    } else if (p.model_kind == "builtin:pantograph") {
        if (!p.interval.is_whole_past())
            throw Error("config: builtin:pantograph needs past_interval \"whole\"");
        if (p.n != 1) throw Error("config: builtin:pantograph is scalar");
        Problem::PantographParams pp;
        const auto& params = model.at("params");
        pp.a = params.at("a").get<double>();
        pp.b = params.at("b").get<double>();
        pp.lambda = params.at("lambda").get<double>();
        if (!(pp.lambda > 0.0 && pp.lambda < 1.0))
            throw Error("config: pantograph lambda must lie in (0, 1)");
        p.pantograph = pp;
        p.f_point = [pp](double, const Vec& x, const Vec& y) {
            return Vec{pp.a * y[0] + pp.b * x[0]};
        };
        DelayFunctional tau;
        const double lam = pp.lambda;
        tau.eval = [lam](double t, const HistoryView&) { return (1.0 - lam) * std::max(t, 0.0); };
        p.F = build_state_dependent(p.interval, p.f_point, std::move(tau), p.n);
    } else if (p.model_kind == "builtin:ode_square") {
        if (!p.interval.is_point() || p.n != 1)
            throw Error("config: builtin:ode_square is a scalar ODE (past_interval \"point\")");
        p.ode_square = true;
        p.F = build_ode(p.interval, [](double, const Vec& x) { return Vec{x[0] * x[0]}; }, 1);
    } else if (p.model_kind == "builtin:ode_linear") {
        if (!p.interval.is_point() || p.n != 1)
            throw Error("config: builtin:ode_linear is a scalar ODE (past_interval \"point\")");
        const double a = model.at("params").at("a").get<double>();
        p.ode_linear_rate = a;
        p.F = build_ode(p.interval, [a](double, const Vec& x) { return Vec{a * x[0]}; }, 1);
    } else {
        throw Error("config: unknown model.kind '" + p.model_kind + "'");
    }

    p.initial = config_detail::parse_initial(j.at("initial_history"), p.interval, p.n);
    return p;
}

inline Problem load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("config: " + path + ": " + e.what());
    }
    try {
        return load_problem(j);
    } catch (const json::exception& e) {
        throw Error("config: " + path + ": " + e.what());
    }
}

inline json probe_report_to_json(const ProbeReport& r) {
    json j;
    j["schema"] = 1;
    j["probe"] = r.probe;
    j["passed"] = r.passed;
    j["measured"] = r.measured;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["notes"] = r.notes;
    return j;
}

inline json escape_report_to_json(const EscapeReport& r,
                                  const std::vector<SolveDiagnostics>& diags) {
    json j;
    j["schema"] = 1;
    j["cause"] = to_string(r.cause);
    if (r.t_escape)
        j["t_escape"] = *r.t_escape;
    else
        j["t_escape"] = nullptr;
    json d;
    d["segments"] = diags.size();
    double worst_ratio = 0.0, worst_residual = 0.0;
    int total_iters = 0;
    for (const auto& s : diags) {
        for (double rr : s.contraction_ratios) worst_ratio = std::max(worst_ratio, rr);
        worst_residual = std::max(worst_residual, s.fixed_point_residual);
        total_iters += s.picard_iterations;
    }
    d["max_contraction_ratio"] = worst_ratio;
    d["max_fixed_point_residual"] = worst_residual;
    d["total_picard_iterations"] = total_iters;
    if (!diags.empty()) {
        d["last_T"] = diags.back().chosen_T;
        d["last_L"] = diags.back().estimated_L;
        d["last_M"] = diags.back().estimated_M;
    }
    j["diagnostics"] = d;
    return j;
}

} // namespace dde
