#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "dde/lipschitz.hpp"
#include "dde/oracles.hpp"
#include "dde/solver.hpp"

namespace dde {

/// Structured outcome of a well-posedness probe. Thresholds used by the
/// pass/fail decision are echoed into `measured`.
struct ProbeReport {
    std::string probe;
    bool passed = false;
    std::map<std::string, double> measured;
    int samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
};

namespace detail {

/// Sup-normalized C1 perturbation eta for initial histories. On the point
/// interval it degenerates to a constant unit shift so ODE problems feel the
/// perturbation at theta = 0.
struct InitialBump {
    double window;
    MemoryBump shape;
    Vec at_zero;  // eta(0), useful for point-interval bookkeeping

    [[nodiscard]] Vec operator()(double theta) const {
        if (window <= 0.0) return at_zero;
        return shape(std::max(theta, -window));
    }
};

inline InitialBump seeded_initial_bump(const PastInterval& I, std::size_t n, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    if (I.is_point()) {
        Vec z(n, 0.0);
        z[0] = (unit(rng) >= 0.0) ? 1.0 : -1.0;
        return InitialBump{0.0, MemoryBump{1.0, Vec(n, 0.0), Vec(n, 0.0)}, std::move(z)};
    }
    const double W = std::min(I.depth(), 1.0);
    MemoryBump b{W, Vec(n), Vec(n)};
    for (std::size_t j = 0; j < n; ++j) {
        b.ramp_amp[j] = unit(rng);
        b.bump_amp[j] = unit(rng);
    }
    // Keep the value at theta = 0 substantial, then normalize the sup to 1.
    if (std::abs(b.ramp_amp[0]) < 0.25) b.ramp_amp[0] = (b.ramp_amp[0] >= 0.0) ? 0.5 : -0.5;
    const double sup = std::max(b.max_value(), 1e-12);
    b = scaled_bump(b, 1.0 / sup);
    Vec at_zero = b(0.0);
    return InitialBump{W, std::move(b), std::move(at_zero)};
}

inline double max_trajectory_diff(const Trajectory& a, const Trajectory& b, double t_from,
                                  double t_to, int per_unit) {
    const auto pts = std::max<std::size_t>(
        2, static_cast<std::size_t>((t_to - t_from) * per_unit + 0.5) + 1);
    double m = 0.0;
    for (std::size_t k = 0; k < pts; ++k) {
        const double t = t_from + (t_to - t_from) * static_cast<double>(k) / static_cast<double>(pts - 1);
        m = std::max(m, inf_dist(a.value(t), b.value(t)));
    }
    return m;
}

} // namespace detail

/// Local uniqueness: run the fixed-point solve from several distinct Picard
/// starting iterates (the base ray, perturbed rays, seeded C1-prolongation
/// members) and require all converged fixed points to agree in rho1.
inline ProbeReport probe_uniqueness(const HistoryFunctional& F, double t0,
                                    const InitialHistory& phi0, const SolveOptions& opts,
                                    int n_starts, std::uint64_t seed) {
    ProbeReport rep;
    rep.probe = "uniqueness";
    rep.seed = seed;
    rep.samples = n_starts;
    const double agree_tol = 10.0 * opts.fixed_point_tol;
    rep.measured["agree_tol"] = agree_tol;
    try {
        Trajectory holder(phi0, t0);
        const HistoryView psi = history_at(holder, t0);
        auto [first, diag] = solve_local(F, t0, psi, opts);
        const double T = diag.chosen_T;
        const Vec v = F.eval(t0, psi);
        const double delta = opts.delta * std::max(1.0, inf_norm(psi(0.0)));

        std::vector<Segment> fixed_points;
        fixed_points.push_back(first);
        RectangleSpec rect{t0, psi, T, delta, RectangleOrder::C1, v};
        for (int s = 1; s < n_starts; ++s) {
            RectangleSpec r2 = rect;
            r2.radius = (s % 2 == 1) ? 0.25 * delta : delta;  // perturbed rays and full members
            Segment start = random_prolongation(r2, T, mix_seed(seed, static_cast<std::uint64_t>(s)));
            start = start.resampled(first.node_count() - 1);
            auto [seg, d2] = solve_local(F, t0, psi, opts, start, T);
            fixed_points.push_back(seg);
        }

        double worst = 0.0;
        for (std::size_t i = 0; i < fixed_points.size(); ++i)
            for (std::size_t j = i + 1; j < fixed_points.size(); ++j)
                worst = std::max(worst, rho1(fixed_points[i], fixed_points[j]));
        rep.measured["max_pairwise_rho1"] = worst;
        rep.measured["chosen_T"] = T;
        rep.passed = worst <= agree_tol;
    } catch (const Error& e) {
        rep.passed = false;
        rep.notes.push_back(std::string("solver failure: ") + e.what());
    }
    return rep;
}

/// Continuous dependence: perturb the initial history by eps * eta for a
/// shrinking schedule of eps, measure the solution deviation over [t0, t0+T],
/// and require the deviation to vanish with a stable modulus. No rate beyond
/// boundedness is asserted; the theory proves continuity, not a rate.
inline ProbeReport probe_dependence(const HistoryFunctional& F, double t0,
                                    const InitialHistory& phi0, double T,
                                    std::vector<double> eps_schedule, std::uint64_t seed,
                                    const SolveOptions& opts,
                                    double ratio_bound = 0.0) {
    ProbeReport rep;
    rep.probe = "dependence";
    rep.seed = seed;
    rep.samples = static_cast<int>(eps_schedule.size());
    try {
        auto [base, base_rep] = continue_maximal(F, phi0, t0, T, opts);
        if (base_rep.cause != EscapeCause::HorizonReached)
            throw EscapeBeforeTau(base_rep);
        const auto eta = detail::seeded_initial_bump(phi0.interval(), phi0.dim(), seed);

        std::vector<double> deltas, ratios;
        for (double eps : eps_schedule) {
            if (eps == 0.0) {
                deltas.push_back(0.0);
                continue;
            }
            InitialHistory pert = phi0.perturbed(
                [eta, eps](double th) { return scaled(eta(th), eps); });
            auto [ptraj, prep] = continue_maximal(F, pert, t0, T, opts);
            if (prep.cause != EscapeCause::HorizonReached) throw EscapeBeforeTau(prep);
            const double initial_diff = eps * (phi0.interval().is_point()
                                                   ? inf_norm(eta.at_zero)
                                                   : 1.0);
            const double solved_diff = detail::max_trajectory_diff(
                base, ptraj, t0, t0 + T, 4 * opts.grid_nodes_per_unit);
            const double d = std::max(initial_diff, solved_diff);
            deltas.push_back(d);
            ratios.push_back(d / eps);
            rep.measured["delta_eps_" + std::to_string(eps)] = d;
        }

        bool monotone = true;
        for (std::size_t i = 0; i + 1 < deltas.size(); ++i)
            if (!(deltas[i + 1] <= deltas[i] + 1e-15)) monotone = false;
        double rmin = ratios.empty() ? 0.0 : *std::min_element(ratios.begin(), ratios.end());
        double rmax = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
        rep.measured["ratio_min"] = rmin;
        rep.measured["ratio_max"] = rmax;
        rep.measured["ratio_spread_bound"] = 2.0;
        bool stable = ratios.empty() || rmax <= 2.0 * std::max(rmin, 1e-300);
        bool bounded = ratio_bound <= 0.0 || rmax <= ratio_bound;
        if (ratio_bound > 0.0) rep.measured["ratio_bound"] = ratio_bound;
        rep.passed = monotone && stable && bounded;
    } catch (const Error& e) {
        rep.passed = false;
        rep.notes.push_back(std::string("failure: ") + e.what());
    }
    return rep;
}

/// Equi-continuity of the trivial flow at (0, 0): sampled histories and
/// slopes must satisfy |S(t)(v, phi)|_{C[-k,0]} <= |phi|_{C[-k,0]} + T |v|.
/// Samples run independently, so the loop may fan out across threads.
inline ProbeReport probe_semiflow(const PastInterval& I, std::size_t n, double k, double T,
                                  int samples, std::uint64_t seed, int threads = 1) {
    ProbeReport rep;
    rep.probe = "semiflow";
    rep.seed = seed;
    rep.samples = samples;
    const double tol = 1e-9;
    rep.measured["tolerance"] = tol;
    const double W = std::min(k, I.depth());
    double worst_excess = -1.0;
    int failures = 0;
    std::mutex mu;
    detail::parallel_samples(samples, threads, [&](int s) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(s));
        std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
        const double t = T * unit(rng);
        Vec v(n), c(n);
        for (std::size_t j = 0; j < n; ++j) {
            v[j] = 2.0 * sym(rng);
            c[j] = 2.0 * sym(rng);
        }
        auto shape = detail::random_memory_bump(n, std::max(W, 1e-6), rng);
        const double amp = 2.0 * unit(rng);
        auto phi_eval = [c, shape, amp](double th) { return axpy(c, amp, shape(th)); };
        HistoryView phi(I, 0.0, n, phi_eval);

        // Shared refinement: the right side is evaluated on the union of the
        // base grid and its image under the shift, so the discrete
        // inequality mirrors the analytic one.
        std::vector<double> grid = probe_offsets(W, phi);
        double left = 0.0, right_sup = 0.0;
        for (double th : grid) {
            left = std::max(left, inf_norm(wedge_value(phi, v, t + th)));
            right_sup = std::max(right_sup, inf_norm(phi(th)));
            const double shifted = t + th;
            if (shifted <= 0.0) right_sup = std::max(right_sup, inf_norm(phi(shifted)));
        }
        const double bound = right_sup + T * inf_norm(v) + tol;
        const double excess = left - bound;
        std::lock_guard<std::mutex> lk(mu);
        worst_excess = std::max(worst_excess, excess);
        if (excess > 0.0) ++failures;
    });
    rep.measured["worst_excess"] = worst_excess;
    rep.measured["failures"] = failures;
    rep.passed = failures == 0;
    return rep;
}

/// Cocycle axiom of the solution process: one-shot evolution by tau1 + tau2
/// must match evolving by tau1, restarting from the materialized state, and
/// evolving by tau2. The one-shot and restarted runs step on different
/// lattices, so memory kinks land mid-cell for one of them; the probe solves
/// both paths on a refined grid to push that quadrature disagreement below
/// the threshold.
inline ProbeReport probe_cocycle(const HistoryFunctional& F, double t0,
                                 const InitialHistory& phi0, double tau1, double tau2,
                                 const SolveOptions& opts, double threshold = 1e-7) {
    ProbeReport rep;
    rep.probe = "cocycle";
    rep.samples = 1;
    rep.measured["threshold"] = threshold;
    SolveOptions fine = opts;
    fine.grid_nodes_per_unit = std::max(1024, opts.grid_nodes_per_unit);
    rep.measured["grid_nodes_per_unit"] = fine.grid_nodes_per_unit;
    try {
        ProcessState one = solution_process(F, tau1 + tau2, t0, phi0, fine);
        ProcessState first = solution_process(F, tau1, t0, phi0, fine);

        const double window = std::min(tau1 + tau2, 2.0);
        InitialHistory restart = materialize_history(first.trajectory, t0 + tau1);
        ProcessState second = solution_process(F, tau2, t0 + tau1, restart, fine);
        const double err = sup_norm_diff(one.state(), second.state(), window);
        rep.measured["sup_diff"] = err;
        rep.passed = err <= threshold;
    } catch (const Error& e) {
        rep.passed = false;
        rep.notes.push_back(std::string("failure: ") + e.what());
    }
    return rep;
}

/// Lower semi-continuity of the escape time: perturbed initial data may not
/// escape much earlier than the base problem. The margin accounts for
/// detector granularity.
inline ProbeReport probe_escape_lsc(const HistoryFunctional& F, double t0,
                                    const InitialHistory& phi0, double eps, int samples,
                                    std::uint64_t seed, const SolveOptions& opts,
                                    double horizon, int threads = 1) {
    ProbeReport rep;
    rep.probe = "escape_lsc";
    rep.seed = seed;
    rep.samples = samples;
    auto [base, base_rep] = continue_maximal(F, phi0, t0, horizon, opts);
    if (base_rep.cause == EscapeCause::HorizonReached) {
        rep.passed = false;
        rep.notes.push_back("base problem reached the horizon; no finite escape to probe");
        return rep;
    }
    const double t_star = *base_rep.t_escape - t0;
    const double margin = 10.0 * eps * t_star;
    rep.measured["t_star"] = t_star;
    rep.measured["margin"] = margin;
    double worst = horizon;
    std::mutex mu;
    detail::parallel_samples(samples, threads, [&](int s) {
        const auto eta = detail::seeded_initial_bump(phi0.interval(), phi0.dim(),
                                                     mix_seed(seed, static_cast<std::uint64_t>(s)));
        InitialHistory pert = phi0.perturbed([eta, eps](double th) { return scaled(eta(th), eps); });
        auto [ptraj, prep] = continue_maximal(F, pert, t0, horizon, opts);
        const double t_pert = prep.cause == EscapeCause::HorizonReached
                                  ? horizon
                                  : *prep.t_escape - t0;
        std::lock_guard<std::mutex> lk(mu);
        worst = std::min(worst, t_pert);
    });
    rep.measured["min_perturbed_escape"] = worst;
    rep.passed = worst >= t_star - margin;
    return rep;
}

} // namespace dde
