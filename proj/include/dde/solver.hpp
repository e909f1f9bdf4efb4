#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dde/functional.hpp"
#include "dde/history.hpp"
#include "dde/lipschitz.hpp"
#include "dde/norms.hpp"
#include "dde/transforms.hpp"

namespace dde {

/// How the local Lipschitz constant entering the step rule is obtained.
struct UserProvidedL {
    double L = 1.0;
};
struct EstimatedL {
    int samples = 32;
    std::uint64_t seed = 1;
};
using LipschitzSource = std::variant<UserProvidedL, EstimatedL>;

struct SolveOptions {
    int grid_nodes_per_unit = 64;
    double fixed_point_tol = 1e-10;  // on rho1
    int max_picard_iters = 60;
    double delta = 1.0;      // radius of the local prolongation space
    double T_cap = 0.25;     // max segment span; stands in for the continuity-modulus horizons
    double T_min = 1e-6;     // minimal span before declaring escape
    double blow_threshold = 1e8;
    LipschitzSource lipschitz_source = EstimatedL{};

    void validate() const {
        if (!(grid_nodes_per_unit > 0 && fixed_point_tol > 0 && max_picard_iters > 0 &&
              delta > 0 && T_cap > 0 && T_min > 0 && blow_threshold > 0 && T_min < T_cap))
            throw Error("SolveOptions: all fields positive, T_min < T_cap");
    }
};

struct SolveDiagnostics {
    double chosen_T = 0.0;
    double estimated_M = 0.0;
    double estimated_L = 0.0;
    int picard_iterations = 0;
    std::vector<double> contraction_ratios;  // rho1 successive-difference ratios
    double fixed_point_residual = 0.0;
};

enum class EscapeCause { HorizonReached, BlowUp, DomainExit, StepCollapse, PicardDiverged };

struct EscapeReport {
    std::optional<double> t_escape;  // absent when the horizon was reached
    EscapeCause cause = EscapeCause::HorizonReached;
};

[[nodiscard]] inline std::string to_string(EscapeCause c) {
    switch (c) {
        case EscapeCause::HorizonReached: return "HorizonReached";
        case EscapeCause::BlowUp: return "BlowUp";
        case EscapeCause::DomainExit: return "DomainExit";
        case EscapeCause::StepCollapse: return "StepCollapse";
        case EscapeCause::PicardDiverged: return "PicardDiverged";
    }
    return "?";
}

struct SolverFailure : Error {
    EscapeCause cause;
    SolverFailure(EscapeCause c, const std::string& msg) : Error(msg), cause(c) {}
};

/// One application of the integral operator: node derivatives are F itself
/// (the operator's derivative is exact there), node values accumulate the
/// integral of F by Simpson over each node pair, sampling F at the pair
/// midpoint so every pair holds an even panel count.
inline Segment picard_apply(const HistoryFunctional& F, double sigma, const HistoryView& psi,
                            const Segment& gamma) {
    if (std::abs(gamma.t_start() - sigma) > 1e-12)
        throw AnchorMismatch("picard_apply: gamma must start at sigma");
    const std::size_t nodes = gamma.node_count();
    const double h = gamma.grid_step();
    const std::size_t n = gamma.dim();

    auto f_at = [&](double u) {
        const HistoryView hist = prolonged_history(psi, gamma, u);
        if (!F.in_domain(u, hist)) throw DomainExit(u, "picard_apply: left dom(F)");
        return F.eval(u, hist);
    };

    std::vector<Vec> derivs(nodes), values(nodes, Vec(n, 0.0));
    for (std::size_t j = 0; j < nodes; ++j) derivs[j] = f_at(gamma.node_time(j));
    values[0] = psi(0.0);
    for (std::size_t j = 0; j + 1 < nodes; ++j) {
        const Vec mid = f_at(gamma.node_time(j) + 0.5 * h);
        Vec v = values[j];
        for (std::size_t i = 0; i < n; ++i)
            v[i] += h / 6.0 * (derivs[j][i] + 4.0 * mid[i] + derivs[j + 1][i]);
        values[j + 1] = std::move(v);
    }
    return Segment(sigma, gamma.t_end(), std::move(values), std::move(derivs));
}

/// Step rule of the contraction argument: T = min{T_cap, delta/4M, 1/4L};
/// the cap stands in for the continuity-modulus horizons. M and L are
/// floored to keep the quotients finite.
[[nodiscard]] inline double choose_horizon(double M, double L, double delta, double T_cap) {
    const double Mf = std::max(M, 1e-12);
    const double Lf = std::max(L, 1e-12);
    return std::min({T_cap, delta / (4.0 * Mf), 1.0 / (4.0 * Lf)});
}

namespace detail {

/// Max of |F| over a few sampled C1-prolongations plus the base ray. The
/// existence of such a bound is assumed by the local theory; this
/// manufactures a concrete number.
inline double estimate_bound_M(const HistoryFunctional& F, double sigma, const HistoryView& psi,
                               const Vec& v, double T, double delta, std::uint64_t seed,
                               int nodes_per_unit) {
    double M = inf_norm(v);
    RectangleSpec rect{sigma, psi, T, delta, RectangleOrder::C1, v};
    const int samples = 16;
    for (int i = -1; i < samples; ++i) {
        Segment cand = (i < 0)
                           ? Segment::line(sigma, sigma + T, psi(0.0), v,
                                           std::max<std::size_t>(4, static_cast<std::size_t>(T * nodes_per_unit + 0.5)))
                           : random_prolongation(rect, T, mix_seed(seed, 100 + i), nodes_per_unit);
        for (std::size_t j = 0; j < cand.node_count(); ++j) {
            const double u = cand.node_time(j);
            const HistoryView hist = prolonged_history(psi, cand, u);
            if (!F.in_domain(u, hist)) continue;
            M = std::max(M, inf_norm(F.eval(u, hist)));
        }
    }
    return M;
}

inline double obtain_L(const HistoryFunctional& F, double sigma, const HistoryView& psi,
                       double T, double delta, const LipschitzSource& src) {
    if (const auto* user = std::get_if<UserProvidedL>(&src)) return user->L;
    const auto est = std::get<EstimatedL>(src);
    LipschitzOptions lo;
    lo.mode = LipschitzMode::AboutC1Prolongations;
    lo.horizon = T;
    lo.radius = delta;
    lo.samples = est.samples;
    lo.seed = est.seed;
    try {
        return estimate_lipschitz(F, sigma, psi, lo).value;
    } catch (const NoValidPairs&) {
        return 0.0;
    }
}

} // namespace detail

/// Fixed-point solve on one segment: builds the base ray, applies the
/// integral operator until the rho1 increment drops below tolerance, halving
/// the span on domain exits or non-convergence. The returned segment is a
/// C1-solution piece on [sigma, sigma + T].
inline std::pair<Segment, SolveDiagnostics> solve_local(const HistoryFunctional& F, double sigma,
                                                        const HistoryView& psi,
                                                        const SolveOptions& opts,
                                                        std::optional<Segment> start = std::nullopt,
                                                        std::optional<double> horizon_cap = std::nullopt) {
    opts.validate();
    HistoryView base = psi;
    if (!F.in_domain(sigma, base))
        throw SolverFailure(EscapeCause::DomainExit, "solve_local: base point outside dom(F)");
    const Vec v = F.eval(sigma, base);

    // Radius scales with the state so blow-ups advance geometrically.
    const double delta = opts.delta * std::max(1.0, inf_norm(base(0.0)));

    const double M = detail::estimate_bound_M(F, sigma, base, v, opts.T_cap, delta,
                                              0xD0E5u, opts.grid_nodes_per_unit);
    const double L = detail::obtain_L(F, sigma, base, opts.T_cap, delta, opts.lipschitz_source);

    double T = choose_horizon(M, L, delta, opts.T_cap);
    if (horizon_cap) T = std::min(T, *horizon_cap);

    SolveDiagnostics diag;
    diag.estimated_M = M;
    diag.estimated_L = L;

    const double guard = 1e3 * std::max(1.0, inf_norm(base(0.0))) + 10.0 * opts.blow_threshold;
    bool diverged_at_floor = false;

    while (T >= opts.T_min) {
        const auto nodes = std::max<std::size_t>(
            2, static_cast<std::size_t>(T * opts.grid_nodes_per_unit + 0.5));
        Segment gamma = start && std::abs(start->t_end() - (sigma + T)) < 1e-12 &&
                                start->node_count() == nodes + 1
                            ? *start
                            : Segment::line(sigma, sigma + T, base(0.0), v, nodes);
        diag.chosen_T = T;
        diag.contraction_ratios.clear();
        diag.picard_iterations = 0;

        bool retry = false;
        double prev_diff = -1.0;
        int rising = 0;
        for (int k = 0; k < opts.max_picard_iters; ++k) {
            Segment next = [&] {
                try {
                    return picard_apply(F, sigma, base, gamma);
                } catch (const DomainExit&) {
                    retry = true;
                    return gamma;
                }
            }();
            if (retry) break;
            if (next.max_value_norm() > guard || !all_finite(next.values().back())) {
                retry = true;
                break;
            }
            const double diff = rho1(next, gamma);
            ++diag.picard_iterations;
            if (prev_diff > opts.fixed_point_tol)
                diag.contraction_ratios.push_back(diff / prev_diff);
            if (diff > prev_diff && prev_diff >= 0.0) ++rising;
            gamma = std::move(next);
            if (diff <= opts.fixed_point_tol) {
                diag.fixed_point_residual = diff;
                // Final derivative refresh: the converged iterate's stored
                // slopes are F of the previous sweep; recomputing them against
                // the iterate itself pins xdot = F(t, I_t x) exactly at nodes
                // and makes junctions match to the bit.
                try {
                    std::vector<Vec> refreshed(gamma.node_count());
                    for (std::size_t j = 0; j < gamma.node_count(); ++j) {
                        const double u = gamma.node_time(j);
                        const HistoryView hist = prolonged_history(base, gamma, u);
                        if (!F.in_domain(u, hist)) throw DomainExit(u, "refresh");
                        refreshed[j] = F.eval(u, hist);
                    }
                    gamma = Segment(sigma, gamma.t_end(), gamma.values(), std::move(refreshed));
                } catch (const Error&) {
                    // Keep the stale slopes; they are within tolerance anyway.
                }
                return {std::move(gamma), diag};
            }
            prev_diff = diff;
        }
        if (!retry) {
            // Iteration budget exhausted without convergence.
            diverged_at_floor = rising >= 3;
        }
        T *= 0.5;
        start.reset();
    }
    throw SolverFailure(diverged_at_floor ? EscapeCause::PicardDiverged : EscapeCause::StepCollapse,
                        diverged_at_floor ? "solve_local: Picard iteration diverged at minimal span"
                                          : "solve_local: span collapsed below T_min");
}

/// Repeatedly solve at the right endpoint and append, realizing the unique
/// maximal solution up to the horizon or an escape. Escapes are encoded in
/// the report, and the partial trajectory is always returned. The last
/// diagnostics of each accepted segment are collected for inspection.
inline std::pair<Trajectory, EscapeReport> continue_maximal(
    const HistoryFunctional& F, const InitialHistory& initial, double t0, double horizon,
    const SolveOptions& opts, std::vector<SolveDiagnostics>* diagnostics = nullptr) {
    opts.validate();
    Trajectory traj(initial, t0);
    EscapeReport report;
    const double t_stop = t0 + horizon;
    while (traj.end_time() < t_stop - 1e-12) {
        const double sigma = traj.end_time();
        try {
            const HistoryView psi = history_at(traj, sigma);
            auto [seg, diag] = solve_local(F, sigma, psi, opts, std::nullopt, t_stop - sigma);
            if (diagnostics) diagnostics->push_back(diag);
            if (seg.max_value_norm() > opts.blow_threshold) {
                report.cause = EscapeCause::BlowUp;
                report.t_escape = sigma;
                return {std::move(traj), report};
            }
            traj.append(seg);
        } catch (const SolverFailure& fail) {
            // Distinguish step collapse from blow-up by the size of the last piece.
            report.cause = fail.cause;
            if (fail.cause == EscapeCause::StepCollapse && !traj.segments().empty() &&
                traj.segments().back().max_value_norm() > 0.1 * opts.blow_threshold)
                report.cause = EscapeCause::BlowUp;
            report.t_escape = traj.end_time();
            return {std::move(traj), report};
        }
    }
    report.cause = EscapeCause::HorizonReached;
    report.t_escape = std::nullopt;
    return {std::move(traj), report};
}

/// Escape raised by the solution process when tau is past the detected
/// escape time.
struct EscapeBeforeTau : Error {
    EscapeReport report;
    explicit EscapeBeforeTau(EscapeReport r)
        : Error("solution process escaped before tau (cause " + to_string(r.cause) + ")"),
          report(std::move(r)) {}
};

/// The solution process P_F(tau, t0, phi0) = I_{t0+tau}[x_F(.; t0, phi0)],
/// returned with its backing trajectory so the view stays valid.
struct ProcessState {
    Trajectory trajectory;
    double anchor;

    [[nodiscard]] HistoryView state() const { return history_at(trajectory, anchor); }
};

inline ProcessState solution_process(const HistoryFunctional& F, double tau, double t0,
                                     const InitialHistory& phi0, const SolveOptions& opts) {
    if (tau < 0.0) throw Error("solution_process: tau must be >= 0");
    auto [traj, report] = continue_maximal(F, phi0, t0, tau, opts);
    if (report.cause != EscapeCause::HorizonReached) throw EscapeBeforeTau(report);
    return ProcessState{std::move(traj), t0 + tau};
}

/// Materializes the history of a trajectory at an anchor as a fresh initial
/// datum, so the process can be restarted as a new IVP. The datum wraps a
/// frozen copy of the trajectory and reads it exactly; resampling onto a
/// fixed grid would smear the derivative kinks that delay problems propagate
/// from t0.
inline InitialHistory materialize_history(const Trajectory& traj, double anchor) {
    const PastInterval& I = traj.initial().interval();
    if (I.is_point())
        return InitialHistory::constant(I, traj.value(anchor));
    auto frozen = std::make_shared<const Trajectory>(traj);
    std::vector<InitialHistory::Component> comps;
    comps.reserve(traj.dim());
    for (std::size_t i = 0; i < traj.dim(); ++i)
        comps.push_back([frozen, anchor, i](double th) { return frozen->value(anchor + th)[i]; });
    InitialHistory out = InitialHistory::closed_form(I, std::move(comps));
    if (auto d = frozen->derivative(anchor)) out.set_derivative_at_zero_minus(*d);
    return out;
}

} // namespace dde
