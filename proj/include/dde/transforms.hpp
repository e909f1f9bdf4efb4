#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dde/history.hpp"
#include "dde/norms.hpp"
#include "dde/rng.hpp"

namespace dde {

/// psi^{wedge v} evaluated at a signed offset s from the base time:
/// psi(s) on the past, psi(0) + s*v forward.
inline Vec wedge_value(const HistoryView& psi, const Vec& v, double s) {
    if (s >= 0.0) return axpy(psi(0.0), s, v);
    return psi(s);
}

/// The trivial-RFDE flow S(t)(v, phi) = I_t[phi^{wedge v}], returned as a view
/// anchored t past phi's anchor.
inline HistoryView trivial_flow(double t, Vec v, const HistoryView& phi) {
    HistoryView base = phi;
    return HistoryView(
        phi.interval(), phi.anchor() + t, phi.dim(),
        [base, v, t](double th) { return wedge_value(base, v, t + th); },
        [base, v, t](double th) -> std::optional<Vec> {
            const double s = t + th;
            if (s > 0.0) return v;
            return base.derivative(s);
        },
        [base, t](double lo, double hi) {
            std::vector<double> out;
            for (double off : base.node_offsets(lo + t, std::min(hi + t, 0.0)))
                out.push_back(off - t);
            return out;
        });
}

/// Wedge extension materialized as a one-segment trajectory whose forward
/// part is the exact line of slope v over [t0, t0 + span].
inline Trajectory wedge_extend(const InitialHistory& psi, double t0, const Vec& v, double span,
                               std::size_t nodes_per_unit = 64) {
    Trajectory traj(psi, t0);
    const auto nodes = std::max<std::size_t>(1, static_cast<std::size_t>(span * nodes_per_unit + 0.5));
    traj.append(Segment::line(t0, t0 + span, psi.value_at_zero(), v, nodes));
    return traj;
}

/// History at time u of the prolongation obtained by extending a base
/// history (anchored at the segment's start) with a candidate segment.
inline HistoryView prolonged_history(const HistoryView& base, const Segment& cand, double u) {
    HistoryView psi = base;
    const Segment* seg = &cand;
    const double sigma = cand.t_start();
    return HistoryView(
        base.interval(), u, base.dim(),
        [psi, seg, sigma, u](double th) {
            const double tt = u + th;
            if (tt >= sigma) return seg->value(std::min(tt, seg->t_end()));
            return psi(tt - sigma);
        },
        [psi, seg, sigma, u](double th) -> std::optional<Vec> {
            const double tt = u + th;
            if (tt >= sigma) return seg->derivative(std::min(tt, seg->t_end()));
            return psi.derivative(tt - sigma);
        },
        [psi, seg, sigma, u](double lo, double hi) {
            std::vector<double> out;
            for (std::size_t j = 0; j < seg->node_count(); ++j) {
                const double off = seg->node_time(j) - u;
                if (off >= lo - 1e-12 && off <= hi + 1e-12) out.push_back(off);
            }
            for (double off : psi.node_offsets(lo + (u - sigma), std::min(hi + (u - sigma), 0.0)))
                out.push_back(off - (u - sigma));
            return out;
        });
}

/// Translation tau_{sigma,psi}^v (t, phi) = (sigma + t, I_t[psi^{wedge v}] + phi).
inline std::pair<double, HistoryView> translate(double sigma, const HistoryView& psi, Vec v,
                                                double t, const HistoryView& phi) {
    HistoryView flow = trivial_flow(t, std::move(v), psi);
    HistoryView base = phi;
    HistoryView sum(phi.interval(), sigma + t, phi.dim(),
                    [flow, base](double th) { return add(flow(th), base(th)); });
    return {sigma + t, std::move(sum)};
}

/// Inverse translation: (t_abs, phi_abs) -> (t_abs - sigma, phi_abs - I_{t_abs-sigma}[psi^{wedge v}]).
inline std::pair<double, HistoryView> translate_inv(double sigma, const HistoryView& psi, Vec v,
                                                    double t_abs, const HistoryView& phi_abs) {
    const double t = t_abs - sigma;
    HistoryView flow = trivial_flow(t, std::move(v), psi);
    HistoryView base = phi_abs;
    HistoryView diff(phi_abs.interval(), t, phi_abs.dim(),
                     [flow, base](double th) { return sub(base(th), flow(th)); });
    return {t, std::move(diff)};
}

/// Addition transform A_{sigma,psi}^v: shifts a prolongation of 0 onto the
/// base ray of (sigma, psi). Grid-exact on stored node data.
inline Segment add_prolongation(double sigma, const Vec& psi0, const Vec& v, const Segment& beta) {
    if (std::abs(beta.t_start()) > 1e-12)
        throw AnchorMismatch("add_prolongation: beta must be anchored at 0");
    std::vector<Vec> vals(beta.node_count()), ders(beta.node_count());
    for (std::size_t j = 0; j < beta.node_count(); ++j) {
        const double s = beta.node_time(j);
        vals[j] = add(axpy(psi0, s, v), beta.values()[j]);
        ders[j] = add(v, beta.derivatives()[j]);
    }
    return Segment(sigma, sigma + beta.span(), std::move(vals), std::move(ders));
}

/// Normalization N_{sigma,psi}^v, the exact inverse of add_prolongation.
inline Segment normalize_prolongation(double sigma, const Vec& psi0, const Vec& v, const Segment& gamma) {
    if (std::abs(gamma.t_start() - sigma) > 1e-12)
        throw AnchorMismatch("normalize_prolongation: gamma must be anchored at sigma");
    std::vector<Vec> vals(gamma.node_count()), ders(gamma.node_count());
    for (std::size_t j = 0; j < gamma.node_count(); ++j) {
        const double s = gamma.node_time(j) - sigma;
        vals[j] = sub(gamma.values()[j], axpy(psi0, s, v));
        ders[j] = sub(gamma.derivatives()[j], v);
    }
    return Segment(0.0, gamma.span(), std::move(vals), std::move(ders));
}

enum class RectangleOrder { C0, C1 };

/// A rectangle by (C1-)prolongations: the tube of (time, history) pairs
/// reachable as histories of prolongations within radius delta of the base
/// ray over horizon T.
struct RectangleSpec {
    double base_time = 0.0;
    HistoryView base_history;
    double horizon = 1.0;
    double radius = 1.0;
    RectangleOrder order = RectangleOrder::C0;
    Vec slope;            // bound iff order == C1; in solver use, F(sigma, psi)
    double support_tol = 1e-10;
    double slope_tol = 1e-6;
    int probe_density = default_probe_density;
};

enum class RectangleReason { Ok, HorizonExceeded, SupportTooWide, NormTooLarge, SlopeMismatch };

struct RectangleResult {
    bool inside = false;
    RectangleReason reason = RectangleReason::Ok;
    double tau = 0.0;
    double support_radius = 0.0;
    double value_sup = 0.0;
    double derivative_sup = 0.0;
    double left_slope = 0.0;
};

/// Membership test for (t, phi) against a rectangle, decided on the probe
/// grid via the compact-support characterization: normalize against the base
/// ray, then check support width and the relevant norm.
inline RectangleResult in_rectangle(const RectangleSpec& spec, double t, const HistoryView& phi) {
    RectangleResult res;
    const double tau = t - spec.base_time;
    res.tau = tau;
    if (tau < -1e-12 || tau > spec.horizon + 1e-12) {
        res.reason = RectangleReason::HorizonExceeded;
        return res;
    }
    const Vec v = (spec.order == RectangleOrder::C1) ? spec.slope : Vec(phi.dim(), 0.0);
    const HistoryView flow = trivial_flow(tau, v, spec.base_history);
    const HistoryView diff = phi.minus(flow);

    const double depth = phi.interval().depth();
    const double scan = phi.interval().is_whole_past() ? tau + std::max(1.0, tau) : depth;
    const double cell = 1.0 / spec.probe_density;

    const auto pts = probe_offsets(scan, phi, &flow, spec.probe_density);
    std::vector<Vec> d(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) d[k] = diff(pts[k]);

    double support = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (inf_norm(d[k]) > spec.support_tol) {
            support = std::max(support, -pts[k]);
            any = true;
        }
    }
    res.support_radius = any ? support : 0.0;
    if (any && support > tau + cell + 1e-12) {
        res.reason = RectangleReason::SupportTooWide;
        return res;
    }

    double vsup = 0.0;
    for (const auto& dk : d) vsup = std::max(vsup, inf_norm(dk));
    res.value_sup = vsup;

    if (spec.order == RectangleOrder::C0) {
        if (vsup > spec.radius + 1e-9) {
            res.reason = RectangleReason::NormTooLarge;
            return res;
        }
        res.inside = true;
        return res;
    }

    // C1 order: finite-difference derivative of the normalized candidate.
    double dsup = 0.0;
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
        const double dt = pts[k + 1] - pts[k - 1];
        if (dt > 1e-14) {
            Vec slope_fd = scaled(sub(d[k + 1], d[k - 1]), 1.0 / dt);
            dsup = std::max(dsup, inf_norm(slope_fd));
        }
    }
    res.derivative_sup = dsup;

    // Left-end slope of the support must vanish (gamma'(sigma) = v).
    double left_slope = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (pts[k] >= -tau - 1e-12) {
            const double dt = pts[k + 1] - pts[k];
            if (dt > 1e-14) left_slope = inf_norm(scaled(sub(d[k + 1], d[k]), 1.0 / dt));
            break;
        }
    }
    res.left_slope = left_slope;
    if (tau > cell && left_slope > spec.slope_tol) {
        res.reason = RectangleReason::SlopeMismatch;
        return res;
    }
    if (vsup + dsup > spec.radius + 1e-9) {
        res.reason = RectangleReason::NormTooLarge;
        return res;
    }
    res.inside = true;
    return res;
}

namespace detail {
/// C1 bump (1 - u^2)^2 on |u| < 1, together with its derivative.
inline double bump(double u) {
    const double w = 1.0 - u * u;
    return (w > 0.0) ? w * w : 0.0;
}
inline double bump_deriv(double u, double width) {
    const double w = 1.0 - u * u;
    return (w > 0.0) ? -4.0 * u * w / width : 0.0;
}
} // namespace detail

/// Deterministic-in-seed member of Gamma_{sigma,psi}(span, delta) (order C0)
/// or Gamma^1_{sigma,psi}(span, delta, v) (order C1): the base ray plus a sum
/// of at most five bump basis functions that vanish, with vanishing
/// derivative, near the left end, rescaled so the relevant norm stays inside
/// the radius.
inline Segment random_prolongation(const RectangleSpec& spec, double span, std::uint64_t seed,
                                   std::size_t nodes_per_unit = 64) {
    if (!(span > 0.0 && span <= spec.horizon + 1e-12))
        throw Error("random_prolongation: span must lie in (0, T]");
    auto rng = make_rng(seed);
    const std::size_t n = spec.base_history.dim();
    const Vec psi0 = spec.base_history(0.0);
    const Vec v = (spec.order == RectangleOrder::C1) ? spec.slope : Vec(n, 0.0);
    const auto nodes = std::max<std::size_t>(8, static_cast<std::size_t>(span * nodes_per_unit + 0.5));
    const double h = span / static_cast<double>(nodes);

    std::uniform_int_distribution<int> count_dist(1, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int bumps = count_dist(rng);
    std::vector<double> centers(bumps), widths(bumps);
    std::vector<Vec> amps(bumps, Vec(n));
    for (int i = 0; i < bumps; ++i) {
        centers[i] = span * (0.25 + 0.65 * unit(rng));
        const double wmax = centers[i] - 0.1 * span;  // keep the left end untouched
        widths[i] = std::max(0.05 * span, wmax * unit(rng));
        widths[i] = std::min(widths[i], wmax);
        for (std::size_t j = 0; j < n; ++j) amps[i][j] = 2.0 * unit(rng) - 1.0;
    }

    std::vector<Vec> pvals(nodes + 1, Vec(n, 0.0)), pders(nodes + 1, Vec(n, 0.0));
    for (std::size_t k = 0; k <= nodes; ++k) {
        const double s = static_cast<double>(k) * h;
        for (int i = 0; i < bumps; ++i) {
            const double u = (s - centers[i]) / widths[i];
            const double b = detail::bump(u);
            const double db = detail::bump_deriv(u, widths[i]);
            for (std::size_t j = 0; j < n; ++j) {
                pvals[k][j] += amps[i][j] * b;
                pders[k][j] += amps[i][j] * db;
            }
        }
    }

    Segment pert(0.0, span, pvals, pders);
    const double pnorm = (spec.order == RectangleOrder::C1)
                             ? c1_norm_about_line(pert, Vec(n, 0.0), Vec(n, 0.0))
                             : rho0(pert, Segment::line(0.0, span, Vec(n, 0.0), Vec(n, 0.0), nodes));
    double scale = 0.0;
    if (pnorm > 1e-15) {
        const double target = spec.radius * (0.05 + 0.90 * unit(rng));
        scale = target / pnorm;
    }

    std::vector<Vec> vals(nodes + 1), ders(nodes + 1);
    for (std::size_t k = 0; k <= nodes; ++k) {
        const double s = static_cast<double>(k) * h;
        vals[k] = axpy(axpy(psi0, s, v), scale, pvals[k]);
        ders[k] = axpy(v, scale, pders[k]);
    }
    return Segment(spec.base_time, spec.base_time + span, std::move(vals), std::move(ders));
}

} // namespace dde
