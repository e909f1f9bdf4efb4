#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dde/history.hpp"
#include "dde/segment.hpp"

namespace dde {

/// Default probe density for windowed sup norms, points per unit length.
/// Norms over windows are evaluated on a finite grid, so every "sup" in this
/// module is a sampled approximation; density is the knob.
inline constexpr int default_probe_density = 32;

/// Probe offsets over [-R, 0]: uniform fill plus stored node offsets of the
/// participating views plus both endpoints. Collapses to {0} for the ODE case.
inline std::vector<double> probe_offsets(double window, const HistoryView& a,
                                         const HistoryView* b = nullptr,
                                         int per_unit = default_probe_density) {
    const double depth = a.interval().depth();
    const double R = std::min(window, depth);
    if (a.interval().is_point() || R <= 0.0) return {0.0};
    std::vector<double> pts;
    const auto uniform = std::max<std::size_t>(2, static_cast<std::size_t>(R * per_unit + 0.5) + 1);
    pts.reserve(uniform + 16);
    for (std::size_t k = 0; k < uniform; ++k)
        pts.push_back(-R + R * static_cast<double>(k) / static_cast<double>(uniform - 1));
    for (double off : a.node_offsets(-R, 0.0)) pts.push_back(off);
    if (b)
        for (double off : b->node_offsets(-R, 0.0)) pts.push_back(off);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              pts.end());
    if (pts.back() < -1e-12) pts.push_back(0.0);
    return pts;
}

/// Sampled sup-norm of a - b over [-R, 0].
inline double sup_norm_diff(const HistoryView& a, const HistoryView& b, double window,
                            int per_unit = default_probe_density) {
    double m = 0.0;
    for (double th : probe_offsets(window, a, &b, per_unit))
        m = std::max(m, inf_dist(a(th), b(th)));
    return m;
}

/// Sampled sup-norm of a single view over [-R, 0].
inline double sup_norm(const HistoryView& a, double window, int per_unit = default_probe_density) {
    double m = 0.0;
    for (double th : probe_offsets(window, a, nullptr, per_unit))
        m = std::max(m, inf_norm(a(th)));
    return m;
}

/// Discrete Lipschitz estimate of a view over [-R, 0]: max difference
/// quotient over adjacent probe points, sharpened by stored derivative norms
/// where the view exposes them.
inline double lip_const(const HistoryView& view, double window,
                        int per_unit = default_probe_density) {
    const auto pts = probe_offsets(window, view, nullptr, per_unit);
    if (pts.size() < 2) return 0.0;
    double m = 0.0;
    Vec prev = view(pts.front());
    for (std::size_t k = 1; k < pts.size(); ++k) {
        Vec cur = view(pts[k]);
        const double dt = pts[k] - pts[k - 1];
        if (dt > 1e-14) m = std::max(m, inf_dist(cur, prev) / dt);
        prev = std::move(cur);
    }
    for (double th : pts)
        if (auto d = view.derivative(th)) m = std::max(m, inf_norm(*d));
    return m;
}

/// Smallest s such that [-s, 0] contains every probe point where the views
/// differ by more than tol; nullopt when they agree everywhere on the window.
inline std::optional<double> support_of_difference(const HistoryView& a, const HistoryView& b,
                                                   double scan_window, double tol = 1e-10,
                                                   int per_unit = default_probe_density) {
    std::optional<double> radius;
    for (double th : probe_offsets(scan_window, a, &b, per_unit)) {
        if (inf_dist(a(th), b(th)) > tol) {
            const double s = -th;
            if (!radius || s > *radius) radius = s;
        }
    }
    return radius;
}

namespace detail {
inline void require_same_grid(const Segment& a, const Segment& b) {
    if (std::abs(a.t_start() - b.t_start()) > 1e-12 || std::abs(a.t_end() - b.t_end()) > 1e-12 ||
        a.node_count() != b.node_count())
        throw SpanMismatch("segments must share span and grid");
}
} // namespace detail

/// rho0: sup-norm distance of two same-grid segments, sampled at nodes and
/// Hermite midpoints.
inline double rho0(const Segment& a, const Segment& b) {
    detail::require_same_grid(a, b);
    double m = 0.0;
    const auto nodes = a.node_count();
    for (std::size_t j = 0; j < nodes; ++j)
        m = std::max(m, inf_dist(a.values()[j], b.values()[j]));
    for (std::size_t j = 0; j + 1 < nodes; ++j) {
        const double tm = 0.5 * (a.node_time(j) + a.node_time(j + 1));
        m = std::max(m, inf_dist(a.value(tm), b.value(tm)));
    }
    return m;
}

/// rho1: the C1 distance, value sup plus derivative sup, nodes and midpoints.
inline double rho1(const Segment& a, const Segment& b) {
    detail::require_same_grid(a, b);
    double dm = 0.0;
    const auto nodes = a.node_count();
    for (std::size_t j = 0; j < nodes; ++j)
        dm = std::max(dm, inf_dist(a.derivatives()[j], b.derivatives()[j]));
    for (std::size_t j = 0; j + 1 < nodes; ++j) {
        const double tm = 0.5 * (a.node_time(j) + a.node_time(j + 1));
        dm = std::max(dm, inf_dist(a.derivative(tm), b.derivative(tm)));
    }
    return rho0(a, b) + dm;
}

/// C1 magnitude of a single segment relative to a line base, used for
/// membership radii: sup |s - base| + sup |s' - slope|.
inline double c1_norm_about_line(const Segment& s, const Vec& start_value, const Vec& slope) {
    double vm = 0.0, dm = 0.0;
    const auto nodes = s.node_count();
    auto line_at = [&](double t) { return axpy(start_value, t - s.t_start(), slope); };
    for (std::size_t j = 0; j < nodes; ++j) {
        vm = std::max(vm, inf_dist(s.values()[j], line_at(s.node_time(j))));
        dm = std::max(dm, inf_dist(s.derivatives()[j], slope));
    }
    for (std::size_t j = 0; j + 1 < nodes; ++j) {
        const double tm = 0.5 * (s.node_time(j) + s.node_time(j + 1));
        vm = std::max(vm, inf_dist(s.value(tm), line_at(tm)));
        dm = std::max(dm, inf_dist(s.derivative(tm), slope));
    }
    return vm + dm;
}

} // namespace dde
