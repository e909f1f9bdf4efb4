#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dde/functional.hpp"
#include "dde/history.hpp"

namespace dde {

/// Method-of-steps reference integrator for the single constant lag
/// xdot(t) = f(t, x(t), x(t - r)). On each [t0 + k*r, t0 + (k+1)*r] the
/// delayed argument is already known, so the interval reduces to a
/// nonautonomous ODE integrated with classical RK4; delayed values come from
/// the trajectory built so far. This stays independent of the fixed-point
/// solver and serves as its oracle on constant-lag problems.
inline Trajectory step_method_solve(const PointMap2& f, double r, const InitialHistory& initial,
                                    double t0, double horizon, double rk_step) {
    if (!(r > 0.0)) throw Error("step_method_solve: lag must be positive");
    if (!(rk_step > 0.0)) throw Error("step_method_solve: step must be positive");
    Trajectory traj(initial, t0);
    const std::size_t n = initial.dim();
    const double t_stop = t0 + horizon;

    auto delayed = [&](double u) {
        const double td = u - r;
        if (td <= t0) return initial.value(td - t0);
        return traj.value(td);
    };

    double seg_start = t0;
    Vec x = initial.value_at_zero();
    while (seg_start < t_stop - 1e-12) {
        const double seg_end = std::min(seg_start + r, t_stop);
        const auto steps = std::max<std::size_t>(
            1, static_cast<std::size_t>((seg_end - seg_start) / rk_step + 0.5));
        const double h = (seg_end - seg_start) / static_cast<double>(steps);

        std::vector<Vec> vals(steps + 1), ders(steps + 1);
        vals[0] = x;
        ders[0] = f(seg_start, x, delayed(seg_start));
        for (std::size_t k = 0; k < steps; ++k) {
            const double u = seg_start + static_cast<double>(k) * h;
            const Vec k1 = f(u, x, delayed(u));
            const Vec k2 = f(u + 0.5 * h, axpy(x, 0.5 * h, k1), delayed(u + 0.5 * h));
            const Vec k3 = f(u + 0.5 * h, axpy(x, 0.5 * h, k2), delayed(u + 0.5 * h));
            const Vec k4 = f(u + h, axpy(x, h, k3), delayed(u + h));
            for (std::size_t i = 0; i < n; ++i)
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            vals[k + 1] = x;
            ders[k + 1] = f(u + h, x, delayed(u + h));
        }
        traj.append(Segment(seg_start, seg_end, std::move(vals), std::move(ders)));
        seg_start = seg_end;
    }
    return traj;
}

/// Truncated power series for the pantograph equation
/// xdot(t) = a x(lambda t) + b x(t), x(0) = x0:
/// c_0 = x0, c_{n+1} = (a lambda^n + b) c_n / (n + 1).
inline double pantograph_series(double a, double b, double lambda, double x0, double t,
                                int n_terms) {
    if (n_terms < 1) throw Error("pantograph_series: need at least one term");
    double coeff = x0;
    double sum = coeff;
    double lam_pow = 1.0;  // lambda^n
    double t_pow = 1.0;
    for (int k = 0; k + 1 < n_terms; ++k) {
        coeff = (a * lam_pow + b) * coeff / static_cast<double>(k + 1);
        lam_pow *= lambda;
        t_pow *= t;
        sum += coeff * t_pow;
    }
    return sum;
}

/// Closed forms used by tests and the oracle command.
namespace closed_form {

/// xdot = x^2, x(0) = x0 > 0 blows up at 1/x0.
inline double quadratic_blowup(double x0, double t) { return x0 / (1.0 - x0 * t); }
inline double quadratic_blowup_escape(double x0) { return 1.0 / x0; }

/// xdot = a x.
inline double exponential(double a, double x0, double t) { return x0 * std::exp(a * t); }

} // namespace closed_form

} // namespace dde
