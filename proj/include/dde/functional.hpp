#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "dde/history.hpp"
#include "dde/past_interval.hpp"

namespace dde {

/// The right-hand side of the equation: F maps (t, history) to a derivative
/// vector, with an explicit domain predicate. `delay_depth` is the maximal
/// lookback the evaluator touches (nullopt for unbounded delays); values of
/// the history beyond that depth must not influence the result.
struct HistoryFunctional {
    std::size_t n = 1;
    PastInterval interval = PastInterval::point();
    std::function<Vec(double, const HistoryView&)> eval;
    std::function<bool(double, const HistoryView&)> in_domain;
    std::optional<double> delay_depth;
    std::string name;
};

/// A state-dependent delay tau(t, phi) >= 0, constrained to land in -I.
struct DelayFunctional {
    std::function<double(double, const HistoryView&)> eval;
    std::function<bool(double, const HistoryView&)> in_domain;
};

/// Pointwise right-hand sides entering the builders.
using PointMap2 = std::function<Vec(double, const Vec&, const Vec&)>;  // f(t, x, y)
using PointMap1 = std::function<Vec(double, const Vec&)>;              // f(t, x)

/// F identically v: the trivial RFDE xdot = v whose flow is S_v.
inline HistoryFunctional build_trivial(PastInterval interval, Vec v) {
    HistoryFunctional F;
    F.n = v.size();
    F.interval = std::move(interval);
    F.delay_depth = 0.0;
    F.name = "trivial";
    F.eval = [v](double, const HistoryView&) { return v; };
    F.in_domain = [](double, const HistoryView&) { return true; };
    return F;
}

/// F(t, phi) = f(t, phi(0), phi(-r)), the single constant lag.
inline HistoryFunctional build_constant_lag(PastInterval interval, PointMap2 f, double r,
                                            std::size_t n) {
    if (!interval.admits_lag(r))
        throw DelayExceedsInterval("build_constant_lag: lag exceeds the past interval");
    HistoryFunctional F;
    F.n = n;
    F.interval = interval;
    F.delay_depth = r;
    F.name = "constant_lag";
    F.eval = [f, r](double t, const HistoryView& phi) { return f(t, phi(0.0), phi(-r)); };
    F.in_domain = [f, r](double t, const HistoryView& phi) {
        try {
            (void)f(t, phi(0.0), phi(-r));
            return true;
        } catch (const Error&) {
            return false;
        }
    };
    return F;
}

/// F_{f,tau}(t, phi) = f(t, phi(0), phi(-tau(t, phi))): evaluate the delay
/// functional first, then read the history at the delayed point.
inline HistoryFunctional build_state_dependent(PastInterval interval, PointMap2 f,
                                               DelayFunctional tau, std::size_t n) {
    HistoryFunctional F;
    F.n = n;
    F.interval = interval;
    F.delay_depth = interval.is_compact() ? std::optional<double>(interval.depth()) : std::nullopt;
    F.name = "state_dependent";
    auto lag_of = [interval, tau](double t, const HistoryView& phi) {
        const double lag = tau.eval(t, phi);
        if (!interval.admits_lag(lag, 1e-9))
            throw DelayExceedsInterval("state-dependent delay left the past interval");
        return lag;
    };
    F.eval = [f, lag_of](double t, const HistoryView& phi) {
        const double lag = lag_of(t, phi);
        return f(t, phi(0.0), phi(-lag));
    };
    F.in_domain = [f, tau, lag_of](double t, const HistoryView& phi) {
        if (tau.in_domain && !tau.in_domain(t, phi)) return false;
        try {
            const double lag = lag_of(t, phi);
            (void)f(t, phi(0.0), phi(-lag));
            return true;
        } catch (const Error&) {
            return false;
        }
    };
    return F;
}

/// ODE reduction: F_f(t, phi) = f(t, phi(0)) on the point interval.
inline HistoryFunctional build_ode(PastInterval interval, PointMap1 f, std::size_t n) {
    if (!interval.is_point())
        throw IntervalMismatch("build_ode: requires the point past interval");
    HistoryFunctional F;
    F.n = n;
    F.interval = interval;
    F.delay_depth = 0.0;
    F.name = "ode";
    F.eval = [f](double t, const HistoryView& phi) { return f(t, phi(0.0)); };
    F.in_domain = [f](double t, const HistoryView& phi) {
        try {
            (void)f(t, phi(0.0));
            return true;
        } catch (const Error&) {
            return false;
        }
    };
    return F;
}

} // namespace dde
