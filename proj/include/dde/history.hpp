#pragma once

#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "dde/errors.hpp"
#include "dde/past_interval.hpp"
#include "dde/segment.hpp"
#include "dde/vec.hpp"

namespace dde {

/// The initial datum phi0 of an IVP: a function on the past interval,
/// either closed-form per component or a sampled Hermite segment on [-r, 0].
class InitialHistory {
public:
    using Component = std::function<double(double)>;

    static InitialHistory closed_form(PastInterval interval, std::vector<Component> components) {
        InitialHistory h(std::move(interval));
        h.n_ = components.size();
        h.components_ = std::move(components);
        h.value_at_zero_.resize(h.n_);
        for (std::size_t i = 0; i < h.n_; ++i) h.value_at_zero_[i] = h.components_[i](0.0);
        return h;
    }

    static InitialHistory constant(PastInterval interval, Vec value) {
        std::vector<Component> comps;
        comps.reserve(value.size());
        for (double c : value)
            comps.push_back([c](double) { return c; });
        return closed_form(std::move(interval), std::move(comps));
    }

    /// Sampled bodies are only allowed on a compact interval and must span
    /// exactly [-r, 0].
    static InitialHistory sampled(PastInterval interval, Segment body) {
        if (!interval.is_compact())
            throw Error("InitialHistory: sampled body requires a compact past interval");
        const double r = interval.depth();
        if (std::abs(body.t_start() + r) > 1e-9 || std::abs(body.t_end()) > 1e-9)
            throw Error("InitialHistory: sampled body must span exactly [-r, 0]");
        InitialHistory h(std::move(interval));
        h.n_ = body.dim();
        h.value_at_zero_ = body.value(0.0);
        h.derivative_at_zero_minus_ = body.derivative(0.0);
        h.sampled_ = std::make_shared<Segment>(std::move(body));
        return h;
    }

    [[nodiscard]] const PastInterval& interval() const { return interval_; }
    [[nodiscard]] std::size_t dim() const { return n_; }
    [[nodiscard]] const Vec& value_at_zero() const { return value_at_zero_; }
    [[nodiscard]] const std::optional<Vec>& derivative_at_zero_minus() const { return derivative_at_zero_minus_; }

    void set_derivative_at_zero_minus(Vec d) { derivative_at_zero_minus_ = std::move(d); }

    [[nodiscard]] Vec value(double theta) const {
        if (interval_.is_point()) {
            if (std::abs(theta) > 1e-12) throw OutOfDomain("InitialHistory: ODE history is the point {0}");
            return value_at_zero_;
        }
        if (!interval_.contains(theta))
            throw OutOfDomain("InitialHistory: theta outside past interval");
        if (theta >= 0.0) return value_at_zero_;
        if (sampled_) return sampled_->value(theta);
        Vec out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = components_[i](theta);
        return out;
    }

    [[nodiscard]] std::optional<Vec> derivative(double theta) const {
        if (sampled_) return sampled_->derivative(theta);
        if (theta >= -1e-12 && derivative_at_zero_minus_) return derivative_at_zero_minus_;
        return std::nullopt;
    }

    [[nodiscard]] const Segment* sampled_body() const { return sampled_ ? sampled_.get() : nullptr; }

    /// Returns a copy whose body is the original plus a perturbation given in
    /// theta coordinates (used by the dependence and escape probes).
    [[nodiscard]] InitialHistory perturbed(std::function<Vec(double)> bump) const {
        InitialHistory base = *this;
        InitialHistory h(interval_);
        h.n_ = n_;
        h.components_.reserve(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            auto eval = [base, bump, i](double theta) { return base.value(theta)[i] + bump(theta)[i]; };
            h.components_.push_back(eval);
        }
        h.value_at_zero_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) h.value_at_zero_[i] = h.components_[i](0.0);
        return h;
    }

private:
    explicit InitialHistory(PastInterval interval) : interval_(std::move(interval)) {}

    PastInterval interval_;
    std::size_t n_ = 0;
    std::vector<Component> components_;
    std::shared_ptr<Segment> sampled_;
    Vec value_at_zero_;
    std::optional<Vec> derivative_at_zero_minus_;
};

/// An initial history plus an ordered chain of solved C1 segments tiling
/// [t0, t_max]. Values dispatch to the segment containing the query time,
/// falling back to the initial history for t <= t0.
class Trajectory {
public:
    Trajectory(InitialHistory initial, double t0)
        : initial_(std::move(initial)), t0_(t0), n_(initial_.dim()) {}

    [[nodiscard]] const InitialHistory& initial() const { return initial_; }
    [[nodiscard]] double t0() const { return t0_; }
    [[nodiscard]] double end_time() const { return segments_.empty() ? t0_ : segments_.back().t_end(); }
    [[nodiscard]] std::size_t dim() const { return n_; }
    [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }

    /// Junction tolerance for C1 matching; the analytical join of two local
    /// solutions has equal one-sided derivatives, numerics gets close.
    static constexpr double junction_derivative_tol = 1e-9;

    void append(Segment s) {
        if (s.dim() != n_) throw Error("Trajectory: segment dimension mismatch");
        const double expected_start = end_time();
        if (std::abs(s.t_start() - expected_start) > 1e-9)
            throw Error("Trajectory: segment must start at the current right endpoint");
        if (!segments_.empty()) {
            const Vec left_v = segments_.back().value(expected_start);
            const Vec right_v = s.value(s.t_start());
            if (inf_dist(left_v, right_v) > 1e-9)
                throw Error("Trajectory: value mismatch at junction");
            const Vec left_d = segments_.back().derivative(expected_start);
            const Vec right_d = s.derivative(s.t_start());
            if (inf_dist(left_d, right_d) > junction_derivative_tol)
                throw Error("Trajectory: derivative mismatch at junction");
        } else if (inf_dist(initial_.value_at_zero(), s.value(s.t_start())) > 1e-9) {
            throw Error("Trajectory: first segment must start at phi0(0)");
        }
        segments_.push_back(std::move(s));
    }

    [[nodiscard]] bool in_domain(double t) const {
        if (t > end_time() + 1e-12) return false;
        return initial_.interval().contains(t - t0_) || t >= t0_ - 1e-12;
    }

    [[nodiscard]] Vec value(double t) const {
        if (t > end_time() + 1e-9)
            throw OutOfDomain("Trajectory: time beyond solved range");
        if (t >= t0_) {
            if (const Segment* s = segment_containing(t)) return s->value(t);
            return initial_.value_at_zero();  // t == t0 with no segments
        }
        return initial_.value(t - t0_);
    }

    [[nodiscard]] std::optional<Vec> derivative(double t) const {
        if (t >= t0_ && t <= end_time() + 1e-9) {
            if (const Segment* s = segment_containing(t)) return s->derivative(t);
            return std::nullopt;
        }
        return initial_.derivative(t - t0_);
    }

    /// Offsets (relative to anchor) of stored nodes inside [anchor+lo, anchor+hi],
    /// used to sharpen probe grids.
    [[nodiscard]] std::vector<double> node_offsets(double anchor, double lo, double hi) const {
        std::vector<double> out;
        for (const auto& s : segments_) {
            for (std::size_t j = 0; j < s.node_count(); ++j) {
                const double off = s.node_time(j) - anchor;
                if (off >= lo - 1e-12 && off <= hi + 1e-12) out.push_back(off);
            }
        }
        if (const Segment* body = initial_.sampled_body()) {
            for (std::size_t j = 0; j < body->node_count(); ++j) {
                const double off = body->node_time(j) + t0_ - anchor;
                if (off >= lo - 1e-12 && off <= hi + 1e-12) out.push_back(off);
            }
        }
        return out;
    }

private:
    [[nodiscard]] const Segment* segment_containing(double t) const {
        for (const auto& s : segments_)
            if (s.contains(t)) return &s;
        return nullptr;
    }

    InitialHistory initial_;
    double t0_;
    std::vector<Segment> segments_;
    std::size_t n_;
};

/// The history I_t x of a source at an anchor time: a lazily evaluated map
/// theta in I -> R^n. Views are cheap values; they capture evaluators by
/// copy or by pointer, so the underlying source must outlive them when bound
/// by reference.
class HistoryView {
public:
    using Eval = std::function<Vec(double)>;
    using Deriv = std::function<std::optional<Vec>(double)>;
    using Nodes = std::function<std::vector<double>(double, double)>;

    HistoryView(PastInterval interval, double anchor, std::size_t n, Eval eval,
                Deriv deriv = nullptr, Nodes nodes = nullptr)
        : interval_(std::move(interval)), anchor_(anchor), n_(n),
          eval_(std::move(eval)), deriv_(std::move(deriv)), nodes_(std::move(nodes)) {}

    [[nodiscard]] const PastInterval& interval() const { return interval_; }
    [[nodiscard]] double anchor() const { return anchor_; }
    [[nodiscard]] std::size_t dim() const { return n_; }

    [[nodiscard]] Vec operator()(double theta) const {
        if (!interval_.contains(theta))
            throw OutOfDomain("HistoryView: theta outside past interval");
        return eval_(theta);
    }

    [[nodiscard]] std::optional<Vec> derivative(double theta) const {
        if (!deriv_) return std::nullopt;
        return deriv_(theta);
    }

    [[nodiscard]] std::vector<double> node_offsets(double lo, double hi) const {
        if (!nodes_) return {};
        return nodes_(lo, hi);
    }

    /// View of this history plus a theta-space perturbation.
    [[nodiscard]] HistoryView plus(std::function<Vec(double)> bump) const {
        Eval base = eval_;
        return HistoryView(interval_, anchor_, n_,
                           [base, bump](double th) { return add(base(th), bump(th)); },
                           nullptr, nodes_);
    }

    [[nodiscard]] HistoryView minus(const HistoryView& other) const {
        Eval a = eval_, b = other.eval_;
        return HistoryView(interval_, anchor_, n_,
                           [a, b](double th) { return sub(a(th), b(th)); });
    }

private:
    PastInterval interval_;
    double anchor_;
    std::size_t n_;
    Eval eval_;
    Deriv deriv_;
    Nodes nodes_;
};

/// History of a trajectory at time t. Throws if t is outside the solved range.
inline HistoryView history_at(const Trajectory& traj, double t) {
    if (t < traj.t0() - 1e-12 || t > traj.end_time() + 1e-12)
        throw OutOfDomain("history_at: t outside [t0, end_time]");
    const Trajectory* src = &traj;
    return HistoryView(
        traj.initial().interval(), t, traj.dim(),
        [src, t](double th) { return src->value(t + th); },
        [src, t](double th) { return src->derivative(t + th); },
        [src, t](double lo, double hi) { return src->node_offsets(t, lo, hi); });
}

/// History of an initial datum viewed at its own anchor time.
inline HistoryView history_of_initial(const InitialHistory& phi, double anchor) {
    const InitialHistory* src = &phi;
    return HistoryView(
        phi.interval(), anchor, phi.dim(),
        [src](double th) { return src->value(th); },
        [src](double th) { return src->derivative(th); });
}

/// eval of the history map itself: view(theta), provided as the named
/// operation for symmetry with the rest of the interface.
inline Vec eval_history(const HistoryView& view, double theta) { return view(theta); }

/// Trajectory CSV export: header `t,x0,...,dx0,...`, `%.17g` floats, LF rows,
/// `dense` output points per unit time over the solved range.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int dense_per_unit) {
    const std::size_t n = traj.dim();
    os << "t";
    for (std::size_t i = 0; i < n; ++i) os << ",x" << i;
    for (std::size_t i = 0; i < n; ++i) os << ",dx" << i;
    os << "\n";
    const double t0 = traj.t0(), t1 = traj.end_time();
    const double span = t1 - t0;
    const auto rows = std::max<std::size_t>(1, static_cast<std::size_t>(span * dense_per_unit + 0.5));
    char buf[64];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf;
    };
    for (std::size_t k = 0; k <= rows; ++k) {
        const double t = (k == rows) ? t1 : t0 + span * static_cast<double>(k) / static_cast<double>(rows);
        const Vec v = traj.value(t);
        const auto d = traj.derivative(t);
        put(t);
        for (std::size_t i = 0; i < n; ++i) {
            os << ",";
            put(v[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            os << ",";
            put(d ? (*d)[i] : 0.0);
        }
        os << "\n";
    }
}

} // namespace dde
