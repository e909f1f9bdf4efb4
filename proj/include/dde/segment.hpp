#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dde/errors.hpp"
#include "dde/vec.hpp"

namespace dde {

/// A C1 function on a compact interval, stored as node values and node
/// derivatives on a uniform grid and evaluated by cubic Hermite
/// interpolation. This is the carrier for solved solution pieces and for
/// sampled prolongation candidates.
class Segment {
public:
    Segment(double t_start, double t_end, std::vector<Vec> values, std::vector<Vec> derivatives)
        : t_start_(t_start), t_end_(t_end), values_(std::move(values)), derivs_(std::move(derivatives)) {
        if (!(t_start_ < t_end_)) throw Error("Segment: t_start must be < t_end");
        if (values_.size() < 2 || values_.size() != derivs_.size())
            throw Error("Segment: need N+1 >= 2 matching value/derivative nodes");
        n_ = values_.front().size();
        for (const auto& v : values_)
            if (v.size() != n_) throw Error("Segment: inconsistent state dimension");
        for (const auto& d : derivs_)
            if (d.size() != n_) throw Error("Segment: inconsistent state dimension");
        h_ = (t_end_ - t_start_) / static_cast<double>(values_.size() - 1);
    }

    /// Constant-slope line psi0 + (t - t_start) * v, the base ray of a
    /// C1-prolongation space.
    static Segment line(double t_start, double t_end, const Vec& start_value, const Vec& slope,
                        std::size_t node_count) {
        std::vector<Vec> vals(node_count + 1), ders(node_count + 1, slope);
        const double h = (t_end - t_start) / static_cast<double>(node_count);
        for (std::size_t j = 0; j <= node_count; ++j)
            vals[j] = axpy(start_value, static_cast<double>(j) * h, slope);
        return Segment(t_start, t_end, std::move(vals), std::move(ders));
    }

    [[nodiscard]] double t_start() const { return t_start_; }
    [[nodiscard]] double t_end() const { return t_end_; }
    [[nodiscard]] double span() const { return t_end_ - t_start_; }
    [[nodiscard]] double grid_step() const { return h_; }
    [[nodiscard]] std::size_t node_count() const { return values_.size(); }
    [[nodiscard]] std::size_t dim() const { return n_; }
    [[nodiscard]] double node_time(std::size_t j) const { return t_start_ + static_cast<double>(j) * h_; }
    [[nodiscard]] const std::vector<Vec>& values() const { return values_; }
    [[nodiscard]] const std::vector<Vec>& derivatives() const { return derivs_; }

    [[nodiscard]] bool contains(double t, double tol = 1e-12) const {
        return t >= t_start_ - tol && t <= t_end_ + tol;
    }

    /// Cubic Hermite evaluation; exact at nodes by construction.
    [[nodiscard]] Vec value(double t) const {
        const Loc loc = locate(t);
        if (loc.at_node) return values_[loc.cell];
        const auto& y0 = values_[loc.cell];
        const auto& y1 = values_[loc.cell + 1];
        const auto& d0 = derivs_[loc.cell];
        const auto& d1 = derivs_[loc.cell + 1];
        const double u = loc.u, u2 = u * u, u3 = u2 * u;
        const double h00 = 2 * u3 - 3 * u2 + 1;
        const double h10 = u3 - 2 * u2 + u;
        const double h01 = -2 * u3 + 3 * u2;
        const double h11 = u3 - u2;
        Vec out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            out[i] = h00 * y0[i] + h10 * h_ * d0[i] + h01 * y1[i] + h11 * h_ * d1[i];
        return out;
    }

    /// Derivative of the Hermite interpolant; exact at nodes.
    [[nodiscard]] Vec derivative(double t) const {
        const Loc loc = locate(t);
        if (loc.at_node) return derivs_[loc.cell];
        const auto& y0 = values_[loc.cell];
        const auto& y1 = values_[loc.cell + 1];
        const auto& d0 = derivs_[loc.cell];
        const auto& d1 = derivs_[loc.cell + 1];
        const double u = loc.u, u2 = u * u;
        const double g00 = (6 * u2 - 6 * u) / h_;
        const double g10 = 3 * u2 - 4 * u + 1;
        const double g01 = (-6 * u2 + 6 * u) / h_;
        const double g11 = 3 * u2 - 2 * u;
        Vec out(n_);
        for (std::size_t i = 0; i < n_; ++i)
            out[i] = g00 * y0[i] + g10 * d0[i] + g01 * y1[i] + g11 * d1[i];
        return out;
    }

    [[nodiscard]] double max_value_norm() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, inf_norm(v));
        return m;
    }

    /// Same span, different node count; values and derivatives read off the
    /// Hermite interpolant.
    [[nodiscard]] Segment resampled(std::size_t cells) const {
        std::vector<Vec> vals(cells + 1), ders(cells + 1);
        for (std::size_t j = 0; j <= cells; ++j) {
            const double t = t_start_ + span() * static_cast<double>(j) / static_cast<double>(cells);
            vals[j] = value(t);
            ders[j] = derivative(t);
        }
        return Segment(t_start_, t_end_, std::move(vals), std::move(ders));
    }

private:
    struct Loc {
        std::size_t cell;
        double u;
        bool at_node;
    };

    [[nodiscard]] Loc locate(double t) const {
        if (!contains(t, 1e-9 * std::max(1.0, std::abs(t_end_))))
            throw OutOfDomain("Segment: t outside span");
        double s = (t - t_start_) / h_;
        if (s <= 0.0) return {0, 0.0, true};
        const auto last = values_.size() - 1;
        if (s >= static_cast<double>(last)) return {last, 0.0, true};
        auto cell = static_cast<std::size_t>(s);
        double u = s - static_cast<double>(cell);
        if (u < 1e-14) return {cell, 0.0, true};
        if (u > 1.0 - 1e-14) return {cell + 1, 0.0, true};
        return {cell, u, false};
    }

    double t_start_;
    double t_end_;
    std::vector<Vec> values_;
    std::vector<Vec> derivs_;
    std::size_t n_ = 0;
    double h_ = 0.0;
};

} // namespace dde
