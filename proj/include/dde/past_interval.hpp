#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "dde/errors.hpp"

namespace dde {

/// The domain of histories: [-r, 0], the whole past (-inf, 0], or the
/// degenerate point {0} (the ODE case).
class PastInterval {
public:
    enum class Kind { Compact, WholePast, Point };

    static PastInterval compact(double r) {
        if (!(r > 0.0)) throw Error("PastInterval: compact radius must be > 0");
        return PastInterval(Kind::Compact, r);
    }
    static PastInterval whole_past() { return PastInterval(Kind::WholePast, std::numeric_limits<double>::infinity()); }
    static PastInterval point() { return PastInterval(Kind::Point, 0.0); }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] bool is_compact() const { return kind_ == Kind::Compact; }
    [[nodiscard]] bool is_whole_past() const { return kind_ == Kind::WholePast; }
    [[nodiscard]] bool is_point() const { return kind_ == Kind::Point; }

    /// Lookback depth: r, +inf, or 0.
    [[nodiscard]] double depth() const { return depth_; }

    /// Whether theta belongs to I (theta <= 0 always required).
    [[nodiscard]] bool contains(double theta, double tol = 1e-12) const {
        if (theta > tol) return false;
        switch (kind_) {
            case Kind::Compact: return theta >= -depth_ - tol;
            case Kind::WholePast: return true;
            case Kind::Point: return theta >= -tol;
        }
        return false;
    }

    /// Whether a nonnegative lag tau lies in -I.
    [[nodiscard]] bool admits_lag(double tau, double tol = 1e-12) const {
        if (tau < -tol) return false;
        return contains(-tau, tol);
    }

    [[nodiscard]] std::string describe() const {
        switch (kind_) {
            case Kind::Compact: return "[-" + std::to_string(depth_) + ", 0]";
            case Kind::WholePast: return "(-inf, 0]";
            case Kind::Point: return "{0}";
        }
        return "?";
    }

    friend bool operator==(const PastInterval& a, const PastInterval& b) {
        return a.kind_ == b.kind_ && (a.kind_ != Kind::Compact || a.depth_ == b.depth_);
    }

private:
    PastInterval(Kind k, double d) : kind_(k), depth_(d) {}
    Kind kind_;
    double depth_;
};

} // namespace dde
