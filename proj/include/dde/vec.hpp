#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace dde {

/// State vectors are plain double sequences; dimensions stay small here.
using Vec = std::vector<double>;

[[nodiscard]] inline double inf_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

[[nodiscard]] inline double inf_dist(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

[[nodiscard]] inline Vec add(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

[[nodiscard]] inline Vec sub(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

[[nodiscard]] inline Vec scaled(Vec a, double s) {
    for (double& x : a) x *= s;
    return a;
}

/// a + s*b in place, returned by value.
[[nodiscard]] inline Vec axpy(Vec a, double s, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
    return a;
}

[[nodiscard]] inline bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace dde
