#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "dde/functional.hpp"
#include "dde/norms.hpp"
#include "dde/rng.hpp"
#include "dde/transforms.hpp"

namespace dde {

/// Which Lipschitz condition is being estimated. Estimates are sampled
/// maxima of difference quotients, i.e. lower bounds on the true local
/// constants.
enum class LipschitzMode { AboutProlongations, AboutC1Prolongations, AboutMemories, AlmostLocal };

struct LipschitzOptions {
    LipschitzMode mode = LipschitzMode::AboutC1Prolongations;
    double horizon = 0.25;       // T of the rectangle
    double radius = 1.0;         // delta of the rectangle
    double memory_window = 0.5;  // R for AboutMemories
    double lip_budget = 1.0;     // M for AlmostLocal; on the whole past the schedule is M_k = M*k
    /// Optional explicit AlmostLocal schedule: entry k-1 is the budget for
    /// the window [-k, 0]. Overrides the M*k default when nonempty.
    std::vector<double> lip_schedule;
    int samples = 32;
    std::uint64_t seed = 1;
    int threads = 1;
    /// Pairs closer than this in sup-norm are skipped, not counted.
    double denominator_floor = 1e-12;
};

struct LipschitzEstimate {
    LipschitzMode mode = LipschitzMode::AboutC1Prolongations;
    double value = 0.0;
    int samples = 0;  // pairs that survived filtering
    struct MaxPair {
        double t = 0.0;
        double numerator = 0.0;
        double denominator = 0.0;
        std::uint64_t sample_index = 0;
    } max_pair;
};

namespace detail {

/// Difference quotient of F on one same-time pair; nullopt when the pair is
/// filtered (outside dom F or below the denominator floor).
inline std::optional<std::pair<double, double>> pair_quotient(
    const HistoryFunctional& F, double t, const HistoryView& phi1, const HistoryView& phi2,
    double window, double floor) {
    if (!F.in_domain(t, phi1) || !F.in_domain(t, phi2)) return std::nullopt;
    const double den = sup_norm_diff(phi1, phi2, window);
    if (den <= floor) return std::nullopt;
    const double num = inf_dist(F.eval(t, phi1), F.eval(t, phi2));
    return std::make_pair(num, den);
}

/// A C1 perturbation supported in [-R, 0]: zero value and slope at -R, free
/// at 0. Shapes are a smoothstep ramp plus one interior bump.
struct MemoryBump {
    double R;
    Vec ramp_amp;
    Vec bump_amp;

    [[nodiscard]] Vec operator()(double theta) const {
        const std::size_t n = ramp_amp.size();
        Vec out(n, 0.0);
        if (theta < -R || theta > 0.0) return out;
        const double s = 1.0 + theta / R;
        const double ramp = s * s * (3.0 - 2.0 * s);
        const double u = 2.0 * s - 1.0;
        const double w = 1.0 - u * u;
        const double bump = (w > 0.0) ? w * w : 0.0;
        for (std::size_t j = 0; j < n; ++j) out[j] = ramp_amp[j] * ramp + bump_amp[j] * bump;
        return out;
    }

    [[nodiscard]] double max_slope() const {
        // sup |d/dtheta| on a fine grid; cheap and good enough for budgets.
        double m = 0.0;
        const int k = 256;
        Vec prev = (*this)(-R);
        for (int i = 1; i <= k; ++i) {
            const double th = -R + R * static_cast<double>(i) / k;
            Vec cur = (*this)(th);
            m = std::max(m, inf_dist(cur, prev) * k / R);
            prev = std::move(cur);
        }
        return m;
    }

    [[nodiscard]] double max_value() const {
        double m = 0.0;
        const int k = 256;
        for (int i = 0; i <= k; ++i) m = std::max(m, inf_norm((*this)(-R + R * static_cast<double>(i) / k)));
        return m;
    }
};

inline MemoryBump random_memory_bump(std::size_t n, double R, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    MemoryBump b{R, Vec(n), Vec(n)};
    for (std::size_t j = 0; j < n; ++j) {
        b.ramp_amp[j] = unit(rng);
        b.bump_amp[j] = unit(rng);
    }
    return b;
}

inline MemoryBump scaled_bump(MemoryBump b, double s) {
    for (double& x : b.ramp_amp) x *= s;
    for (double& x : b.bump_amp) x *= s;
    return b;
}

template <class Fn>
inline void parallel_samples(int samples, int threads, Fn&& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, samples));
    if (threads == 1) {
        for (int i = 0; i < samples; ++i) body(i);
        return;
    }
    std::vector<std::future<void>> futs;
    futs.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        futs.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < samples; i += threads) body(i);
        }));
    }
    for (auto& f : futs) f.get();
}

} // namespace detail

/// Samples pairs of same-time candidates under the mode's constraint set and
/// returns the max difference quotient of F. Deterministic in (seed, opts);
/// sample loops may fan out across threads, the max-reduction is
/// order-independent.
inline LipschitzEstimate estimate_lipschitz(const HistoryFunctional& F, double sigma0,
                                            const HistoryView& psi0, const LipschitzOptions& opts) {
    LipschitzEstimate est;
    est.mode = opts.mode;

    RectangleSpec rect{sigma0, psi0, opts.horizon, opts.radius,
                       RectangleOrder::C0, Vec(psi0.dim(), 0.0)};
    if (opts.mode == LipschitzMode::AboutC1Prolongations) {
        rect.order = RectangleOrder::C1;
        rect.slope = F.eval(sigma0, psi0);
    }

    std::mutex mu;
    int valid = 0;
    detail::parallel_samples(opts.samples, opts.threads, [&](int i) {
        auto rng = make_rng(opts.seed, static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double t = sigma0;
        std::optional<std::pair<double, double>> q;
        double window = 0.0;

        switch (opts.mode) {
            case LipschitzMode::AboutProlongations:
            case LipschitzMode::AboutC1Prolongations: {
                const double tau = opts.horizon * (0.1 + 0.9 * unit(rng));
                t = sigma0 + tau;
                const Segment g1 = random_prolongation(rect, tau, mix_seed(opts.seed, 2 * i));
                const Segment g2 = random_prolongation(rect, tau, mix_seed(opts.seed, 2 * i + 1));
                window = tau;
                q = detail::pair_quotient(F, t, prolonged_history(psi0, g1, t),
                                          prolonged_history(psi0, g2, t), window,
                                          opts.denominator_floor);
                break;
            }
            case LipschitzMode::AboutMemories: {
                const double R = opts.memory_window;
                const double tau = opts.horizon * (0.1 + 0.9 * unit(rng));
                t = sigma0 + tau;
                const Segment g = random_prolongation(rect, tau, mix_seed(opts.seed, 2 * i));
                const HistoryView phi1 = prolonged_history(psi0, g, t);
                auto bump = detail::random_memory_bump(psi0.dim(), R, rng);
                const double bv = bump.max_value();
                if (bv > 1e-15)
                    bump = detail::scaled_bump(bump, opts.radius * (0.05 + 0.9 * unit(rng)) / bv);
                const HistoryView phi2 = phi1.plus([bump](double th) { return bump(th); });
                window = R;
                q = detail::pair_quotient(F, t, phi1, phi2, window, opts.denominator_floor);
                break;
            }
            case LipschitzMode::AlmostLocal: {
                int k = 1;
                double budget = opts.lip_budget;
                if (psi0.interval().is_whole_past()) {
                    const int kmax = opts.lip_schedule.empty()
                                         ? 3
                                         : static_cast<int>(opts.lip_schedule.size());
                    k = 1 + static_cast<int>(unit(rng) * kmax) % kmax;
                    budget = opts.lip_schedule.empty()
                                 ? opts.lip_budget * k  // the default M_k = M*k schedule
                                 : opts.lip_schedule[static_cast<std::size_t>(k - 1)];
                }
                const double W = psi0.interval().is_compact()
                                     ? psi0.interval().depth()
                                     : static_cast<double>(k);
                auto b1 = detail::random_memory_bump(psi0.dim(), W, rng);
                auto b2 = detail::random_memory_bump(psi0.dim(), W, rng);
                for (auto* b : {&b1, &b2}) {
                    const double sv = b->max_value();
                    const double sl = b->max_slope();
                    double scale = 1.0;
                    if (sv > 1e-15) scale = std::min(scale, opts.radius / sv);
                    if (sl > 1e-15) scale = std::min(scale, 0.9 * budget / sl);
                    *b = detail::scaled_bump(*b, scale * (0.05 + 0.9 * unit(rng)));
                }
                const HistoryView phi1 = psi0.plus([b1](double th) { return b1(th); });
                const HistoryView phi2 = psi0.plus([b2](double th) { return b2(th); });
                if (lip_const(phi1, W) > budget + 1e-9 || lip_const(phi2, W) > budget + 1e-9)
                    break;  // base history already ate the budget
                window = W;
                q = detail::pair_quotient(F, t, phi1, phi2, window, opts.denominator_floor);
                break;
            }
        }

        if (q) {
            std::lock_guard<std::mutex> lk(mu);
            ++valid;
            const double ratio = q->first / q->second;
            if (ratio >= est.value) {
                est.value = ratio;
                est.max_pair = {t, q->first, q->second, static_cast<std::uint64_t>(i)};
            }
        }
    });

    if (valid == 0) throw NoValidPairs("estimate_lipschitz: every sampled pair was filtered out");
    est.samples = valid;
    return est;
}

/// Max deviation of a delay functional across sampled pairs whose difference
/// is supported in [-R, 0]; zero certifies the sampled constancy about
/// memories.
inline double check_constancy_about_memories(const DelayFunctional& tau, double sigma0,
                                             const HistoryView& psi0, double R, int samples,
                                             std::uint64_t seed) {
    if (!(R > 0.0) || !psi0.interval().contains(-R))
        throw Error("check_constancy_about_memories: [-R, 0] must lie inside the past interval");
    RectangleSpec rect{sigma0, psi0, 0.25, 1.0, RectangleOrder::C0, Vec(psi0.dim(), 0.0)};
    double worst = 0.0;
    int valid = 0;
    for (int i = 0; i < samples; ++i) {
        auto rng = make_rng(seed, static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double span = rect.horizon * (0.1 + 0.9 * unit(rng));
        const double t = sigma0 + span;
        const Segment g = random_prolongation(rect, span, mix_seed(seed, 2 * i));
        const HistoryView phi1 = prolonged_history(psi0, g, t);
        auto bump = detail::random_memory_bump(psi0.dim(), R, rng);
        const double bv = bump.max_value();
        if (bv > 1e-15) bump = detail::scaled_bump(bump, (0.05 + 0.9 * unit(rng)) / bv);
        const HistoryView phi2 = phi1.plus([bump](double th) { return bump(th); });
        if (tau.in_domain && (!tau.in_domain(t, phi1) || !tau.in_domain(t, phi2))) continue;
        try {
            worst = std::max(worst, std::abs(tau.eval(t, phi1) - tau.eval(t, phi2)));
            ++valid;
        } catch (const Error&) {
            continue;
        }
    }
    if (valid == 0) throw NoValidPairs("check_constancy_about_memories: no valid pairs");
    return worst;
}

} // namespace dde
