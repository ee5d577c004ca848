// Global minimization over partitions via the reduction principle: the
// objective splits as gamma * j(p) + sum of per-block costs, so a shortest-
// path dynamic program over breakpoint indices is exact. A brute-force
// enumerator serves as the oracle, and a grid-restricted variant minimizes
// the continuous reduced functional.
#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sigseg/common.hpp"
#include "sigseg/functionals.hpp"
#include "sigseg/grid.hpp"
#include "sigseg/partitions.hpp"
#include "sigseg/solvers.hpp"

namespace sigseg {

struct Limits {
    int dp_cap_potts = 20000;  // mu = 0: O(n^2) interval costs at O(1) each
    int dp_cap_smooth = 4000;  // mu > 0: O(n^3) total
    int brute_cap = 16;        // 2^(n-1) partitions
    int ms_grid_cap = 512;     // candidate breakpoints for the continuous DP
};

// Lazy block-cost table c(j,k) = ||g||^2_block - <g, f*_block> with
// (1/n)-weighted sums over samples j..k-1. mu = 0 costs come from prefix
// sums in O(1); mu > 0 costs solve the block on demand in O(k-j). Nothing
// is materialized: the DP touches each pair exactly once.
class IntervalCostTable {
  public:
    IntervalCostTable(const DiscreteSignal& g, double mu, int cap = 0)
        : g_(g), mu_(mu), prefix_(build_prefix(g)) {
        const Limits def;
        const int limit = cap > 0 ? cap : (mu > 0.0 ? def.dp_cap_smooth : def.dp_cap_potts);
        if (g.n() > limit)
            throw resource_cap_error("cost table: n = " + std::to_string(g.n()) +
                                     " exceeds the cap " + std::to_string(limit) +
                                     (cap > 0 ? "" : "; raise it with --cap if intended"));
        if (mu < 0.0) throw std::invalid_argument("cost table: mu must be >= 0");
    }

    int n() const { return g_.n(); }
    double mu() const { return mu_; }

    double cost(int j, int k) const {
        const int m = k - j;
        if (m == 1) return 0.0;  // single-sample blocks fit exactly
        if (mu_ == 0.0) {
            const double s1 = prefix_.range_sum(j, k);
            const double s2 = prefix_.range_sum_sq(j, k);
            return std::max(0.0, (s2 - s1 * s1 / m) / g_.n());
        }
        const std::vector<double> f = block_solution(j, k);
        CompensatedSum gf, gg;
        for (int i = j; i < k; ++i) {
            const double gi = g_.values[static_cast<std::size_t>(i)];
            gf.add(gi * f[static_cast<std::size_t>(i - j)]);
            gg.add(gi * gi);
        }
        return std::max(0.0, (gg.value() - gf.value()) / g_.n());
    }

    std::vector<double> block_solution(int j, int k) const {
        std::vector<double> gb(g_.values.begin() + j, g_.values.begin() + k);
        if (mu_ == 0.0) return solve_block_mean(gb);
        return solve_block_discrete({k - j, std::move(gb), g_.n(), mu_});
    }

  private:
    DiscreteSignal g_;
    double mu_;
    PrefixTable prefix_;
};

struct SegmentationResult {
    PiecewiseSolution solution;
    ObjectiveBreakdown objective;
    ParameterPoint parameters;
    // Diagnostics.
    double dp_value = 0.0;          // optimum as accumulated by the recursion
    long long candidates = 0;       // DP candidate edges examined
    double runtime_ms = 0.0;
    int effective_jump_count = 0;   // strict value changes of the solution
    int nref = 0;                   // grid-restricted continuous runs only

    Partition partition() const { return solution.owning_partition(); }
};

namespace detail {

struct DpOutcome {
    std::vector<int> indices;
    double value = 0.0;
    long long candidates = 0;
};

// m(k) = min over j < k of m(j) + gamma*[j>0] + cost(j,k). Ties break
// toward fewer jumps, then toward the smaller last breakpoint; recursing the
// same rule makes the chosen partition the (cost, jumps, reversed-sequence)
// lexicographic minimum, which the brute-force oracle reproduces.
template <typename CostFn>
DpOutcome dp_minimize(int n, double gamma, CostFn&& cost) {
    std::vector<double> m(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> jumps(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> from(static_cast<std::size_t>(n) + 1, 0);
    jumps[0] = -1;  // so every block append adds exactly one
    DpOutcome out;
    for (int k = 1; k <= n; ++k) {
        double best = 0.0;
        int best_jumps = 0;
        int best_from = -1;
        for (int j = 0; j < k; ++j) {
            const double base = m[static_cast<std::size_t>(j)] + (j > 0 ? gamma : 0.0);
            // cost >= 0, so a base already above the incumbent cannot win.
            if (best_from >= 0 && base > best) continue;
            const double v = base + cost(j, k);
            ++out.candidates;
            const int cj = jumps[static_cast<std::size_t>(j)] + 1;
            if (best_from < 0 || v < best || (v == best && cj < best_jumps)) {
                best = v;
                best_jumps = cj;
                best_from = j;
            }
        }
        m[static_cast<std::size_t>(k)] = best;
        jumps[static_cast<std::size_t>(k)] = best_jumps;
        from[static_cast<std::size_t>(k)] = best_from;
    }
    out.value = m[static_cast<std::size_t>(n)];
    std::vector<int> rev{n};
    for (int k = n; k > 0; k = from[static_cast<std::size_t>(k)]) rev.push_back(from[static_cast<std::size_t>(k)]);
    out.indices.assign(rev.rbegin(), rev.rend());
    return out;
}

inline int count_effective_jumps(const std::vector<double>& samples) {
    int c = 0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
        if (samples[i + 1] != samples[i]) ++c;
    return c;
}

}  // namespace detail

// Exact global minimizer of the discrete functional (Blake-Zisserman for
// mu > 0, Potts for mu = 0) over all grid partitions.
inline SegmentationResult minimize_dp(const DiscreteSignal& g, double gamma, double mu,
                                      int cap = 0) {
    if (gamma < 0.0) throw std::invalid_argument("minimize_dp: gamma must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();
    const IntervalCostTable table(g, mu, cap);
    const int n = g.n();
    auto dp = detail::dp_minimize(n, gamma, [&](int j, int k) { return table.cost(j, k); });
    SegmentationResult r{partition_solver_discrete(g, GridPartition(g.grid, dp.indices), mu),
                         {},
                         {gamma, mu, 1.0 / n}};
    const DiscreteSignal f(g.grid, r.solution.samples);
    r.objective = family_eval(r.parameters, f, g);
    r.dp_value = dp.value;
    r.candidates = dp.candidates;
    r.effective_jump_count = detail::count_effective_jumps(r.solution.samples);
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Exhaustive oracle over all 2^(n-1) grid partitions; accumulates each
// partition's objective with the same left-to-right fold as the DP so ties
// compare identically, and applies the same tie-break order.
inline SegmentationResult brute_force_min(const DiscreteSignal& g, double gamma, double mu,
                                          int cap = 0) {
    const Limits def;
    const int limit = cap > 0 ? cap : def.brute_cap;
    const int n = g.n();
    if (n > limit)
        throw resource_cap_error("brute force: n = " + std::to_string(n) + " exceeds the cap " +
                                 std::to_string(limit));
    const auto t0 = std::chrono::steady_clock::now();
    const IntervalCostTable table(g, mu);
    std::vector<int> best_idx;
    double best = 0.0;
    int best_jumps = 0;
    bool have = false;
    const std::uint32_t masks = n >= 1 ? (1u << (n - 1)) : 1u;
    std::vector<int> idx;
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
        idx.clear();
        idx.push_back(0);
        for (int b = 0; b + 1 < n; ++b)
            if (mask & (1u << b)) idx.push_back(b + 1);
        idx.push_back(n);
        double acc = 0.0;
        for (std::size_t bi = 1; bi < idx.size(); ++bi) {
            if (bi > 1) acc += gamma;
            acc += table.cost(idx[bi - 1], idx[bi]);
        }
        const int cj = static_cast<int>(idx.size()) - 2;
        bool better = false;
        if (!have || acc < best || (acc == best && cj < best_jumps)) {
            better = true;
        } else if (acc == best && cj == best_jumps) {
            // Reversed-sequence lexicographic: smaller later breakpoints win.
            for (std::size_t i = idx.size(); i-- > 0;) {
                if (idx[i] != best_idx[i]) {
                    better = idx[i] < best_idx[i];
                    break;
                }
            }
        }
        if (better) {
            best_idx = idx;
            best = acc;
            best_jumps = cj;
            have = true;
        }
    }
    SegmentationResult r{partition_solver_discrete(g, GridPartition(g.grid, best_idx), mu),
                         {},
                         {gamma, mu, 1.0 / n}};
    const DiscreteSignal f(g.grid, r.solution.samples);
    r.objective = family_eval(r.parameters, f, g);
    r.dp_value = best;
    r.candidates = static_cast<long long>(masks);
    r.effective_jump_count = detail::count_effective_jumps(r.solution.samples);
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Minimizer of the reduced continuous functional over partitions with
// breakpoints on S(N_ref). mu = 0 block costs are exact variance integrals
// in O(1) from cumulative integrals; mu > 0 solves each block spectrally.
// Tail-test failures downgrade to a propagated warning here: the DP probes
// every interval, including ones a sensible caller would never select.
inline SegmentationResult minimize_ms_grid(const ContinuousSignal& g, double gamma, double mu,
                                           int n_ref, int S, int cap = 0) {
    const Limits def;
    const int limit = cap > 0 ? cap : def.ms_grid_cap;
    if (n_ref < 1 || n_ref > limit)
        throw resource_cap_error("minimize_ms_grid: N_ref = " + std::to_string(n_ref) +
                                 " outside [1, " + std::to_string(limit) + "]");
    if (gamma < 0.0) throw std::invalid_argument("minimize_ms_grid: gamma must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();

    bool warned = false;
    detail::DpOutcome dp;
    if (mu == 0.0) {
        std::vector<double> G(static_cast<std::size_t>(n_ref) + 1, 0.0);
        std::vector<double> G2(static_cast<std::size_t>(n_ref) + 1, 0.0);
        for (int i = 1; i <= n_ref; ++i) {
            const double a = static_cast<double>(i - 1) / n_ref;
            const double b = static_cast<double>(i) / n_ref;
            G[static_cast<std::size_t>(i)] = G[static_cast<std::size_t>(i - 1)] + g.integral(a, b);
            G2[static_cast<std::size_t>(i)] = G2[static_cast<std::size_t>(i - 1)] + g.integral_sq(a, b);
        }
        dp = detail::dp_minimize(n_ref, gamma, [&](int j, int k) {
            const double L = static_cast<double>(k - j) / n_ref;
            const double s1 = G[static_cast<std::size_t>(k)] - G[static_cast<std::size_t>(j)];
            const double s2 = G2[static_cast<std::size_t>(k)] - G2[static_cast<std::size_t>(j)];
            return std::max(0.0, s2 - s1 * s1 / L);
        });
    } else {
        const double g_norm_sq = g.norm_sq();
        dp = detail::dp_minimize(n_ref, gamma, [&](int j, int k) {
            const double a = static_cast<double>(j) / n_ref;
            const double b = static_cast<double>(k) / n_ref;
            const auto ghat = cosine_coefficients(g, a, b, S);
            const double gg = g.integral_sq(a, b);
            // Tail test, warn-only in the DP (see note above).
            double tail = ghat[static_cast<std::size_t>(S)] * ghat[static_cast<std::size_t>(S)];
            if (S >= 2)
                tail = std::max(tail, ghat[static_cast<std::size_t>(S - 1)] *
                                          ghat[static_cast<std::size_t>(S - 1)]);
            if (tail > 1e-14 * g_norm_sq) warned = true;
            const double mu2 = mu * mu;
            const double L = b - a;
            CompensatedSum gf;
            gf.add(ghat[0] * ghat[0]);
            for (int s = 1; s <= S; ++s) {
                const double w = s * std::numbers::pi / L;
                gf.add(ghat[static_cast<std::size_t>(s)] * ghat[static_cast<std::size_t>(s)] * mu2 /
                       (mu2 + w * w));
            }
            return std::max(0.0, gg - gf.value());
        });
    }

    std::vector<double> pts;
    pts.reserve(dp.indices.size());
    for (int i : dp.indices) pts.push_back(static_cast<double>(i) / n_ref);
    const Partition part(std::move(pts));
    SegmentationResult r{partition_solver_continuous(g, part, mu, S, TailPolicy::Warn),
                         {},
                         {gamma, mu, 0.0}};
    r.solution.truncation_warning = r.solution.truncation_warning || warned;
    r.objective = eval_ms(r.solution, g, gamma, mu);
    r.dp_value = dp.value;
    r.candidates = dp.candidates;
    r.nref = n_ref;
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace sigseg
