// Partitions of [0,1]: data model, Hausdorff metric, interval decomposition,
// jump counting, threshold-based discontinuity extraction, and the interval
// matching used by the convergence diagnostics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sigseg/grid.hpp"

namespace sigseg {

// Strictly increasing breakpoints in [0,1] with 0 and 1 always present.
struct Partition {
    std::vector<double> points;

    explicit Partition(std::vector<double> pts) : points(std::move(pts)) {
        if (points.size() < 2 || points.front() != 0.0 || points.back() != 1.0)
            throw std::invalid_argument("Partition: must start at 0 and end at 1");
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i - 1] < points[i]))
                throw std::invalid_argument("Partition: points must strictly increase");
    }

    std::size_t size() const { return points.size(); }

    // Smallest gap between consecutive points; positive by construction.
    double min_gap() const {
        double g = 1.0;
        for (std::size_t i = 1; i < points.size(); ++i)
            g = std::min(g, points[i] - points[i - 1]);
        return g;
    }
};

// Partition with breakpoints on S(n): indices into {0,...,n}, 0 and n present.
struct GridPartition {
    Grid grid;
    std::vector<int> indices;

    GridPartition(Grid g, std::vector<int> idx) : grid(g), indices(std::move(idx)) {
        if (indices.size() < 2 || indices.front() != 0 || indices.back() != grid.n)
            throw std::invalid_argument("GridPartition: indices must run from 0 to n");
        for (std::size_t i = 1; i < indices.size(); ++i)
            if (!(indices[i - 1] < indices[i]))
                throw std::invalid_argument("GridPartition: indices must strictly increase");
    }

    Partition to_partition() const {
        std::vector<double> pts;
        pts.reserve(indices.size());
        for (int i : indices) pts.push_back(static_cast<double>(i) / grid.n);
        return Partition(std::move(pts));
    }

    std::size_t size() const { return indices.size(); }
    int blocks() const { return static_cast<int>(indices.size()) - 1; }
};

// Open intervals between consecutive partition points; count = |p| - 1.
struct IntervalDecomposition {
    std::vector<std::pair<double, double>> intervals;
};

inline IntervalDecomposition intervals(const Partition& p) {
    IntervalDecomposition d;
    d.intervals.reserve(p.points.size() - 1);
    for (std::size_t i = 1; i < p.points.size(); ++i)
        d.intervals.emplace_back(p.points[i - 1], p.points[i]);
    return d;
}

// j(p) = |p| - 2, the number of interior breakpoints.
inline int jump_count(const Partition& p) { return static_cast<int>(p.points.size()) - 2; }
inline int jump_count(const GridPartition& p) { return static_cast<int>(p.indices.size()) - 2; }

// Directed max-min distance from each point of a to the set b (both sorted).
inline double directed_hausdorff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (double x : a) {
        auto it = std::lower_bound(b.begin(), b.end(), x);
        double best = std::numeric_limits<double>::infinity();
        if (it != b.end()) best = std::min(best, *it - x);
        if (it != b.begin()) best = std::min(best, x - *(it - 1));
        worst = std::max(worst, best);
    }
    return worst;
}

inline double hausdorff_distance(const Partition& p, const Partition& q) {
    return std::max(directed_hausdorff(p.points, q.points),
                    directed_hausdorff(q.points, p.points));
}

// Discrete discontinuities of f at threshold T: grid index k+1 enters the
// partition whenever |f[k+1] - f[k]| > T. The boundary sits at (k+1)/n, the
// left endpoint of the new block, matching the block-matrix layout of the
// partition solver.
inline GridPartition threshold_partition(const DiscreteSignal& f, double T) {
    if (T < 0.0) throw std::invalid_argument("threshold_partition: T must be >= 0");
    const int n = f.n();
    std::vector<int> idx{0};
    for (int k = 0; k + 1 < n; ++k)
        if (std::abs(f.values[static_cast<std::size_t>(k + 1)] - f.values[static_cast<std::size_t>(k)]) > T)
            idx.push_back(k + 1);
    idx.push_back(n);
    return GridPartition(f.grid, std::move(idx));
}

// The threshold the reduction principle pairs with the Blake-Zisserman
// parameters: a bond is a jump when (n/mu^2) d^2 > gamma, i.e. |d| > T.
inline double bz_jump_threshold(double gamma, double mu, int n) {
    return mu * std::sqrt(gamma / n);
}

// Interval matching of Lemma-style convergence diagnostics: each limit
// interval (a,b) is matched with (max{x <= a+d0}, min{x >= b-d0}) from the
// approximating partition, valid once d_H < d0 = min_gap(limit)/3.
struct IntervalMatch {
    bool in_regime = false;  // false: approximation not yet Hausdorff-close
    double delta0 = 0.0;
    // One entry per limit interval; present only when in_regime.
    std::vector<std::pair<double, double>> matched;
};

inline IntervalMatch match_intervals(const Partition& p_approx, const Partition& p_limit) {
    IntervalMatch m;
    m.delta0 = p_limit.min_gap() / 3.0;
    if (!(hausdorff_distance(p_approx, p_limit) < m.delta0)) return m;
    m.in_regime = true;
    const auto& xs = p_approx.points;
    for (std::size_t i = 1; i < p_limit.points.size(); ++i) {
        const double a = p_limit.points[i - 1];
        const double b = p_limit.points[i];
        // max{x in p_approx : x <= a + delta0}
        auto hi = std::upper_bound(xs.begin(), xs.end(), a + m.delta0);
        const double left = *(hi - 1);  // nonempty: 0 <= a + delta0
        // min{x in p_approx : x >= b - delta0}
        auto lo = std::lower_bound(xs.begin(), xs.end(), b - m.delta0);
        const double right = *lo;  // nonempty: 1 >= b - delta0
        m.matched.emplace_back(left, right);
    }
    return m;
}

}  // namespace sigseg
