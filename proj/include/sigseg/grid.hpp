// Equidistant sampling grids on [0,1], cell-average discretization, the
// step-function embedding, and prefix-sum tables for interval costs.
//
// Grid cells are [k/n, (k+1)/n) for k < n-1 and [(n-1)/n, 1] for the last
// cell, so the cells partition [0,1] exactly and the embedding is continuous
// at s = 1.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sigseg/common.hpp"

namespace sigseg {

struct Grid {
    int n = 1;  // number of cells, n >= 1

    explicit Grid(int n_) : n(n_) {
        if (n < 1) throw std::invalid_argument("Grid: n must be >= 1");
    }
    Grid() = default;

    // Cell index of x in [0,1]; the last cell is closed on the right.
    int cell_of(double x) const {
        if (x < 0.0 || x > 1.0) throw std::invalid_argument("Grid: point outside [0,1]");
        const int k = static_cast<int>(std::floor(x * n));
        return k >= n ? n - 1 : k;
    }

    friend bool operator==(const Grid& a, const Grid& b) { return a.n == b.n; }
};

// Cell averages of a signal on Grid(n); sample k is the mean over cell k.
struct DiscreteSignal {
    Grid grid;
    std::vector<double> values;

    DiscreteSignal(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid.n)
            throw std::invalid_argument("DiscreteSignal: length must equal grid.n");
        for (double x : values)
            if (!std::isfinite(x)) throw std::invalid_argument("DiscreteSignal: non-finite sample");
    }

    int n() const { return grid.n; }

    // Step-function evaluation (the embedding tau_n): value of cell containing x.
    double at(double x) const { return values[grid.cell_of(x)]; }

    // (1/n)-weighted squared L2 norm; equals the L2 norm of the embedded step.
    double norm_sq() const {
        CompensatedSum s;
        for (double v : values) s.add(v * v);
        return s.value() / grid.n;
    }
};

// One polynomial piece c0 + c1 x + c2 x^2 + c3 x^3 on [lo, hi) in absolute
// coordinates (the last piece owns its right endpoint).
struct PolyPiece {
    double lo = 0.0;
    double hi = 1.0;
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

    double eval(double x) const { return ((c[3] * x + c[2]) * x + c[1]) * x + c[0]; }

    // Exact integral of the piece polynomial over [a, b] (not clipped).
    double integral(double a, double b) const {
        auto anti = [&](double x) {
            return x * (c[0] + x * (c[1] / 2 + x * (c[2] / 3 + x * c[3] / 4)));
        };
        return anti(b) - anti(a);
    }

    // Exact integral of the squared polynomial over [a, b].
    double integral_sq(double a, double b) const {
        std::array<double, 7> q{};  // coefficients of p^2, degree <= 6
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) q[i + j] += c[i] * c[j];
        auto anti = [&](double x) {
            double acc = 0.0;
            double xp = x;
            for (int d = 0; d < 7; ++d) {
                acc += q[d] * xp / (d + 1);
                xp *= x;
            }
            return acc;
        };
        return anti(b) - anti(a);
    }

    // Derivative polynomial coefficients (degree <= 2).
    std::array<double, 4> derivative() const { return {c[1], 2 * c[2], 3 * c[3], 0.0}; }
};

// Piecewise-cubic signal on [0,1]; pieces partition [0,1] with no gap or
// overlap, enabling exact cell averages and exact L2 inner products.
class ContinuousSignal {
  public:
    explicit ContinuousSignal(std::vector<PolyPiece> pieces) : pieces_(std::move(pieces)) {
        if (pieces_.empty()) throw std::invalid_argument("ContinuousSignal: no pieces");
        const double tol = 1e-12;
        if (std::abs(pieces_.front().lo) > tol || std::abs(pieces_.back().hi - 1.0) > tol)
            throw std::invalid_argument("ContinuousSignal: pieces must cover [0,1]");
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            if (!(pieces_[i].lo < pieces_[i].hi))
                throw std::invalid_argument("ContinuousSignal: empty or inverted piece");
            if (i > 0 && std::abs(pieces_[i].lo - pieces_[i - 1].hi) > tol)
                throw std::invalid_argument("ContinuousSignal: gap or overlap between pieces");
        }
        pieces_.front().lo = 0.0;
        pieces_.back().hi = 1.0;
        for (std::size_t i = 1; i < pieces_.size(); ++i) pieces_[i].lo = pieces_[i - 1].hi;
    }

    const std::vector<PolyPiece>& pieces() const { return pieces_; }

    double value(double x) const {
        for (const auto& p : pieces_)
            if (x < p.hi || &p == &pieces_.back()) return p.eval(x);
        return pieces_.back().eval(x);
    }

    // Exact integral of g over [a, b] within [0,1].
    double integral(double a, double b) const {
        CompensatedSum s;
        for (const auto& p : pieces_) {
            const double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
            if (lo < hi) s.add(p.integral(lo, hi));
        }
        return s.value();
    }

    // Exact integral of g^2 over [a, b].
    double integral_sq(double a, double b) const {
        CompensatedSum s;
        for (const auto& p : pieces_) {
            const double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
            if (lo < hi) s.add(p.integral_sq(lo, hi));
        }
        return s.value();
    }

    double norm_sq() const { return integral_sq(0.0, 1.0); }

  private:
    std::vector<PolyPiece> pieces_;
};

// Convenience constructors for the test signals used throughout.
inline ContinuousSignal make_constant_signal(double c) {
    return ContinuousSignal({PolyPiece{0.0, 1.0, {c, 0.0, 0.0, 0.0}}});
}
inline ContinuousSignal make_ramp_signal() {
    return ContinuousSignal({PolyPiece{0.0, 1.0, {0.0, 1.0, 0.0, 0.0}}});
}
// Indicator of [a, 1].
inline ContinuousSignal make_step_signal(double a) {
    if (a <= 0.0 || a >= 1.0) throw std::invalid_argument("make_step_signal: a must be in (0,1)");
    return ContinuousSignal({PolyPiece{0.0, a, {0.0, 0.0, 0.0, 0.0}},
                             PolyPiece{a, 1.0, {1.0, 0.0, 0.0, 0.0}}});
}

// Conditional expectation pi_n: sample k = n * integral of g over cell k.
inline DiscreteSignal discretize(const ContinuousSignal& g, int n) {
    if (n < 1) throw std::invalid_argument("discretize: n must be >= 1");
    Grid grid(n);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        v[static_cast<std::size_t>(k)] = n * g.integral(static_cast<double>(k) / n,
                                                        static_cast<double>(k + 1) / n);
    return DiscreteSignal(grid, std::move(v));
}

// The embedding tau_n is DiscreteSignal::at; exposed as a named free function
// to mirror the operation map.
inline double embed_value(const DiscreteSignal& d, double x) { return d.at(x); }

// Block means onto a coarser grid; m must divide n. Equals
// discretize(embed(d), m) by the tower property of averaging.
inline DiscreteSignal coarsen(const DiscreteSignal& d, int m) {
    const int n = d.n();
    if (m < 1 || n % m != 0) throw std::invalid_argument("coarsen: m must divide n");
    const int r = n / m;
    std::vector<double> v(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        CompensatedSum s;
        for (int i = k * r; i < (k + 1) * r; ++i) s.add(d.values[static_cast<std::size_t>(i)]);
        v[static_cast<std::size_t>(k)] = s.value() / r;
    }
    return DiscreteSignal(Grid(m), std::move(v));
}

// Cumulative sums of samples and squared samples; entry 0 is 0, entry k is
// the sum over the first k samples. Built with compensated accumulation.
struct PrefixTable {
    std::vector<double> sum;     // size n+1
    std::vector<double> sum_sq;  // size n+1

    double range_sum(int j, int k) const { return sum[static_cast<std::size_t>(k)] - sum[static_cast<std::size_t>(j)]; }
    double range_sum_sq(int j, int k) const { return sum_sq[static_cast<std::size_t>(k)] - sum_sq[static_cast<std::size_t>(j)]; }
};

inline PrefixTable build_prefix(const DiscreteSignal& d) {
    const std::size_t n = d.values.size();
    PrefixTable t;
    t.sum.resize(n + 1);
    t.sum_sq.resize(n + 1);
    t.sum[0] = 0.0;
    t.sum_sq[0] = 0.0;
    CompensatedSum s1, s2;
    for (std::size_t i = 0; i < n; ++i) {
        s1.add(d.values[i]);
        s2.add(d.values[i] * d.values[i]);
        t.sum[i + 1] = s1.value();
        t.sum_sq[i + 1] = s2.value();
    }
    return t;
}

// Exact L2 distance between the embedded step function and the signal it
// samples: ||tau_n d - g||^2 = ||d||^2 - 2 <step, g> + ||g||^2.
inline double l2_distance_to_signal(const DiscreteSignal& d, const ContinuousSignal& g) {
    const int n = d.n();
    CompensatedSum cross;
    for (int k = 0; k < n; ++k)
        cross.add(d.values[static_cast<std::size_t>(k)] *
                  g.integral(static_cast<double>(k) / n, static_cast<double>(k + 1) / n));
    const double dist_sq = d.norm_sq() - 2.0 * cross.value() + g.norm_sq();
    return std::sqrt(std::max(0.0, dist_sq));
}

}  // namespace sigseg
