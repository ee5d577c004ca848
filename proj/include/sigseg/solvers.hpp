// Fixed-partition minimizers. For a fixed breakpoint set the remaining
// quadratic decouples across blocks: each discrete block solves the
// symmetric tridiagonal Neumann system (n^2 B - mu^2 I) f = -mu^2 g, each
// continuous block applies the resolvent of the Neumann Laplacian in the
// cosine eigenbasis. mu = 0 degenerates to block means (kernel projection).
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigseg/common.hpp"
#include "sigseg/grid.hpp"
#include "sigseg/partitions.hpp"

namespace sigseg {

// Eigenvalues of the m x m Neumann difference matrix B (diagonal -1, -2,
// ..., -2, -1; off-diagonal 1): lambda_s = 2(cos(pi (s-1)/m) - 1), s = 1..m,
// descending from 0.
inline std::vector<double> block_eigenvalues(int m) {
    if (m < 1) throw std::invalid_argument("block_eigenvalues: m must be >= 1");
    std::vector<double> lam(static_cast<std::size_t>(m));
    for (int s = 1; s <= m; ++s)
        lam[static_cast<std::size_t>(s - 1)] =
            2.0 * (std::cos(std::numbers::pi * (s - 1) / m) - 1.0);
    return lam;
}

struct BlockSystem {
    int m = 1;                    // block length in samples
    std::vector<double> g_block;  // the m signal samples of the block
    int n = 1;                    // grid size the block lives on
    double mu = 1.0;              // smoothness parameter, > 0 here
};

// Unique solution of (n^2 B - mu^2 I) f = -mu^2 g, solved in the
// sign-flipped SPD form (mu^2 I - n^2 B) f = mu^2 g. The matrix is strictly
// diagonally dominant, so plain forward elimination is stable.
inline std::vector<double> solve_block_discrete(const BlockSystem& sys) {
    if (sys.mu <= 0.0) throw std::invalid_argument("solve_block_discrete: mu must be > 0");
    const int m = sys.m;
    if (m < 1 || static_cast<int>(sys.g_block.size()) != m)
        throw std::invalid_argument("solve_block_discrete: bad block length");
    const double mu2 = sys.mu * sys.mu;
    const double n2 = static_cast<double>(sys.n) * sys.n;
    if (m == 1) return {sys.g_block[0]};  // B = [0]: f = g exactly

    // Constant data is an exact fixed point (B applied to a constant is zero),
    // so return it directly instead of letting elimination roundoff perturb it.
    bool constant = true;
    for (int i = 1; i < m && constant; ++i)
        constant = (sys.g_block[static_cast<std::size_t>(i)] == sys.g_block[0]);
    if (constant) return std::vector<double>(static_cast<std::size_t>(m), sys.g_block[0]);

    std::vector<double> diag(static_cast<std::size_t>(m)), rhs(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const bool boundary = (i == 0 || i == m - 1);
        diag[static_cast<std::size_t>(i)] = mu2 + (boundary ? n2 : 2.0 * n2);
        rhs[static_cast<std::size_t>(i)] = mu2 * sys.g_block[static_cast<std::size_t>(i)];
    }
    const double off = -n2;
    // Thomas sweep.
    for (int i = 1; i < m; ++i) {
        const double w = off / diag[static_cast<std::size_t>(i - 1)];
        diag[static_cast<std::size_t>(i)] -= w * off;
        rhs[static_cast<std::size_t>(i)] -= w * rhs[static_cast<std::size_t>(i - 1)];
    }
    std::vector<double> f(static_cast<std::size_t>(m));
    f[static_cast<std::size_t>(m - 1)] = rhs[static_cast<std::size_t>(m - 1)] / diag[static_cast<std::size_t>(m - 1)];
    for (int i = m - 2; i >= 0; --i)
        f[static_cast<std::size_t>(i)] =
            (rhs[static_cast<std::size_t>(i)] - off * f[static_cast<std::size_t>(i + 1)]) /
            diag[static_cast<std::size_t>(i)];
    return f;
}

// mu = 0 block solution: the constant block mean.
inline std::vector<double> solve_block_mean(const std::vector<double>& g_block) {
    if (g_block.empty()) throw std::invalid_argument("solve_block_mean: empty block");
    if (std::all_of(g_block.begin(), g_block.end(),
                    [&](double v) { return v == g_block.front(); }))
        return std::vector<double>(g_block.size(), g_block.front());
    CompensatedSum s;
    for (double v : g_block) s.add(v);
    const double mean = s.value() / static_cast<double>(g_block.size());
    return std::vector<double>(g_block.size(), mean);
}

// One continuous block (a,b): cosine-mode coefficients of the signal (ghat)
// and of the solution (c) in the orthonormal Neumann basis
// phi_0 = 1/sqrt(L), phi_s = sqrt(2/L) cos(s pi (x-a)/L). mu = 0 keeps only
// mode 0. gg caches the exact integral of g^2 over the block.
struct SpectralBlock {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> ghat;
    std::vector<double> c;
    double gg = 0.0;

    double length() const { return b - a; }

    double basis_scale(int s) const {
        const double L = length();
        return s == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
    }

    double eval(double x) const {
        const double L = length();
        double acc = 0.0;
        for (std::size_t s = 0; s < c.size(); ++s)
            acc += c[s] * basis_scale(static_cast<int>(s)) *
                   std::cos(static_cast<double>(s) * std::numbers::pi * (x - a) / L);
        return acc;
    }

    // Trace values at the block endpoints: cos terms are +-1 there.
    double value_left() const {
        double acc = 0.0;
        for (std::size_t s = 0; s < c.size(); ++s) acc += c[s] * basis_scale(static_cast<int>(s));
        return acc;
    }
    double value_right() const {
        double acc = 0.0;
        for (std::size_t s = 0; s < c.size(); ++s)
            acc += (s % 2 == 0 ? 1.0 : -1.0) * c[s] * basis_scale(static_cast<int>(s));
        return acc;
    }
};

// Exact integral of a cubic piece against cos(omega (x - a)) over
// [x0, x1] (absolute coordinates), by parts in shifted coordinates so the
// trigonometric arguments stay in [0, s pi].
inline double poly_cos_integral(const PolyPiece& piece, double a, double omega, double x0, double x1) {
    // Re-expand the piece polynomial around a: p(a + u) = b0 + b1 u + b2 u^2 + b3 u^3.
    const double c0 = piece.c[0], c1 = piece.c[1], c2 = piece.c[2], c3 = piece.c[3];
    const double b0 = ((c3 * a + c2) * a + c1) * a + c0;
    const double b1 = (3.0 * c3 * a + 2.0 * c2) * a + c1;
    const double b2 = 3.0 * c3 * a + c2;
    const double b3 = c3;
    const double w2 = omega * omega, w3 = w2 * omega, w4 = w2 * w2;
    auto F = [&](double u) {
        const double p = ((b3 * u + b2) * u + b1) * u + b0;
        const double dp = (3.0 * b3 * u + 2.0 * b2) * u + b1;
        const double ddp = 6.0 * b3 * u + 2.0 * b2;
        const double dddp = 6.0 * b3;
        return std::sin(omega * u) * (p / omega - ddp / w3) +
               std::cos(omega * u) * (dp / w2 - dddp / w4);
    };
    return F(x1 - a) - F(x0 - a);
}

// Signal coefficients ghat_s = <g, phi_s> over the block (a,b), s = 0..S.
inline std::vector<double> cosine_coefficients(const ContinuousSignal& g, double a, double b, int S) {
    const double L = b - a;
    std::vector<double> ghat(static_cast<std::size_t>(S) + 1, 0.0);
    ghat[0] = g.integral(a, b) / std::sqrt(L);
    const double scale = std::sqrt(2.0 / L);
    for (int s = 1; s <= S; ++s) {
        const double omega = s * std::numbers::pi / L;
        CompensatedSum acc;
        for (const auto& piece : g.pieces()) {
            const double lo = std::max(a, piece.lo), hi = std::min(b, piece.hi);
            if (lo < hi) acc.add(poly_cos_integral(piece, a, omega, lo, hi));
        }
        ghat[static_cast<std::size_t>(s)] = scale * acc.value();
    }
    return ghat;
}

// What to do when the spectral tail test fails: throw, or flag and continue.
enum class TailPolicy { Strict, Warn };

// The solver output: the owning partition plus per-block solution data.
// Discrete solutions carry assembled samples and cached (1/n)-weighted
// inner products; continuous solutions carry cosine coefficients per block.
struct PiecewiseSolution {
    std::optional<GridPartition> grid_partition;  // set iff discrete
    std::vector<double> samples;                  // discrete: all n samples
    std::vector<double> block_gf;                 // discrete: (1/n) sumg*f per block
    std::vector<double> block_gg;                 // discrete: (1/n) sum g^2 per block
    std::optional<Partition> partition;           // set iff continuous
    std::vector<SpectralBlock> spectral;          // continuous blocks
    double mu = 0.0;
    bool truncation_warning = false;

    bool is_discrete() const { return grid_partition.has_value(); }

    Partition owning_partition() const {
        return is_discrete() ? grid_partition->to_partition() : *partition;
    }

    int block_count() const {
        return is_discrete() ? grid_partition->blocks()
                             : static_cast<int>(spectral.size());
    }

    // L2 norm of the solution (discrete: (1/n)-weighted; continuous: exact).
    double norm_sq() const {
        CompensatedSum s;
        if (is_discrete()) {
            for (double v : samples) s.add(v * v);
            return s.value() / grid_partition->grid.n;
        }
        for (const auto& blk : spectral)
            for (double cs : blk.c) s.add(cs * cs);
        return s.value();
    }
};

// Discrete partition solver: blockwise tridiagonal solves (mu > 0) or block
// means (mu = 0); the unique minimizer of the fixed-partition quadratic.
inline PiecewiseSolution partition_solver_discrete(const DiscreteSignal& g, const GridPartition& p,
                                                   double mu) {
    if (!(p.grid == g.grid))
        throw std::invalid_argument("partition_solver_discrete: partition grid mismatch");
    if (mu < 0.0) throw std::invalid_argument("partition_solver_discrete: mu must be >= 0");
    const int n = g.n();
    PiecewiseSolution sol;
    sol.grid_partition = p;
    sol.mu = mu;
    sol.samples.resize(static_cast<std::size_t>(n));
    for (std::size_t bi = 1; bi < p.indices.size(); ++bi) {
        const int lo = p.indices[bi - 1];
        const int hi = p.indices[bi];
        std::vector<double> gb(g.values.begin() + lo, g.values.begin() + hi);
        std::vector<double> fb = mu > 0.0
                                     ? solve_block_discrete({hi - lo, gb, n, mu})
                                     : solve_block_mean(gb);
        CompensatedSum gf, gg;
        for (int i = lo; i < hi; ++i) {
            sol.samples[static_cast<std::size_t>(i)] = fb[static_cast<std::size_t>(i - lo)];
            gf.add(gb[static_cast<std::size_t>(i - lo)] * fb[static_cast<std::size_t>(i - lo)]);
            gg.add(gb[static_cast<std::size_t>(i - lo)] * gb[static_cast<std::size_t>(i - lo)]);
        }
        sol.block_gf.push_back(gf.value() / n);
        sol.block_gg.push_back(gg.value() / n);
    }
    return sol;
}

// Continuous partition solver in the Neumann cosine basis: per block (a,b)
// of length L the solution coefficient of mode s is
// mu^2 / (mu^2 + (s pi / L)^2) * ghat_s (mode 0 passes unchanged); mu = 0 is
// the kernel projection (block mean only). The tail test guards truncation:
// the last retained signal coefficients must be negligible against ||g||^2.
inline PiecewiseSolution partition_solver_continuous(const ContinuousSignal& g, const Partition& p,
                                                     double mu, int S,
                                                     TailPolicy policy = TailPolicy::Strict) {
    if (S < 1) throw std::invalid_argument("partition_solver_continuous: S must be >= 1");
    if (mu < 0.0) throw std::invalid_argument("partition_solver_continuous: mu must be >= 0");
    PiecewiseSolution sol;
    sol.partition = p;
    sol.mu = mu;
    const double g_norm_sq = g.norm_sq();
    for (std::size_t i = 1; i < p.points.size(); ++i) {
        SpectralBlock blk;
        blk.a = p.points[i - 1];
        blk.b = p.points[i];
        blk.gg = g.integral_sq(blk.a, blk.b);
        const double L = blk.length();
        if (mu == 0.0) {
            blk.ghat = {g.integral(blk.a, blk.b) / std::sqrt(L)};
            blk.c = blk.ghat;
        } else {
            blk.ghat = cosine_coefficients(g, blk.a, blk.b, S);
            // Tail test on the last two modes; a single mode is parity-blind
            // (alternate coefficients vanish identically for symmetric signals).
            double tail = blk.ghat[static_cast<std::size_t>(S)] * blk.ghat[static_cast<std::size_t>(S)];
            if (S >= 2)
                tail = std::max(tail, blk.ghat[static_cast<std::size_t>(S - 1)] *
                                          blk.ghat[static_cast<std::size_t>(S - 1)]);
            if (tail > 1e-14 * g_norm_sq) {
                if (policy == TailPolicy::Strict)
                    throw truncation_error(
                        "partition_solver_continuous: cosine tail not negligible at S=" +
                        std::to_string(S) + "; raise the mode count");
                sol.truncation_warning = true;
            }
            blk.c.resize(blk.ghat.size());
            const double mu2 = mu * mu;
            blk.c[0] = blk.ghat[0];
            for (int s = 1; s <= S; ++s) {
                const double w = s * std::numbers::pi / L;
                blk.c[static_cast<std::size_t>(s)] =
                    blk.ghat[static_cast<std::size_t>(s)] * mu2 / (mu2 + w * w);
            }
        }
        sol.spectral.push_back(std::move(blk));
    }
    return sol;
}

// Certified Lipschitz constant in mu^2: ||f*(mu) - f*(mu')|| <=
// bound * |mu^2 - mu'^2| with bound = ||g|| / |lambda_1|, lambda_1 the
// smallest-magnitude nonzero block eigenvalue across blocks. Single-sample
// blocks contribute no gap and are skipped.
inline double solver_lipschitz_bound(const GridPartition& p, const DiscreteSignal& g) {
    const double n2 = static_cast<double>(g.n()) * g.n();
    double worst = 0.0;
    bool any = false;
    for (std::size_t i = 1; i < p.indices.size(); ++i) {
        const int m = p.indices[i] - p.indices[i - 1];
        if (m < 2) continue;
        any = true;
        const double gap = n2 * 2.0 * (1.0 - std::cos(std::numbers::pi / m));
        worst = std::max(worst, 1.0 / gap);
    }
    return any ? std::sqrt(g.norm_sq()) * worst : 0.0;
}

inline double solver_lipschitz_bound(const Partition& p, const ContinuousSignal& g) {
    double worst = 0.0;
    for (std::size_t i = 1; i < p.points.size(); ++i) {
        const double L = p.points[i] - p.points[i - 1];
        worst = std::max(worst, L * L / (std::numbers::pi * std::numbers::pi));
    }
    return std::sqrt(g.norm_sq()) * worst;
}

// Jump set of a solver output: {0,1} plus the owning partition's interior
// breakpoints whose cross-block trace gap is nonzero. Gaps are tested
// against a roundoff tolerance because adjacent blocks with identical data
// solve to equal values only up to machine precision.
inline Partition associated_partition(const PiecewiseSolution& sol, double rel_tol = 1e-12) {
    std::vector<double> pts{0.0};
    if (sol.is_discrete()) {
        double scale = 1.0;
        for (double v : sol.samples) scale = std::max(scale, std::abs(v));
        const auto& idx = sol.grid_partition->indices;
        const int n = sol.grid_partition->grid.n;
        for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
            const int k = idx[i];
            const double gap = std::abs(sol.samples[static_cast<std::size_t>(k)] -
                                        sol.samples[static_cast<std::size_t>(k - 1)]);
            if (gap > rel_tol * scale) pts.push_back(static_cast<double>(k) / n);
        }
    } else {
        double scale = 1.0;
        for (const auto& blk : sol.spectral) {
            double amp = 0.0;
            for (std::size_t s = 0; s < blk.c.size(); ++s)
                amp += std::abs(blk.c[s]) * blk.basis_scale(static_cast<int>(s));
            scale = std::max(scale, amp);
        }
        for (std::size_t i = 1; i < sol.spectral.size(); ++i) {
            const double gap =
                std::abs(sol.spectral[i].value_left() - sol.spectral[i - 1].value_right());
            if (gap > rel_tol * scale) pts.push_back(sol.spectral[i].a);
        }
    }
    pts.push_back(1.0);
    return Partition(std::move(pts));
}

}  // namespace sigseg
