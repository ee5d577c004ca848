// Exact L2 inner products and distances between solver outputs. Every
// solution is a piecewise cosine series (a step function is the mode-0
// series on each cell), so one cross-integral routine covers step-step,
// step-spectral, and spectral-spectral pairs without quadrature error.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "sigseg/common.hpp"
#include "sigseg/solvers.hpp"

namespace sigseg {

namespace detail {

// (lo, hi, value) pieces when the solution is piecewise constant
// (discrete steps, or continuous mu = 0 blocks). Lets distances be computed
// on the pointwise difference, which is exact at distance zero where the
// norm-product formula cancels catastrophically.
struct ConstPiece {
    double lo, hi, value;
};

inline std::optional<std::vector<ConstPiece>> step_form(const PiecewiseSolution& sol) {
    std::vector<ConstPiece> out;
    if (sol.is_discrete()) {
        const int n = sol.grid_partition->grid.n;
        out.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            out.push_back({static_cast<double>(k) / n, static_cast<double>(k + 1) / n,
                           sol.samples[static_cast<std::size_t>(k)]});
        return out;
    }
    for (const auto& blk : sol.spectral) {
        if (blk.c.size() != 1) return std::nullopt;
        out.push_back({blk.a, blk.b, blk.c[0] * blk.basis_scale(0)});
    }
    return out;
}

// Exact squared L2 distance of two piecewise-constant functions via their
// merged breakpoints.
inline double step_step_dist_sq(const std::vector<ConstPiece>& a, const std::vector<ConstPiece>& b) {
    CompensatedSum acc;
    std::size_t i = 0, j = 0;
    double x = 0.0;
    while (i < a.size() && j < b.size()) {
        const double next = std::min(a[i].hi, b[j].hi);
        const double d = a[i].value - b[j].value;
        if (next > x) acc.add(d * d * (next - x));
        x = next;
        if (a[i].hi <= next) ++i;
        if (j < b.size() && b[j].hi <= next) ++j;
    }
    return acc.value();
}

// One block of sum_j coeff_j * cos(omega_j (x - lo)) on [lo, hi).
struct CosBlock {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::pair<double, double>> terms;  // (coeff, omega)
};

inline std::vector<CosBlock> as_cos_blocks(const PiecewiseSolution& sol) {
    std::vector<CosBlock> out;
    if (sol.is_discrete()) {
        const int n = sol.grid_partition->grid.n;
        out.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            CosBlock b;
            b.lo = static_cast<double>(k) / n;
            b.hi = static_cast<double>(k + 1) / n;
            b.terms.emplace_back(sol.samples[static_cast<std::size_t>(k)], 0.0);
            out.push_back(std::move(b));
        }
        return out;
    }
    out.reserve(sol.spectral.size());
    for (const auto& blk : sol.spectral) {
        CosBlock b;
        b.lo = blk.a;
        b.hi = blk.b;
        const double L = blk.length();
        for (std::size_t s = 0; s < blk.c.size(); ++s)
            b.terms.emplace_back(blk.c[s] * blk.basis_scale(static_cast<int>(s)),
                                 static_cast<double>(s) * std::numbers::pi / L);
        out.push_back(std::move(b));
    }
    return out;
}

// Integral of cos(omega x - theta) over [lo, hi]; the product form avoids
// cancellation for small omega * (hi - lo).
inline double cos_phase_integral(double omega, double theta, double lo, double hi) {
    if (omega == 0.0) return (hi - lo) * std::cos(theta);
    const double mid = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    return 2.0 * std::cos(omega * mid - theta) * std::sin(omega * half) / omega;
}

// Integral of cos(w1 (x-a1)) cos(w2 (x-a2)) over [lo, hi] by product-to-sum.
inline double cos_cos_integral(double w1, double a1, double w2, double a2, double lo, double hi) {
    const double diff = 0.5 * cos_phase_integral(w1 - w2, w1 * a1 - w2 * a2, lo, hi);
    const double sum = 0.5 * cos_phase_integral(w1 + w2, w1 * a1 + w2 * a2, lo, hi);
    return diff + sum;
}

}  // namespace detail

// Exact L2(0,1) inner product of two solver outputs.
inline double l2_inner(const PiecewiseSolution& f, const PiecewiseSolution& h) {
    const auto fb = detail::as_cos_blocks(f);
    const auto hb = detail::as_cos_blocks(h);
    CompensatedSum acc;
    std::size_t j0 = 0;
    for (const auto& a : fb) {
        while (j0 < hb.size() && hb[j0].hi <= a.lo) ++j0;
        for (std::size_t j = j0; j < hb.size() && hb[j].lo < a.hi; ++j) {
            const double lo = std::max(a.lo, hb[j].lo);
            const double hi = std::min(a.hi, hb[j].hi);
            if (!(lo < hi)) continue;
            for (const auto& [cf, wf] : a.terms)
                for (const auto& [ch, wh] : hb[j].terms) {
                    if (cf == 0.0 || ch == 0.0) continue;
                    acc.add(cf * ch * detail::cos_cos_integral(wf, a.lo, wh, hb[j].lo, lo, hi));
                }
        }
    }
    return acc.value();
}

// Exact L2(0,1) distance between two solver outputs (each embedded as the
// function it represents). Piecewise-constant pairs go through the merged-
// breakpoint difference, which is exact at distance zero.
inline double l2_distance(const PiecewiseSolution& f, const PiecewiseSolution& h) {
    const auto fa = detail::step_form(f);
    const auto ha = detail::step_form(h);
    if (fa && ha) return std::sqrt(detail::step_step_dist_sq(*fa, *ha));
    if (!f.is_discrete() && !h.is_discrete() && f.spectral.size() == h.spectral.size()) {
        // Same partition: coefficient differences are exact (orthonormal basis).
        bool same = true;
        for (std::size_t b = 0; same && b < f.spectral.size(); ++b)
            same = f.spectral[b].a == h.spectral[b].a && f.spectral[b].b == h.spectral[b].b;
        if (same) {
            CompensatedSum acc;
            for (std::size_t b = 0; b < f.spectral.size(); ++b) {
                const auto& cf = f.spectral[b].c;
                const auto& ch = h.spectral[b].c;
                const std::size_t top = std::max(cf.size(), ch.size());
                for (std::size_t s = 0; s < top; ++s) {
                    const double d = (s < cf.size() ? cf[s] : 0.0) - (s < ch.size() ? ch[s] : 0.0);
                    acc.add(d * d);
                }
            }
            return std::sqrt(acc.value());
        }
    }
    const double d2 = f.norm_sq() - 2.0 * l2_inner(f, h) + h.norm_sq();
    return std::sqrt(std::max(0.0, d2));
}

}  // namespace sigseg
