// Experiment harness for the consistency claims: minimizers along a
// parameter trajectory approach the limit minimizer, discrete partition
// solvers approach the continuous one under grid refinement, the penalty
// converges to the Mumford-Shah penalty, and the solver family is uniformly
// Lipschitz in mu^2. "Converged" is operational: final distances under
// tolerance plus a non-increasing tail within slack.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigseg/functionals.hpp"
#include "sigseg/grid.hpp"
#include "sigseg/metrics.hpp"
#include "sigseg/optimize.hpp"
#include "sigseg/partitions.hpp"
#include "sigseg/solvers.hpp"

namespace sigseg {

// A parameter sequence with its declared limit.
struct Trajectory {
    std::vector<ParameterPoint> steps;
    ParameterPoint limit;

    // A declared limit must match the numerical behaviour of each component:
    // the last step is exactly at the limit or has closed at least half of
    // the first step's gap. Catches declarations like "t_s constant but
    // declared -> 0".
    void validate() const {
        if (steps.size() < 2) throw std::invalid_argument("Trajectory: need at least 2 steps");
        limit.validate();
        for (const auto& q : steps) q.validate();
        auto check = [](double first, double last, double lim, const char* name) {
            if (last == lim) return;
            if (!(std::abs(last - lim) <= 0.5 * std::abs(first - lim)))
                throw std::invalid_argument(std::string("Trajectory: component ") + name +
                                            " does not approach its declared limit");
        };
        check(steps.front().gamma, steps.back().gamma, limit.gamma, "gamma");
        check(steps.front().mu, steps.back().mu, limit.mu, "mu");
        check(steps.front().t, steps.back().t, limit.t, "t");
    }
};

struct StepRecord {
    ParameterPoint q;
    double objective = 0.0;
    std::vector<double> partition_points;
    double l2_dist = 0.0;       // minimizer distance to the limit minimizer
    double dh_dist = 0.0;       // partition Hausdorff distance to the limit
    double solution_norm = 0.0; // L2 norm of the step's minimizer
};

struct VerdictConfig {
    double tol_l2 = 1e-2;
    double tol_dh = 1.0 / 64;
    int final_k = 3;          // how many closing records must sit under tolerance
    double tail_slack = 0.10; // permitted relative increase inside the tail
};

struct LimitConfig {
    int n_ref = 256;  // grid restriction for t = 0 limit minimizers
    int modes = 256;  // spectral truncation
    VerdictConfig verdict;
};

struct ConvergenceReport {
    std::string kind;
    std::vector<StepRecord> records;
    std::vector<double> limit_partition;
    double limit_objective = 0.0;
    bool limit_stable = true;  // t = 0 limits: partition unchanged at n_ref/2
    bool truncation_warning = false;
    double tol_l2 = 0.0;
    double tol_dh = 0.0;
    bool final_below_tol = false;
    bool tail_ok = false;
    bool pass = false;
};

namespace detail {

// Tail window: the last max(final_k, ceil(len/2)) records. Each consecutive
// pair may increase by at most the slack fraction (plus roundoff).
inline bool tail_non_increasing(const std::vector<double>& d, int final_k, double slack) {
    const std::size_t len = d.size();
    std::size_t window = std::max<std::size_t>(static_cast<std::size_t>(final_k), (len + 1) / 2);
    window = std::min(window, len);
    for (std::size_t i = len - window; i + 1 < len; ++i)
        if (!(d[i + 1] <= (1.0 + slack) * d[i] + 1e-12)) return false;
    return true;
}

inline void apply_verdict(ConvergenceReport& rep, const VerdictConfig& cfg) {
    rep.tol_l2 = cfg.tol_l2;
    rep.tol_dh = cfg.tol_dh;
    std::vector<double> l2s, dhs;
    for (const auto& r : rep.records) {
        l2s.push_back(r.l2_dist);
        dhs.push_back(r.dh_dist);
    }
    const std::size_t len = l2s.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.final_k), len);
    rep.final_below_tol = len > 0;
    for (std::size_t i = len - k; i < len; ++i)
        if (!(l2s[i] < cfg.tol_l2 && dhs[i] < cfg.tol_dh)) rep.final_below_tol = false;
    rep.tail_ok = tail_non_increasing(l2s, cfg.final_k, cfg.tail_slack) &&
                  tail_non_increasing(dhs, cfg.final_k, cfg.tail_slack);
    rep.pass = rep.final_below_tol && rep.tail_ok;
}

}  // namespace detail

// Minimize at every step of the trajectory and compare against the limit
// minimizer (grid-restricted continuous when t = 0, exact DP when t = 1/n).
inline ConvergenceReport run_trajectory(const ContinuousSignal& g, const Trajectory& traj,
                                        const LimitConfig& cfg = {}) {
    traj.validate();
    ConvergenceReport rep;
    rep.kind = "trajectory";

    auto minimize_at = [&](const ParameterPoint& q) -> SegmentationResult {
        if (q.continuous()) return minimize_ms_grid(g, q.gamma, q.mu, cfg.n_ref, cfg.modes);
        return minimize_dp(discretize(g, q.n()), q.gamma, q.mu);
    };

    const SegmentationResult limit_res = minimize_at(traj.limit);
    const Partition limit_part = limit_res.partition();
    rep.limit_partition = limit_part.points;
    rep.limit_objective = limit_res.objective.total;
    rep.truncation_warning = limit_res.solution.truncation_warning;
    if (traj.limit.continuous() && cfg.n_ref >= 4) {
        // Grid-restriction sensitivity: the limit partition should survive a
        // halved candidate grid up to one coarse cell.
        const SegmentationResult half =
            minimize_ms_grid(g, traj.limit.gamma, traj.limit.mu, cfg.n_ref / 2, cfg.modes);
        rep.limit_stable = hausdorff_distance(half.partition(), limit_part) <=
                           1.0 / (cfg.n_ref / 2) + 1e-12;
    }

    for (const auto& q : traj.steps) {
        const SegmentationResult res = minimize_at(q);
        StepRecord rec;
        rec.q = q;
        rec.objective = res.objective.total;
        rec.partition_points = res.partition().points;
        rec.l2_dist = l2_distance(res.solution, limit_res.solution);
        rec.dh_dist = hausdorff_distance(res.partition(), limit_part);
        rec.solution_norm = std::sqrt(res.solution.norm_sq());
        rep.truncation_warning = rep.truncation_warning || res.solution.truncation_warning;
        rep.records.push_back(std::move(rec));
    }
    detail::apply_verdict(rep, cfg.verdict);
    return rep;
}

// Strong-resolvent refinement check: for a partition with rational
// breakpoints, the embedded discrete fixed-partition solutions approach the
// continuous one strictly monotonically along n_list.
inline ConvergenceReport solver_convergence(const ContinuousSignal& g, const Partition& p,
                                            double mu, const std::vector<int>& n_list, int S,
                                            double tol = 1e-3) {
    ConvergenceReport rep;
    rep.kind = "solver";
    rep.limit_partition = p.points;
    const PiecewiseSolution limit = partition_solver_continuous(g, p, mu, S);
    rep.truncation_warning = limit.truncation_warning;

    for (int n : n_list) {
        std::vector<int> idx;
        for (double x : p.points) {
            const double scaled = x * n;
            const double rounded = std::round(scaled);
            if (std::abs(scaled - rounded) > 1e-9)
                throw std::invalid_argument("solver_convergence: breakpoint " + std::to_string(x) +
                                            " not on the grid n = " + std::to_string(n));
            idx.push_back(static_cast<int>(rounded));
        }
        const DiscreteSignal gn = discretize(g, n);
        const GridPartition gp(gn.grid, idx);
        const PiecewiseSolution fn = partition_solver_discrete(gn, gp, mu);
        StepRecord rec;
        rec.q = {0.0, mu, 1.0 / n};
        rec.partition_points = gp.to_partition().points;
        rec.l2_dist = l2_distance(fn, limit);
        rec.dh_dist = hausdorff_distance(gp.to_partition(), p);
        rec.solution_norm = std::sqrt(fn.norm_sq());
        rep.records.push_back(std::move(rec));
    }
    bool strict = true;
    for (std::size_t i = 0; i + 1 < rep.records.size(); ++i)
        strict = strict && rep.records[i + 1].l2_dist < rep.records[i].l2_dist;
    rep.tol_l2 = tol;
    rep.final_below_tol = !rep.records.empty() && rep.records.back().l2_dist < tol;
    rep.tail_ok = strict;
    rep.pass = rep.final_below_tol && rep.tail_ok;
    return rep;
}

// Penalty-term value on the conditional expectations of f at grid n.
inline double penalty_value(const DiscreteSignal& f, double gamma, double mu) {
    if (mu <= 0.0) throw std::invalid_argument("penalty_value: mu must be > 0");
    const int n = f.n();
    const double w = n / (mu * mu);
    CompensatedSum acc;
    for (int k = 0; k + 1 < n; ++k) {
        const double d = f.values[static_cast<std::size_t>(k + 1)] - f.values[static_cast<std::size_t>(k)];
        acc.add(std::min(w * d * d, gamma));
    }
    return acc.value();
}

// Jump count and exact Dirichlet energy of a piecewise-polynomial function,
// the closed-form limit of the penalty.
inline int signal_jump_count(const ContinuousSignal& f, double tol = 1e-12) {
    int jumps = 0;
    const auto& ps = f.pieces();
    for (std::size_t i = 1; i < ps.size(); ++i)
        if (std::abs(ps[i].eval(ps[i].lo) - ps[i - 1].eval(ps[i].lo)) > tol) ++jumps;
    return jumps;
}

inline double dirichlet_energy(const ContinuousSignal& f) {
    CompensatedSum acc;
    for (const auto& p : f.pieces()) {
        PolyPiece d{p.lo, p.hi, p.derivative()};
        acc.add(d.integral_sq(p.lo, p.hi));
    }
    return acc.value();
}

// Penalty convergence along (gamma_s, mu_s, n_s): records the discrete
// penalty and its gap to the closed-form limit gamma j(f) + mu^-2 |f'|^2;
// the verdict requires the final value within 5% of the limit (both
// directions, covering limsup and liminf).
inline ConvergenceReport penalty_gamma_check(const ContinuousSignal& f,
                                             const std::vector<double>& gamma_s,
                                             const std::vector<double>& mu_s,
                                             const std::vector<int>& n_list) {
    if (gamma_s.size() != n_list.size() || mu_s.size() != n_list.size())
        throw std::invalid_argument("penalty_gamma_check: sequence lengths differ");
    if (n_list.empty()) throw std::invalid_argument("penalty_gamma_check: empty sequence");
    ConvergenceReport rep;
    rep.kind = "penalty";
    const double limit = gamma_s.back() * signal_jump_count(f) +
                         dirichlet_energy(f) / (mu_s.back() * mu_s.back());
    rep.limit_objective = limit;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const DiscreteSignal fn = discretize(f, n_list[i]);
        StepRecord rec;
        rec.q = {gamma_s[i], mu_s[i], 1.0 / n_list[i]};
        rec.objective = penalty_value(fn, gamma_s[i], mu_s[i]);
        rec.l2_dist = std::abs(rec.objective - limit);
        rep.records.push_back(std::move(rec));
    }
    const double scale = std::max(std::abs(limit), 1e-12);
    rep.tol_l2 = 0.05 * scale;
    rep.final_below_tol = rep.records.back().l2_dist <= rep.tol_l2;
    rep.tail_ok = true;
    rep.pass = rep.final_below_tol;
    return rep;
}

// Uniform-Lipschitz sweep: for each partition (with its own grid), verify
// ||f*(mu) - f*(mu')|| <= bound * |mu^2 - mu'^2| over all mu pairs. Each
// record stores the worst observed ratio (objective) and the certified
// bound (l2_dist); the verdict is ratio <= 1 everywhere.
inline ConvergenceReport lipschitz_sweep(const ContinuousSignal& g,
                                         const std::vector<GridPartition>& partitions,
                                         const std::vector<double>& mu_grid) {
    ConvergenceReport rep;
    rep.kind = "lipschitz";
    bool all_ok = true;
    for (const auto& p : partitions) {
        const DiscreteSignal gn = discretize(g, p.grid.n);
        const double bound = solver_lipschitz_bound(p, gn);
        std::vector<PiecewiseSolution> sols;
        sols.reserve(mu_grid.size());
        for (double mu : mu_grid) sols.push_back(partition_solver_discrete(gn, p, mu));
        double worst = 0.0;
        for (std::size_t i = 0; i < mu_grid.size(); ++i)
            for (std::size_t j = i + 1; j < mu_grid.size(); ++j) {
                const double dmu2 = std::abs(mu_grid[i] * mu_grid[i] - mu_grid[j] * mu_grid[j]);
                if (dmu2 == 0.0) continue;
                CompensatedSum diff;
                for (std::size_t k = 0; k < sols[i].samples.size(); ++k) {
                    const double d = sols[i].samples[k] - sols[j].samples[k];
                    diff.add(d * d);
                }
                const double dist = std::sqrt(diff.value() / p.grid.n);
                if (bound == 0.0) {
                    // Fully refined partitions: f = g for every mu, distance 0.
                    if (dist > 1e-12) worst = std::numeric_limits<double>::infinity();
                    continue;
                }
                worst = std::max(worst, dist / (bound * dmu2));
            }
        StepRecord rec;
        rec.q = {0.0, 0.0, 1.0 / p.grid.n};
        rec.objective = worst;
        rec.l2_dist = bound;
        rec.partition_points = p.to_partition().points;
        rep.records.push_back(std::move(rec));
        all_ok = all_ok && worst <= 1.0;
    }
    rep.pass = all_ok;
    rep.tail_ok = all_ok;
    rep.final_below_tol = all_ok;
    return rep;
}

}  // namespace sigseg
