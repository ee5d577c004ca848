// Acceptance gate: ten always-on criteria, one [PASS]/[FAIL] line each.
//
//   usage: acceptance <cli-binary> <data-dir>
//
// Tolerances and runtime budgets are pinned in the bodies below. The exit
// code is the number of failed criteria, so the gate doubles as a ctest.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sigseg/io.hpp"

using namespace sigseg;

namespace {

std::string g_cli;
std::string g_data;

bool g_ok = true;
std::vector<std::string> g_details;
int g_failures = 0;

void expect(bool cond, const std::string& msg) {
    if (cond) return;
    g_ok = false;
    if (g_details.size() < 8) g_details.push_back(msg);
}

template <class F>
void criterion(int id, const char* title, double budget_ms, F&& body) {
    g_ok = true;
    g_details.clear();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (budget_ms > 0 && !(ms < budget_ms))
        expect(false, "runtime " + std::to_string(ms) + " ms exceeds the " +
                          std::to_string(budget_ms) + " ms budget");
    std::printf("[%s] criterion %2d: %s (%.0f ms)\n", g_ok ? "PASS" : "FAIL", id, title, ms);
    for (const auto& d : g_details) std::printf("        - %s\n", d.c_str());
    if (!g_ok) ++g_failures;
    std::fflush(stdout);
}

DiscreteSignal random_signal(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = U(rng);
    return DiscreteSignal(Grid(n), std::move(v));
}

GridPartition random_grid_partition(std::mt19937_64& rng, int n, double keep_prob) {
    std::bernoulli_distribution keep(keep_prob);
    std::vector<int> idx{0};
    for (int k = 1; k < n; ++k)
        if (keep(rng)) idx.push_back(k);
    idx.push_back(n);
    return GridPartition(Grid(n), idx);
}

// The fixed-partition quadratic evaluated at an arbitrary candidate.
double partition_quadratic(const DiscreteSignal& g, const GridPartition& p, double mu,
                           const std::vector<double>& f) {
    const int n = g.n();
    double fid = 0.0;
    for (int k = 0; k < n; ++k) {
        const double d = f[static_cast<std::size_t>(k)] - g.values[static_cast<std::size_t>(k)];
        fid += d * d;
    }
    double smooth = 0.0;
    for (std::size_t b = 0; b + 1 < p.indices.size(); ++b)
        for (int k = p.indices[b]; k + 1 < p.indices[b + 1]; ++k) {
            const double d = f[static_cast<std::size_t>(k + 1)] - f[static_cast<std::size_t>(k)];
            smooth += d * d;
        }
    return fid / n + (n / (mu * mu)) * smooth;
}

// Sturm-style eigenvalue count for the block operator's tridiagonal matrix:
// number of eigenvalues strictly below lambda. Diagonal is -1 at the block
// ends and -2 inside (0 for a single cell); off-diagonal entries are 1.
int eigenvalues_below(int m, double lambda) {
    int count = 0;
    double q = 1.0;
    for (int k = 1; k <= m; ++k) {
        const double d = (m == 1) ? 0.0 : ((k == 1 || k == m) ? -1.0 : -2.0);
        q = d - lambda - (k > 1 ? 1.0 / q : 0.0);
        if (q > -1e-300 && q < 1e-300) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

double kth_smallest_eigenvalue(int m, int k) {
    double lo = -4.5, hi = 0.5;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (eigenvalues_below(m, mid) >= k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli + "\" " + args;
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

void criterion_eigenvalues() {
    for (int m = 1; m <= 64; ++m) {
        const std::vector<double> lam = block_eigenvalues(m);
        expect(lam.size() == static_cast<std::size_t>(m), "wrong eigenvalue count");
        for (int k = 1; k <= m; ++k) {
            // lam is descending from 0; the bisection oracle works ascending.
            const double ours = lam[static_cast<std::size_t>(m - k)];
            const double root = kth_smallest_eigenvalue(m, k);
            expect(std::abs(ours - root) <= 1e-9,
                   "m = " + std::to_string(m) + ", k = " + std::to_string(k) + ": formula " +
                       std::to_string(ours) + " vs root " + std::to_string(root));
        }
    }
}

void criterion_dp_vs_brute() {
    std::mt19937_64 rng(987654321ull);
    const std::vector<double> gammas{0.0, 0.01, 0.1, 1.0, 10.0};
    const std::vector<double> mus{0.0, 0.5, 1.0, 5.0};
    std::uniform_int_distribution<int> pick_n(4, 12);
    std::uniform_int_distribution<std::size_t> pick_g(0, gammas.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_m(0, mus.size() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = pick_n(rng);
        const DiscreteSignal g = random_signal(rng, n);
        const double gamma = gammas[pick_g(rng)];
        const double mu = mus[pick_m(rng)];
        const SegmentationResult dp = minimize_dp(g, gamma, mu);
        const SegmentationResult bf = brute_force_min(g, gamma, mu);
        const std::string tag = "trial " + std::to_string(trial) + " (n = " + std::to_string(n) +
                                ", gamma = " + std::to_string(gamma) +
                                ", mu = " + std::to_string(mu) + ")";
        expect(dp.solution.grid_partition->indices == bf.solution.grid_partition->indices,
               tag + ": partitions differ");
        expect(std::abs(dp.objective.total - bf.objective.total) <= 1e-9,
               tag + ": objectives differ");
        expect(std::abs(dp.dp_value - bf.dp_value) <= 1e-9, tag + ": minimal values differ");
    }
}

void criterion_stationarity() {
    const int n = 64;
    std::mt19937_64 rng(31415926ull);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_real_distribution<double> Umu(0.1, 8.0);
    const double eps_set[] = {1e-4, -1e-4, 1e-5, -1e-5};
    for (int trial = 0; trial < 50; ++trial) {
        const DiscreteSignal g = random_signal(rng, n);
        const GridPartition p = random_grid_partition(rng, n, 0.15);
        const double mu = Umu(rng);
        const PiecewiseSolution sol = partition_solver_discrete(g, p, mu);
        const double q0 = partition_quadratic(g, p, mu, sol.samples);
        std::vector<double> f(sol.samples.size());
        for (int dir = 0; dir < 20; ++dir) {
            std::vector<double> v(static_cast<std::size_t>(n));
            for (double& x : v) x = U(rng);
            for (const double eps : eps_set) {
                for (std::size_t k = 0; k < f.size(); ++k)
                    f[k] = sol.samples[k] + eps * v[k];
                expect(partition_quadratic(g, p, mu, f) >= q0 - 1e-9,
                       "trial " + std::to_string(trial) + ": perturbation improved the optimum");
            }
        }
    }
}

void criterion_contraction_lipschitz() {
    std::mt19937_64 rng(271828182ull);
    const int sizes[] = {16, 64, 128};
    const double mu_set[] = {0.0, 0.3, 1.0, 5.0, 50.0};
    // (a) the solver never exceeds the data norm
    for (int trial = 0; trial < 100; ++trial) {
        const int n = sizes[trial % 3];
        const double mu = mu_set[static_cast<std::size_t>(trial) % 5];
        const DiscreteSignal g = random_signal(rng, n);
        const GridPartition p = random_grid_partition(rng, n, 0.2);
        const PiecewiseSolution sol = partition_solver_discrete(g, p, mu);
        expect(std::sqrt(sol.norm_sq()) <= std::sqrt(g.norm_sq()) + 1e-12,
               "trial " + std::to_string(trial) + ": solution norm exceeds the data norm");
    }
    // (b) mu-shifts stay under bound * |mu^2 - mu'^2|
    std::uniform_real_distribution<double> Umu(0.0, 6.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 64;
        const DiscreteSignal g = random_signal(rng, n);
        const GridPartition p = random_grid_partition(rng, n, 0.15);
        const double mu1 = (trial % 4 == 0) ? 0.0 : Umu(rng);
        const double mu2 = Umu(rng);
        const PiecewiseSolution s1 = partition_solver_discrete(g, p, mu1);
        const PiecewiseSolution s2 = partition_solver_discrete(g, p, mu2);
        double acc = 0.0;
        for (std::size_t k = 0; k < s1.samples.size(); ++k) {
            const double d = s1.samples[k] - s2.samples[k];
            acc += d * d;
        }
        const double dist = std::sqrt(acc / n);
        const double bound = solver_lipschitz_bound(p, g);
        if (bound == 0.0) {
            expect(dist <= 1e-12, "fully refined partition moved with mu");
            continue;
        }
        expect(dist <= bound * std::abs(mu1 * mu1 - mu2 * mu2) + 1e-12,
               "trial " + std::to_string(trial) + ": Lipschitz bound violated");
    }
    // (c) the whole-interval bound stabilizes at ||g|| L^2 / pi^2 (factor 2)
    const ContinuousSignal ramp = make_ramp_signal();
    const double continuum = std::sqrt(ramp.norm_sq()) / (std::numbers::pi * std::numbers::pi);
    for (int n = 16; n <= 1024; n *= 2) {
        const DiscreteSignal gn = discretize(ramp, n);
        const double bound = solver_lipschitz_bound(GridPartition(Grid(n), {0, n}), gn);
        expect(bound >= 0.5 * continuum && bound <= 2.0 * continuum,
               "n = " + std::to_string(n) + ": bound " + std::to_string(bound) +
                   " outside factor 2 of " + std::to_string(continuum));
    }
}

void criterion_solver_convergence() {
    const ConvergenceReport rep =
        solver_convergence(make_ramp_signal(), Partition({0.0, 1.0}), 2.0,
                           {8, 16, 32, 64, 128, 256, 512, 1024}, 4096, 1e-3);
    for (std::size_t i = 0; i + 1 < rep.records.size(); ++i)
        expect(rep.records[i + 1].l2_dist < rep.records[i].l2_dist,
               "distance did not strictly decrease at step " + std::to_string(i + 1));
    expect(!rep.records.empty() && rep.records.back().l2_dist < 1e-3,
           "final embedding distance " + std::to_string(rep.records.back().l2_dist) +
               " is not below 1e-3");
    expect(rep.pass, "convergence verdict failed");
}

void criterion_step_six_points() {
    const double mu_set[] = {0.0, 0.7, 2.0, 10.0};
    const double offsets[] = {0.3, 0.5, 1.0 / 3};
    for (int ai = 0; ai < 3; ++ai) {
        const ContinuousSignal g = make_step_signal(offsets[ai]);
        for (const int n : {16, 64, 256}) {
            const DiscreteSignal gn = discretize(g, n);
            std::mt19937_64 rng(7000ull + static_cast<unsigned>(ai * 1000 + n));
            for (int trial = 0; trial < 100; ++trial) {
                const GridPartition p = (trial % 10 == 9)
                                            ? GridPartition(Grid(n), [n] {
                                                  std::vector<int> all;
                                                  for (int k = 0; k <= n; ++k) all.push_back(k);
                                                  return all;
                                              }())
                                            : random_grid_partition(rng, n, 8.0 / n);
                const double mu = mu_set[static_cast<std::size_t>(trial) % 4];
                const PiecewiseSolution sol = partition_solver_discrete(gn, p, mu);
                const Partition out = associated_partition(sol);
                expect(out.points.size() <= 6,
                       "a = " + std::to_string(offsets[ai]) + ", n = " + std::to_string(n) +
                           ", trial " + std::to_string(trial) + ": " +
                           std::to_string(out.points.size()) + " points");
            }
        }
    }
}

void criterion_jump_threshold() {
    const DiscreteSignal g = discretize(make_step_signal(0.5), 8);
    const std::vector<double> split{0.0, 0.5, 1.0};
    const std::vector<double> flat{0.0, 1.0};
    expect(minimize_dp(g, 0.25 - 1e-8, 0.0).partition().points == split,
           "DP at gamma = 0.25 - 1e-8 lost the jump");
    expect(minimize_dp(g, 0.25 + 1e-8, 0.0).partition().points == flat,
           "DP at gamma = 0.25 + 1e-8 kept the jump");
    expect(brute_force_min(g, 0.25 - 1e-3, 0.0).partition().points == split,
           "brute force at gamma = 0.25 - 1e-3 lost the jump");
    expect(brute_force_min(g, 0.25 + 1e-3, 0.0).partition().points == flat,
           "brute force at gamma = 0.25 + 1e-3 kept the jump");
}

void criterion_penalty_limits() {
    // Ramp: no bond reaches the cap, so the penalty is the discrete Dirichlet
    // energy, within 5% of the integral 1 at n = 4096.
    const double v = penalty_value(discretize(make_ramp_signal(), 4096), 1.0, 1.0);
    expect(std::abs(v - 1.0) <= 0.05,
           "ramp penalty " + std::to_string(v) + " not within 5% of 1");
    // Aligned step: the single unit bond crosses the cap once n (delta)^2 /
    // mu^2 > gamma, and then the penalty equals gamma exactly.
    for (const double gamma : {0.1, 1.0, 2.0})
        for (const int n : {4, 64, 4096}) {
            if (!(n > gamma)) continue;
            const double w = penalty_value(discretize(make_step_signal(0.5), n), gamma, 1.0);
            expect(w == gamma, "step penalty at n = " + std::to_string(n) +
                                   ", gamma = " + std::to_string(gamma) + " is " +
                                   std::to_string(w) + ", not exactly gamma");
        }
}

void criterion_bundled_trajectories() {
    const char* names[] = {"trajectory_gamma.txt", "trajectory_mu.txt",
                           "trajectory_sampling.txt"};
    for (const char* name : names) {
        const TrajectoryFile tf = parse_trajectory_file(read_file(g_data + "/" + name));
        LimitConfig cfg;
        if (tf.n_ref) cfg.n_ref = *tf.n_ref;
        if (tf.modes) cfg.modes = *tf.modes;
        if (tf.tol_l2) cfg.verdict.tol_l2 = *tf.tol_l2;
        if (tf.tol_dh) cfg.verdict.tol_dh = *tf.tol_dh;
        const ConvergenceReport rep = run_trajectory(tf.signal, tf.trajectory, cfg);
        expect(rep.tol_l2 == 1e-2, std::string(name) + ": L2 tolerance not at the pinned 1e-2");
        expect(rep.tol_dh == 1.0 / 64,
               std::string(name) + ": Hausdorff tolerance not at the pinned 1/64");
        expect(rep.pass, std::string(name) + ": convergence verdict failed");
        if (!rep.records.empty())
            expect(rep.records.back().l2_dist < 1e-2 && rep.records.back().dh_dist < 1.0 / 64,
                   std::string(name) + ": final distances not under tolerance");
    }
}

void criterion_cli_determinism() {
    const std::string csv = "/tmp/sigseg_acc_step.csv";
    const std::string pw = "/tmp/sigseg_acc_step.pw";
    write_text_file(csv, "value\n0\n0\n1\n1\n");
    write_text_file(pw, "piecewise\n0 0.5 0 0 0 0\n0.5 1 1 0 0 0\n");

    // Identical segment runs produce byte-identical payloads.
    expect(run_cli("segment --input " + csv +
                   " --gamma 0.1 --mu 0 --output /tmp/sigseg_acc_out1.json 2>/dev/null") == 0,
           "segment run 1 failed");
    expect(run_cli("segment --input " + csv +
                   " --gamma 0.1 --mu 0 --output /tmp/sigseg_acc_out2.json 2>/dev/null") == 0,
           "segment run 2 failed");
    const json d1 = json::parse(read_file("/tmp/sigseg_acc_out1.json"));
    const json d2 = json::parse(read_file("/tmp/sigseg_acc_out2.json"));
    expect(d1["payload"].dump() == d2["payload"].dump(),
           "segment payloads differ between identical runs");
    const std::vector<double> split{0.0, 0.5, 1.0};
    expect(d1["payload"]["partition"]["points"].get<std::vector<double>>() == split,
           "segment partition is not [0, 0.5, 1]");
    expect(std::abs(d1["payload"]["objective"]["total"].get<double>() - 0.1) <= 1e-12,
           "segment objective is not 0.1");

    // gamma = 0 reproduces the input exactly.
    expect(run_cli("segment --input " + csv +
                   " --gamma 0 --mu 0 --output /tmp/sigseg_acc_out3.json 2>/dev/null") == 0,
           "gamma = 0 segment run failed");
    const json d3 = json::parse(read_file("/tmp/sigseg_acc_out3.json"));
    const std::vector<double> data{0.0, 0.0, 1.0, 1.0};
    expect(d3["payload"]["objective"]["total"].get<double>() == 0.0,
           "gamma = 0 objective is not 0");
    expect(d3["payload"]["solution"]["samples"].get<std::vector<double>>() == data,
           "gamma = 0 solution is not the input");

    // Continuous run on the piecewise step.
    expect(run_cli("segment --input " + pw +
                   " --gamma 0.1 --mu 0 --t 0 --output /tmp/sigseg_acc_out4.json 2>/dev/null") ==
               0,
           "piecewise segment run failed");
    const json d4 = json::parse(read_file("/tmp/sigseg_acc_out4.json"));
    expect(d4["payload"]["partition"]["points"].get<std::vector<double>>() == split,
           "piecewise partition is not [0, 0.5, 1]");

    // Fixed-partition solve agrees with the segment optimum here.
    expect(run_cli("solve-partition --input " + csv +
                   " --gamma 0.1 --mu 0 --output /tmp/sigseg_acc_out5.json 0 0.5 1 "
                   "2>/dev/null") == 0,
           "solve-partition run failed");
    const json d5 = json::parse(read_file("/tmp/sigseg_acc_out5.json"));
    expect(std::abs(d5["payload"]["objective"]["total"].get<double>() - 0.1) <= 1e-12,
           "solve-partition objective is not 0.1");

    // Plot data emission.
    expect(run_cli("report --input " + csv +
                   " --gamma 0.1 --mu 0 --output /tmp/sigseg_acc_trace.txt 2>/dev/null") == 0,
           "report run failed");
    expect(read_file("/tmp/sigseg_acc_trace.txt").rfind("# sigseg report", 0) == 0,
           "report trace missing its header line");

    // The bundled oracle suite agrees (exit 0) and is seed-deterministic.
    expect(run_cli("oracle >/dev/null 2>&1") == 0, "oracle suite did not exit 0");
    expect(run_cli("oracle --cap 50 --seed 99 --output /tmp/sigseg_acc_o1.json 2>/dev/null") == 0,
           "seeded oracle run 1 failed");
    expect(run_cli("oracle --cap 50 --seed 99 --output /tmp/sigseg_acc_o2.json 2>/dev/null") == 0,
           "seeded oracle run 2 failed");
    expect(json::parse(read_file("/tmp/sigseg_acc_o1.json"))["payload"].dump() ==
               json::parse(read_file("/tmp/sigseg_acc_o2.json"))["payload"].dump(),
           "oracle payloads differ between identical seeded runs");

    // Sweep gates on the verdict and rejects divergent declarations.
    expect(run_cli("sweep --input \"" + g_data +
                   "/trajectory_gamma.txt\" --output /tmp/sigseg_acc_sweep.json 2>/dev/null") ==
               0,
           "sweep on the bundled gamma trajectory did not exit 0");
    write_text_file("/tmp/sigseg_acc_divergent.txt",
                    "trajectory\npiece 0 1 0 1 0 0\nlimit 0.1 1 0\nstep 0.1 1 0.5\nstep 0.1 1 "
                    "0.5\n");
    expect(run_cli("sweep --input /tmp/sigseg_acc_divergent.txt >/dev/null 2>&1") == 2,
           "divergent trajectory did not exit 2");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: acceptance <cli-binary> <data-dir>\n");
        return 64;
    }
    g_cli = argv[1];
    g_data = argv[2];

    criterion(1, "block eigenvalues match characteristic-polynomial roots, m = 1..64", 1000,
              criterion_eigenvalues);
    criterion(2, "dynamic program matches brute force on 200 random instances", 30000,
              criterion_dp_vs_brute);
    criterion(3, "fixed-partition solutions are stationary under perturbation", 0,
              criterion_stationarity);
    criterion(4, "solver norms contract and mu-shifts obey the Lipschitz bound", 0,
              criterion_contraction_lipschitz);
    criterion(5, "embedded discrete solvers converge to the continuous solver", 10000,
              criterion_solver_convergence);
    criterion(6, "step-data solver outputs never exceed six partition points", 0,
              criterion_step_six_points);
    criterion(7, "the aligned step's jump threshold sits at gamma = 0.25", 0,
              criterion_jump_threshold);
    criterion(8, "discrete penalties reach the Dirichlet energy and jump charge", 0,
              criterion_penalty_limits);
    criterion(9, "bundled parameter trajectories pass the convergence verdict", 60000,
              criterion_bundled_trajectories);
    criterion(10, "CLI payloads are byte-identical and the oracle suite agrees", 0,
              criterion_cli_determinism);

    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures;
}
