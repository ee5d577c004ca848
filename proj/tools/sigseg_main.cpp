// sigseg: exact 1-D segmentation runs (Blake-Zisserman / Potts / Mumford-Shah),
// fixed-partition solves, convergence sweeps, dynamic-programming-vs-brute-force
// oracle checks, and plot-data emission.
//
// Exit codes: 0 success, 2 argument or input error, 3 resource cap or spectral
// truncation, 4 convergence verdict failure (sweep), 5 oracle disagreement.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sigseg/io.hpp"

using namespace sigseg;

namespace {

struct Options {
    std::string input;
    std::string output;
    std::string model = "auto";
    double gamma = 0.0;
    double mu = 0.0;
    int n = 0;
    double t = -1.0;
    int nref = 256;
    int modes = 256;
    std::uint64_t seed = 1729;
    int cap = 0;
    std::vector<double> breakpoints;
};

std::string now_iso8601() {
    const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[72];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void emit_text(const std::string& text, const std::string& output) {
    if (output.empty())
        std::cout << text;
    else
        write_text_file(output, text);
}

void emit_document(json payload, double runtime_ms, const std::string& output) {
    emit_text(make_document(std::move(payload), runtime_ms, now_iso8601()).dump(2) + "\n", output);
}

struct LoadedInput {
    std::string raw;
    std::string digest;
    std::optional<DiscreteSignal> samples;
    std::optional<ContinuousSignal> piecewise;
};

LoadedInput load_signal(const std::string& path) {
    LoadedInput in;
    in.raw = read_file(path);
    in.digest = fnv1a_digest(in.raw);
    switch (detect_input_kind(in.raw)) {
        case InputKind::Samples:
            in.samples = parse_csv_signal(in.raw);
            break;
        case InputKind::Piecewise:
            in.piecewise = parse_piecewise_signal(in.raw);
            break;
        case InputKind::Trajectory:
            throw std::invalid_argument("expected a samples or piecewise input; "
                                        "trajectory files go to 'sweep' or 'report'");
    }
    return in;
}

json input_json_of(const LoadedInput& in) {
    return in.samples ? input_to_json(*in.samples, in.digest)
                      : input_to_json(*in.piecewise, in.digest);
}

// Where the run lives on the parameter cube: one grid S(n), or the t = 0 face.
struct RunPoint {
    bool continuous = false;
    int n = 0;
};

RunPoint resolve_point(const LoadedInput& in, const Options& o, bool n_set, bool t_set) {
    RunPoint rp;
    if (t_set && o.t != 0.0) {
        const ParameterPoint probe{0.0, 0.0, o.t};
        probe.validate();  // demands t = 1/n
    }
    if (in.samples) {
        rp.n = in.samples->n();
        if (n_set && o.n != rp.n)
            throw std::invalid_argument("--n = " + std::to_string(o.n) + " does not match the " +
                                        std::to_string(rp.n) + " samples in the input");
        if (t_set && (o.t == 0.0 || ParameterPoint{0.0, 0.0, o.t}.n() != rp.n))
            throw std::invalid_argument("--t must equal 1/(sample count) for sample inputs");
        return rp;
    }
    if (n_set) {
        if (o.n < 1) throw std::invalid_argument("--n must be positive");
        if (t_set && (o.t == 0.0 || ParameterPoint{0.0, 0.0, o.t}.n() != o.n))
            throw std::invalid_argument("--n and --t disagree");
        rp.n = o.n;
        return rp;
    }
    if (t_set && o.t != 0.0) {
        rp.n = ParameterPoint{0.0, 0.0, o.t}.n();
        return rp;
    }
    rp.continuous = true;  // piecewise input, no grid requested
    return rp;
}

double apply_model(const std::string& model, double mu, bool mu_set, bool continuous) {
    if (model == "potts") {
        if (mu_set && mu != 0.0) throw std::invalid_argument("--model potts forces --mu 0");
        return 0.0;
    }
    if (model == "bz") {
        if (!(mu > 0.0)) throw std::invalid_argument("--model bz needs --mu > 0");
        if (continuous)
            throw std::invalid_argument("--model bz runs on grids; give --n, --t 1/n, or samples");
        return mu;
    }
    if (model == "ms") {
        if (!continuous)
            throw std::invalid_argument("--model ms needs a piecewise input at t = 0");
        return mu;
    }
    return mu;  // auto
}

DiscreteSignal discrete_input(const LoadedInput& in, int n) {
    return in.samples ? *in.samples : discretize(*in.piecewise, n);
}

std::vector<int> grid_indices(const Partition& p, int n) {
    std::vector<int> idx;
    for (double x : p.points) {
        const double scaled = x * n;
        const double rounded = std::round(scaled);
        if (std::abs(scaled - rounded) > 1e-9)
            throw std::invalid_argument("breakpoint " + std::to_string(x) +
                                        " is not on the grid n = " + std::to_string(n));
        idx.push_back(static_cast<int>(rounded));
    }
    return idx;
}

SegmentationResult run_minimizer(const LoadedInput& in, const RunPoint& rp, const Options& o,
                                 double mu) {
    if (rp.continuous) return minimize_ms_grid(*in.piecewise, o.gamma, mu, o.nref, o.modes, o.cap);
    return minimize_dp(discrete_input(in, rp.n), o.gamma, mu, o.cap);
}

int cmd_segment(const Options& o, bool n_set, bool t_set, bool mu_set) {
    const auto t0 = std::chrono::steady_clock::now();
    const LoadedInput in = load_signal(o.input);
    const RunPoint rp = resolve_point(in, o, n_set, t_set);
    const double mu = apply_model(o.model, o.mu, mu_set, rp.continuous);
    const SegmentationResult r = run_minimizer(in, rp, o, mu);
    emit_document(segmentation_payload("segment", input_json_of(in), r), elapsed_ms(t0), o.output);
    return 0;
}

int cmd_solve_partition(const Options& o, bool n_set, bool t_set, bool mu_set) {
    const auto t0 = std::chrono::steady_clock::now();
    const LoadedInput in = load_signal(o.input);
    const RunPoint rp = resolve_point(in, o, n_set, t_set);
    const double mu = apply_model(o.model, o.mu, mu_set, rp.continuous);
    std::vector<double> points = o.breakpoints;
    std::sort(points.begin(), points.end());
    const Partition p(points);

    SegmentationResult r;
    if (rp.continuous) {
        const ParameterPoint q{o.gamma, mu, 0.0};
        r.solution = partition_solver_continuous(*in.piecewise, p, mu, o.modes);
        r.parameters = q;
        r.objective = family_eval(q, r.solution, *in.piecewise);
        r.effective_jump_count = static_cast<int>(p.points.size()) - 2;
    } else {
        const DiscreteSignal g = discrete_input(in, rp.n);
        const ParameterPoint q{o.gamma, mu, 1.0 / rp.n};
        r.solution = partition_solver_discrete(g, GridPartition(g.grid, grid_indices(p, rp.n)), mu);
        r.parameters = q;
        const DiscreteSignal f(g.grid, r.solution.samples);
        r.objective = family_eval(q, f, g);
        r.effective_jump_count = detail::count_effective_jumps(r.solution.samples);
    }
    r.dp_value = r.objective.total;
    r.candidates = 1;
    r.runtime_ms = elapsed_ms(t0);
    emit_document(segmentation_payload("solve-partition", input_json_of(in), r), r.runtime_ms,
                  o.output);
    return 0;
}

LimitConfig sweep_config(const TrajectoryFile& tf, const Options& o, bool nref_set,
                         bool modes_set) {
    LimitConfig cfg;
    if (tf.n_ref) cfg.n_ref = *tf.n_ref;
    if (tf.modes) cfg.modes = *tf.modes;
    if (tf.tol_l2) cfg.verdict.tol_l2 = *tf.tol_l2;
    if (tf.tol_dh) cfg.verdict.tol_dh = *tf.tol_dh;
    if (nref_set) cfg.n_ref = o.nref;
    if (modes_set) cfg.modes = o.modes;
    return cfg;
}

json trajectory_input_json(const std::string& raw, const TrajectoryFile& tf) {
    json j;
    j["kind"] = "trajectory";
    j["digest"] = fnv1a_digest(raw);
    j["steps"] = tf.trajectory.steps.size();
    return j;
}

int cmd_sweep(const Options& o, bool nref_set, bool modes_set) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string raw = read_file(o.input);
    if (detect_input_kind(raw) != InputKind::Trajectory)
        throw std::invalid_argument("sweep needs a trajectory input file");
    const TrajectoryFile tf = parse_trajectory_file(raw);
    const ConvergenceReport rep =
        run_trajectory(tf.signal, tf.trajectory, sweep_config(tf, o, nref_set, modes_set));
    emit_document(report_payload("sweep", trajectory_input_json(raw, tf), rep), elapsed_ms(t0),
                  o.output);
    return rep.pass ? 0 : 4;
}

int cmd_oracle(const Options& o, bool n_set, bool gamma_set, bool mu_set) {
    if (n_set && (o.n < 2 || o.n > 16))
        throw std::invalid_argument("oracle: --n must lie in [2, 16]");
    const auto t0 = std::chrono::steady_clock::now();
    const int instances = o.cap > 0 ? o.cap : 200;
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const std::vector<double> gammas{0.0, 0.01, 0.1, 1.0, 10.0};
    const std::vector<double> mus{0.0, 0.5, 1.0, 5.0};
    std::uniform_int_distribution<int> pick_n(4, 12);
    std::uniform_int_distribution<std::size_t> pick_g(0, gammas.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_m(0, mus.size() - 1);

    for (int i = 0; i < instances; ++i) {
        const int n = n_set ? o.n : pick_n(rng);
        std::vector<double> vals;
        vals.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) vals.push_back(U(rng));
        const double gamma = gamma_set ? o.gamma : gammas[pick_g(rng)];
        const double mu = mu_set ? o.mu : mus[pick_m(rng)];
        const DiscreteSignal g(Grid(n), vals);
        const SegmentationResult dp = minimize_dp(g, gamma, mu);
        const SegmentationResult bf = brute_force_min(g, gamma, mu);
        const bool same_partition =
            dp.solution.grid_partition->indices == bf.solution.grid_partition->indices;
        const bool same_value = std::abs(dp.objective.total - bf.objective.total) <= 1e-9 &&
                                std::abs(dp.dp_value - bf.dp_value) <= 1e-9;
        if (same_partition && same_value) continue;

        json fail;
        fail["command"] = "oracle";
        fail["agreed"] = false;
        fail["instance"] = i;
        fail["seed"] = o.seed;
        fail["n"] = n;
        fail["gamma"] = gamma;
        fail["mu"] = mu;
        fail["samples"] = vals;
        json jdp;
        jdp["indices"] = dp.solution.grid_partition->indices;
        jdp["total"] = dp.objective.total;
        jdp["dp_value"] = dp.dp_value;
        fail["dp"] = std::move(jdp);
        json jbf;
        jbf["indices"] = bf.solution.grid_partition->indices;
        jbf["total"] = bf.objective.total;
        jbf["dp_value"] = bf.dp_value;
        fail["brute_force"] = std::move(jbf);
        std::cerr << fail.dump(2) << "\n";
        if (!o.output.empty()) emit_document(fail, elapsed_ms(t0), o.output);
        return 5;
    }

    json ok;
    ok["command"] = "oracle";
    ok["agreed"] = true;
    ok["instances"] = instances;
    ok["seed"] = o.seed;
    if (n_set) ok["n"] = o.n;
    if (gamma_set) ok["gamma"] = o.gamma;
    if (mu_set) ok["mu"] = o.mu;
    emit_document(std::move(ok), elapsed_ms(t0), o.output);
    return 0;
}

void append_solution_trace(std::ostringstream& out, const PiecewiseSolution& sol, int nref) {
    out << "# columns: x value\n";
    if (sol.is_discrete()) {
        const int n = sol.grid_partition->grid.n;
        for (int k = 0; k < n; ++k) {
            const double v = sol.samples[static_cast<std::size_t>(k)];
            out << static_cast<double>(k) / n << ' ' << v << '\n';
            out << static_cast<double>(k + 1) / n << ' ' << v << '\n';
        }
        return;
    }
    for (const auto& blk : sol.spectral) {
        const int m = std::max(2, static_cast<int>(std::lround((blk.b - blk.a) * nref)));
        for (int i = 0; i <= m; ++i) {
            const double x = blk.a + (blk.b - blk.a) * i / m;
            out << x << ' ' << blk.eval(x) << '\n';
        }
    }
}

int cmd_report(const Options& o, bool n_set, bool t_set, bool mu_set, bool nref_set,
               bool modes_set) {
    const std::string raw = read_file(o.input);
    std::ostringstream out;
    out.precision(12);

    if (detect_input_kind(raw) == InputKind::Trajectory) {
        const TrajectoryFile tf = parse_trajectory_file(raw);
        const ConvergenceReport rep =
            run_trajectory(tf.signal, tf.trajectory, sweep_config(tf, o, nref_set, modes_set));
        out << "# sigseg report: convergence curve (digest " << fnv1a_digest(raw) << ")\n";
        bool t_varies = false;
        for (const auto& s : tf.trajectory.steps)
            if (s.t != tf.trajectory.steps.front().t) t_varies = true;
        out << "# columns: " << (t_varies ? "n" : "step") << " l2_distance\n";
        for (std::size_t i = 0; i < rep.records.size(); ++i) {
            const auto& rec = rep.records[i];
            const double x = t_varies && !rec.q.continuous() ? static_cast<double>(rec.q.n())
                                                             : static_cast<double>(i);
            out << x << ' ' << rec.l2_dist << '\n';
        }
        out << "# pass " << (rep.pass ? 1 : 0) << "\n";
        emit_text(out.str(), o.output);
        return 0;
    }

    const LoadedInput in = load_signal(o.input);
    const RunPoint rp = resolve_point(in, o, n_set, t_set);
    const double mu = apply_model(o.model, o.mu, mu_set, rp.continuous);
    const SegmentationResult r = run_minimizer(in, rp, o, mu);
    out << "# sigseg report: minimizer step trace (digest " << in.digest << ")\n";
    append_solution_trace(out, r.solution, o.nref);
    emit_text(out.str(), o.output);
    return 0;
}

void add_common_io(CLI::App* sub, Options& o, bool require_input) {
    auto* in = sub->add_option("--input", o.input, "input file (CSV samples or piecewise signal)");
    if (require_input) in->required();
    sub->add_option("--output", o.output, "write the result document here (default: stdout)");
}

void add_parameters(CLI::App* sub, Options& o) {
    sub->add_option("--gamma", o.gamma, "jump charge, >= 0")->check(CLI::NonNegativeNumber);
    sub->add_option("--mu", o.mu, "smoothness scale, >= 0 (0 = piecewise constant)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--n", o.n, "grid size (discrete run at t = 1/n)");
    sub->add_option("--t", o.t, "cube coordinate: 0 (continuous) or 1/n");
    sub->add_option("--model", o.model, "functional: bz, potts, ms, or auto")
        ->check(CLI::IsMember({"bz", "potts", "ms", "auto"}));
    sub->add_option("--cap", o.cap, "override the resource cap (sample count / candidates)");
}

void add_continuous_knobs(CLI::App* sub, Options& o) {
    sub->add_option("--nref", o.nref, "candidate-grid size for t = 0 minimization")
        ->check(CLI::PositiveNumber);
    sub->add_option("--modes", o.modes, "cosine modes per block for t = 0 solves")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"sigseg: exact segmentation of sampled and piecewise-polynomial signals"};
    app.require_subcommand(1);

    CLI::App* seg = app.add_subcommand("segment", "globally minimize the functional");
    add_common_io(seg, o, true);
    add_parameters(seg, o);
    add_continuous_knobs(seg, o);

    CLI::App* solve = app.add_subcommand("solve-partition",
                                         "fixed-partition minimizer for given breakpoints");
    add_common_io(solve, o, true);
    add_parameters(solve, o);
    add_continuous_knobs(solve, o);
    solve->add_option("points", o.breakpoints, "partition breakpoints, including 0 and 1")
        ->required()
        ->expected(-1);

    CLI::App* sweep = app.add_subcommand("sweep", "run a declared parameter trajectory");
    add_common_io(sweep, o, true);
    add_continuous_knobs(sweep, o);

    CLI::App* oracle = app.add_subcommand("oracle", "cross-check the DP against brute force");
    add_common_io(oracle, o, false);
    oracle->add_option("--n", o.n, "fixed instance size in [2, 16] (default: random 4..12)");
    oracle->add_option("--gamma", o.gamma, "fixed jump charge (default: drawn per instance)")
        ->check(CLI::NonNegativeNumber);
    oracle->add_option("--mu", o.mu, "fixed smoothness scale (default: drawn per instance)")
        ->check(CLI::NonNegativeNumber);
    oracle->add_option("--seed", o.seed, "RNG seed for instance generation");
    oracle->add_option("--cap", o.cap, "number of random instances (default 200)");

    CLI::App* report = app.add_subcommand("report", "emit two-column plot data");
    add_common_io(report, o, true);
    add_parameters(report, o);
    add_continuous_knobs(report, o);

    try {
        app.parse(argc, argv);
        if (seg->parsed())
            return cmd_segment(o, seg->count("--n") > 0, seg->count("--t") > 0,
                               seg->count("--mu") > 0);
        if (solve->parsed())
            return cmd_solve_partition(o, solve->count("--n") > 0, solve->count("--t") > 0,
                                       solve->count("--mu") > 0);
        if (sweep->parsed())
            return cmd_sweep(o, sweep->count("--nref") > 0, sweep->count("--modes") > 0);
        if (oracle->parsed())
            return cmd_oracle(o, oracle->count("--n") > 0, oracle->count("--gamma") > 0,
                              oracle->count("--mu") > 0);
        if (report->parsed())
            return cmd_report(o, report->count("--n") > 0, report->count("--t") > 0,
                              report->count("--mu") > 0, report->count("--nref") > 0,
                              report->count("--modes") > 0);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const resource_cap_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const truncation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
