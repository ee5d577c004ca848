// File ingestion (CSV samples, piecewise signals, trajectory descriptions)
// and result documents. Documents are versioned JSON with a stable field
// order; everything time-dependent lives in the header so payloads compare
// byte-identical across reruns.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sigseg/convergence.hpp"
#include "sigseg/functionals.hpp"
#include "sigseg/grid.hpp"
#include "sigseg/optimize.hpp"
#include "sigseg/solvers.hpp"

namespace sigseg {

using json = nlohmann::ordered_json;

// FNV-1a over the raw bytes; stable content digest for result documents.
inline std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a:") + buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline double parse_number(const std::string& tok, int line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": not a number: '" + tok + "'");
    }
    if (used != tok.size())
        throw std::invalid_argument("line " + std::to_string(line_no) + ": trailing characters in '" + tok + "'");
    if (!std::isfinite(v))
        throw std::invalid_argument("line " + std::to_string(line_no) + ": non-finite value");
    return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

inline std::string strip_cr(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    return s;
}

}  // namespace detail

enum class InputKind { Samples, Piecewise, Trajectory };

// First non-empty, non-comment line decides: "piecewise" or "trajectory"
// keyword files, anything else is CSV samples.
inline InputKind detect_input_kind(const std::string& content) {
    std::istringstream ss(content);
    std::string line;
    while (std::getline(ss, line)) {
        line = detail::strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        if (line == "piecewise") return InputKind::Piecewise;
        if (line == "trajectory") return InputKind::Trajectory;
        return InputKind::Samples;
    }
    throw std::invalid_argument("input is empty");
}

// CSV: one sample per line, optional leading "value" header. Samples are
// cell averages on S(n) with n = sample count.
inline DiscreteSignal parse_csv_signal(const std::string& content) {
    std::istringstream ss(content);
    std::string line;
    std::vector<double> values;
    int line_no = 0;
    bool first_content = true;
    while (std::getline(ss, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        if (first_content && line == "value") {
            first_content = false;
            continue;
        }
        first_content = false;
        values.push_back(detail::parse_number(line, line_no));
    }
    if (values.empty()) throw std::invalid_argument("no samples in CSV input");
    const int n = static_cast<int>(values.size());
    return DiscreteSignal(Grid(n), std::move(values));
}

// Piecewise file: keyword line "piecewise", then rows "lo hi c0 c1 c2 c3".
inline ContinuousSignal parse_piecewise_signal(const std::string& content) {
    std::istringstream ss(content);
    std::string line;
    std::vector<PolyPiece> pieces;
    int line_no = 0;
    bool saw_keyword = false;
    while (std::getline(ss, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        if (!saw_keyword) {
            if (line != "piecewise")
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": expected 'piecewise' keyword");
            saw_keyword = true;
            continue;
        }
        const auto toks = detail::split_ws(line);
        if (toks.size() != 6)
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 'lo hi c0 c1 c2 c3'");
        PolyPiece p;
        p.lo = detail::parse_number(toks[0], line_no);
        p.hi = detail::parse_number(toks[1], line_no);
        for (int i = 0; i < 4; ++i) p.c[static_cast<std::size_t>(i)] = detail::parse_number(toks[static_cast<std::size_t>(i) + 2], line_no);
        pieces.push_back(p);
    }
    if (pieces.empty()) throw std::invalid_argument("piecewise input has no pieces");
    return ContinuousSignal(std::move(pieces));
}

struct TrajectoryFile {
    ContinuousSignal signal;
    Trajectory trajectory;
    std::optional<int> n_ref;
    std::optional<int> modes;
    std::optional<double> tol_l2;
    std::optional<double> tol_dh;
};

// Trajectory file: keyword line "trajectory"; rows
//   piece lo hi c0 c1 c2 c3
//   limit gamma mu t
//   step gamma mu t          (one per trajectory step, in order)
// and optional overrides "nref K", "modes S", "tol_l2 x", "tol_dh x".
inline TrajectoryFile parse_trajectory_file(const std::string& content) {
    std::istringstream ss(content);
    std::string line;
    std::vector<PolyPiece> pieces;
    std::optional<ParameterPoint> limit;
    std::vector<ParameterPoint> steps;
    std::optional<int> n_ref, modes;
    std::optional<double> tol_l2, tol_dh;
    int line_no = 0;
    bool saw_keyword = false;
    while (std::getline(ss, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        if (!saw_keyword) {
            if (line != "trajectory")
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": expected 'trajectory' keyword");
            saw_keyword = true;
            continue;
        }
        const auto toks = detail::split_ws(line);
        const std::string& kw = toks[0];
        auto want = [&](std::size_t n) {
            if (toks.size() != n + 1)
                throw std::invalid_argument("line " + std::to_string(line_no) + ": '" + kw +
                                            "' expects " + std::to_string(n) + " numbers");
        };
        if (kw == "piece") {
            want(6);
            PolyPiece p;
            p.lo = detail::parse_number(toks[1], line_no);
            p.hi = detail::parse_number(toks[2], line_no);
            for (int i = 0; i < 4; ++i) p.c[static_cast<std::size_t>(i)] = detail::parse_number(toks[static_cast<std::size_t>(i) + 3], line_no);
            pieces.push_back(p);
        } else if (kw == "limit" || kw == "step") {
            want(3);
            ParameterPoint q{detail::parse_number(toks[1], line_no),
                             detail::parse_number(toks[2], line_no),
                             detail::parse_number(toks[3], line_no)};
            try {
                q.validate();
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (kw == "limit") {
                if (limit) throw std::invalid_argument("line " + std::to_string(line_no) + ": duplicate limit");
                limit = q;
            } else {
                steps.push_back(q);
            }
        } else if (kw == "nref") {
            want(1);
            n_ref = static_cast<int>(detail::parse_number(toks[1], line_no));
        } else if (kw == "modes") {
            want(1);
            modes = static_cast<int>(detail::parse_number(toks[1], line_no));
        } else if (kw == "tol_l2") {
            want(1);
            tol_l2 = detail::parse_number(toks[1], line_no);
        } else if (kw == "tol_dh") {
            want(1);
            tol_dh = detail::parse_number(toks[1], line_no);
        } else {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": unknown keyword '" + kw + "'");
        }
    }
    if (pieces.empty()) throw std::invalid_argument("trajectory file has no signal pieces");
    if (!limit) throw std::invalid_argument("trajectory file has no limit line");
    if (steps.size() < 2) throw std::invalid_argument("trajectory file needs at least 2 steps");
    TrajectoryFile tf{ContinuousSignal(std::move(pieces)), Trajectory{std::move(steps), *limit},
                      n_ref, modes, tol_l2, tol_dh};
    tf.trajectory.validate();
    return tf;
}

// ---- result documents ----------------------------------------------------

inline json parameters_to_json(const ParameterPoint& q) {
    json j;
    j["gamma"] = q.gamma;
    j["mu"] = q.mu;
    j["t"] = q.t;
    if (!q.continuous()) j["n"] = q.n();
    return j;
}

inline json objective_to_json(const ObjectiveBreakdown& o) {
    json j;
    j["jump_term"] = o.jump_term;
    j["smooth_term"] = o.smooth_term;
    j["fidelity_term"] = o.fidelity_term;
    j["total"] = o.total;
    return j;
}

inline json solution_to_json(const PiecewiseSolution& sol) {
    json j;
    if (sol.is_discrete()) {
        j["kind"] = "samples";
        j["samples"] = sol.samples;
    } else {
        j["kind"] = "cosine_blocks";
        json blocks = json::array();
        for (const auto& blk : sol.spectral) {
            json b;
            b["a"] = blk.a;
            b["b"] = blk.b;
            b["signal_coefficients"] = blk.ghat;
            b["coefficients"] = blk.c;
            blocks.push_back(std::move(b));
        }
        j["blocks"] = std::move(blocks);
    }
    return j;
}

inline json partition_to_json(const PiecewiseSolution& sol) {
    json j;
    if (sol.is_discrete()) j["indices"] = sol.grid_partition->indices;
    j["points"] = sol.owning_partition().points;
    return j;
}

inline json input_to_json(const DiscreteSignal& g, const std::string& digest) {
    json j;
    j["kind"] = "samples";
    j["digest"] = digest;
    j["n"] = g.n();
    j["samples"] = g.values;
    return j;
}

inline json input_to_json(const ContinuousSignal& g, const std::string& digest) {
    json j;
    j["kind"] = "piecewise";
    j["digest"] = digest;
    json pieces = json::array();
    for (const auto& p : g.pieces())
        pieces.push_back(json::array({p.lo, p.hi, p.c[0], p.c[1], p.c[2], p.c[3]}));
    j["pieces"] = std::move(pieces);
    return j;
}

inline json segmentation_payload(const std::string& command, const json& input,
                                 const SegmentationResult& r) {
    json p;
    p["command"] = command;
    p["input"] = input;
    p["parameters"] = parameters_to_json(r.parameters);
    p["partition"] = partition_to_json(r.solution);
    p["solution"] = solution_to_json(r.solution);
    p["objective"] = objective_to_json(r.objective);
    json d;
    d["dp_value"] = r.dp_value;
    d["candidates"] = r.candidates;
    d["partition_size"] = r.solution.owning_partition().points.size();
    d["effective_jumps"] = r.effective_jump_count;
    d["truncation_warning"] = r.solution.truncation_warning;
    if (r.nref > 0) d["nref"] = r.nref;
    p["diagnostics"] = std::move(d);
    return p;
}

inline json report_payload(const std::string& command, const json& input,
                           const ConvergenceReport& rep) {
    json p;
    p["command"] = command;
    p["input"] = input;
    p["kind"] = rep.kind;
    json records = json::array();
    for (const auto& rec : rep.records) {
        json r;
        r["parameters"] = parameters_to_json(rec.q);
        r["objective"] = rec.objective;
        r["partition"] = rec.partition_points;
        r["l2_dist"] = rec.l2_dist;
        r["dh_dist"] = rec.dh_dist;
        r["solution_norm"] = rec.solution_norm;
        records.push_back(std::move(r));
    }
    p["records"] = std::move(records);
    json lim;
    lim["partition"] = rep.limit_partition;
    lim["objective"] = rep.limit_objective;
    lim["stable"] = rep.limit_stable;
    p["limit"] = std::move(lim);
    json v;
    v["tol_l2"] = rep.tol_l2;
    v["tol_dh"] = rep.tol_dh;
    v["final_below_tol"] = rep.final_below_tol;
    v["tail_ok"] = rep.tail_ok;
    v["truncation_warning"] = rep.truncation_warning;
    v["pass"] = rep.pass;
    p["verdict"] = std::move(v);
    return p;
}

// Assemble the full document; only the header varies between identical runs.
inline json make_document(json payload, double runtime_ms, const std::string& created) {
    json doc;
    doc["format"] = 1;
    json header;
    header["created"] = created;
    header["runtime_ms"] = runtime_ms;
    doc["header"] = std::move(header);
    doc["payload"] = std::move(payload);
    return doc;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace sigseg
