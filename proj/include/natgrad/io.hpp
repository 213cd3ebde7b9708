// Copyright 2026 The natgrad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "natgrad/circuit.hpp"
#include "natgrad/experiment.hpp"
#include "natgrad/fisher.hpp"
#include "natgrad/hamiltonian.hpp"
#include "natgrad/optimizers.hpp"

namespace natgrad {

using Json = nlohmann::json;

/// Shortest round-trip text for a double.
inline std::string format_double(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace detail {

inline Pauli pauli_from_string(const std::string &s) {
    if (s == "I") return Pauli::I;
    if (s == "X") return Pauli::X;
    if (s == "Y") return Pauli::Y;
    if (s == "Z") return Pauli::Z;
    throw std::invalid_argument("unknown Pauli '" + s + "'");
}

inline std::string family_name(AnsatzFamily f) { return f == AnsatzFamily::RyRzCnot ? "ry_rz_cnot" : "ry_cz"; }

inline AnsatzFamily family_from_string(const std::string &s) {
    if (s == "ry_rz_cnot") return AnsatzFamily::RyRzCnot;
    if (s == "ry_cz") return AnsatzFamily::RyCz;
    throw std::invalid_argument("unknown ansatz family '" + s + "'");
}

inline std::string connectivity_name(Connectivity c) { return c == Connectivity::Ring ? "ring" : "all_to_all"; }

inline Connectivity connectivity_from_string(const std::string &s) {
    if (s == "ring") return Connectivity::Ring;
    if (s == "all_to_all") return Connectivity::AllToAll;
    throw std::invalid_argument("unknown connectivity '" + s + "'");
}

inline const char *fixed_name(FixedKind k) {
    switch (k) {
        case FixedKind::CNOT:
            return "CNOT";
        case FixedKind::CZ:
            return "CZ";
        case FixedKind::H:
            return "H";
    }
    return "?";
}

template <typename T>
T get_or(const Json &j, const char *key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Circuits.

inline Json to_json(const ParameterizedCircuit &c) {
    Json gates = Json::array();
    for (const auto &g : c.gates()) {
        if (const auto *r = std::get_if<PauliRotation>(&g)) {
            gates.push_back({{"type", "rotation"},
                             {"axis", std::string(1, pauli_char(r->axis))},
                             {"qubit", r->qubit},
                             {"param", r->param},
                             {"generator_eigenvalue", r->generator_eigenvalue}});
        } else {
            const auto &f = std::get<FixedGate>(g);
            Json jf = {{"type", detail::fixed_name(f.kind)}, {"q0", f.q0}};
            if (f.kind != FixedKind::H) {
                jf["q1"] = f.q1;
            }
            gates.push_back(jf);
        }
    }
    return {{"num_qubits", c.num_qubits()}, {"gates", gates}};
}

inline ParameterizedCircuit circuit_from_json(const Json &j) {
    std::vector<Gate> gates;
    for (const auto &g : j.at("gates")) {
        const auto type = g.at("type").get<std::string>();
        if (type == "rotation") {
            gates.emplace_back(PauliRotation{detail::pauli_from_string(g.at("axis").get<std::string>()),
                                             g.at("qubit").get<int>(), g.at("param").get<int>(),
                                             detail::get_or(g, "generator_eigenvalue", 0.5)});
        } else if (type == "CNOT" || type == "CZ") {
            gates.emplace_back(FixedGate{type == "CNOT" ? FixedKind::CNOT : FixedKind::CZ, g.at("q0").get<int>(),
                                         g.at("q1").get<int>()});
        } else if (type == "H") {
            gates.emplace_back(FixedGate{FixedKind::H, g.at("q0").get<int>()});
        } else {
            throw std::invalid_argument("unknown gate type '" + type + "'");
        }
    }
    return ParameterizedCircuit(j.at("num_qubits").get<int>(), std::move(gates));
}

inline Json to_json(const AnsatzChoice &a) {
    return {{"family", detail::family_name(a.family)},
            {"layers", a.layers},
            {"connectivity", detail::connectivity_name(a.connectivity)},
            {"second_axis", std::string(1, pauli_char(a.second_axis))}};
}

inline AnsatzChoice ansatz_from_json(const Json &j, const AnsatzChoice &fallback) {
    AnsatzChoice a = fallback;
    if (j.contains("family")) a.family = detail::family_from_string(j.at("family").get<std::string>());
    if (j.contains("layers")) a.layers = j.at("layers").get<int>();
    if (j.contains("connectivity")) a.connectivity = detail::connectivity_from_string(j.at("connectivity").get<std::string>());
    if (j.contains("second_axis")) a.second_axis = detail::pauli_from_string(j.at("second_axis").get<std::string>());
    return a;
}

// ---------------------------------------------------------------------------
// Problem instances.

inline Json to_json(const PauliHamiltonian &h) {
    Json terms = Json::array();
    for (const auto &t : h.terms()) {
        terms.push_back({{"coefficient", t.coefficient()}, {"label", t.label()}});
    }
    return {{"num_qubits", h.num_qubits()}, {"offset", h.offset()}, {"terms", terms}};
}

inline Json to_json(const ProblemInstance &inst) {
    Json j = {{"kind", to_string(inst.kind)}, {"num_qubits", inst.num_qubits()}};
    if (inst.seed) {
        j["seed"] = *inst.seed;
    }
    std::visit(
        [&j](const auto &p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, MaxCutPayload>) {
                Json edges = Json::array();
                for (const auto &e : p.edges) {
                    edges.push_back({e.u, e.v, e.weight});
                }
                j["edges"] = edges;
            } else if constexpr (std::is_same_v<P, NumberPartitioningPayload>) {
                j["numbers"] = p.numbers;
            } else {
                j["coupling"] = p.coupling;
                j["field"] = p.field;
            }
        },
        inst.payload);
    j["hamiltonian"] = to_json(inst.hamiltonian);
    if (inst.ground) {
        j["ground"] = {{"energy", inst.ground->energy}, {"indices", inst.ground->indices}};
    }
    return j;
}

/// Rebuilds an instance from its payload fields; the stored Hamiltonian and
/// ground data are derived, so they are recomputed rather than read.
inline ProblemInstance instance_from_json(const Json &j) {
    const auto kind = problem_kind_from_string(j.at("kind").get<std::string>());
    ProblemPayload payload;
    switch (kind) {
        case ProblemKind::MaxCut: {
            MaxCutPayload p{j.at("num_qubits").get<int>(), {}};
            for (const auto &e : j.at("edges")) {
                p.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
            }
            payload = std::move(p);
            break;
        }
        case ProblemKind::NumberPartitioning:
            payload = NumberPartitioningPayload{j.at("numbers").get<std::vector<std::int64_t>>()};
            break;
        case ProblemKind::Heisenberg:
            payload = HeisenbergPayload{j.at("num_qubits").get<int>(), detail::get_or(j, "coupling", 1.0),
                                        detail::get_or(j, "field", 1.0)};
            break;
    }
    auto inst = build_problem(payload);
    if (j.contains("seed")) {
        inst.seed = j.at("seed").get<std::uint64_t>();
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Fisher matrices.

inline Json to_json(const FisherMatrix &f) {
    static const char *kinds[] = {"quantum", "classical", "reduced_quantum"};
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < f.entries.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < f.entries.cols(); ++c) {
            row.push_back(f.entries(r, c));
        }
        rows.push_back(row);
    }
    Json j = {{"kind", kinds[static_cast<int>(f.kind)]}, {"m", f.m()}, {"entries", rows}};
    if (!f.basis.empty()) j["basis"] = f.basis;
    if (!f.subset.empty()) j["subset"] = f.subset;
    return j;
}

// ---------------------------------------------------------------------------
// Configs.

inline Json to_json(const OptimizerConfig &c) {
    return {{"method", to_string(c.method)},
            {"eta", c.eta},
            {"iterations", c.iterations},
            {"pinv_cutoff", c.pinv_cutoff},
            {"rng_layers", c.rng_basis.layers},
            {"rng_family", detail::family_name(c.rng_basis.family)},
            {"rng_connectivity", detail::connectivity_name(c.rng_basis.connectivity)},
            {"subset_size", c.subset_size},
            {"scqng_full_gradient", c.scqng_full_gradient},
            {"normalize_step", c.normalize_step},
            {"seed", c.seed}};
}

/// Missing RNG basis fields follow the ansatz: same family, max(1, layers - 1) layers.
inline OptimizerConfig optimizer_from_json(const Json &j, const AnsatzChoice &ansatz) {
    OptimizerConfig c;
    c.method = method_from_string(j.at("method").get<std::string>());
    c.eta = detail::get_or(j, "eta", c.eta);
    c.iterations = detail::get_or(j, "iterations", c.iterations);
    c.pinv_cutoff = detail::get_or(j, "pinv_cutoff", c.pinv_cutoff);
    c.rng_basis = default_rng_basis(ansatz);
    c.rng_basis.layers = detail::get_or(j, "rng_layers", c.rng_basis.layers);
    if (j.contains("rng_family")) c.rng_basis.family = detail::family_from_string(j.at("rng_family").get<std::string>());
    if (j.contains("rng_connectivity")) {
        c.rng_basis.connectivity = detail::connectivity_from_string(j.at("rng_connectivity").get<std::string>());
    }
    c.subset_size = detail::get_or(j, "subset_size", c.subset_size);
    c.scqng_full_gradient = detail::get_or(j, "scqng_full_gradient", c.scqng_full_gradient);
    c.normalize_step = detail::get_or(j, "normalize_step", c.normalize_step);
    c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
    c.validate();
    return c;
}

inline Json to_json(const ExperimentConfig &c) {
    Json methods = Json::array();
    for (const auto &m : c.methods) {
        methods.push_back(to_json(m));
    }
    const auto &a = c.analysis;
    return {{"problem",
             {{"kind", to_string(c.problem.kind)},
              {"size", c.problem.size},
              {"count", c.problem.count},
              {"seed", c.problem.seed},
              {"weighted", c.problem.options.weighted},
              {"max_integer", c.problem.options.max_integer},
              {"coupling", c.problem.options.coupling},
              {"field", c.problem.options.field}}},
            {"ansatz", to_json(c.ansatz)},
            {"methods", methods},
            {"degeneracy_tol", c.degeneracy_tol},
            {"output_dir", c.output_dir},
            {"analysis",
             {{"ansatz", to_json(a.ansatz)},
              {"num_qubits", a.num_qubits},
              {"bases_per_layer", a.bases_per_layer},
              {"max_measurement_layers", a.max_measurement_layers},
              {"rank_trials", a.rank_trials},
              {"rank_basis_layers", a.rank_basis_layers},
              {"heisenberg_qubits", a.heisenberg_qubits},
              {"heisenberg_iterations", a.heisenberg_iterations},
              {"heisenberg_eta", a.heisenberg_eta},
              {"seed", a.seed}}}};
}

inline ExperimentConfig config_from_json(const Json &j) {
    ExperimentConfig c;
    if (j.contains("problem")) {
        const auto &p = j.at("problem");
        if (p.contains("kind")) c.problem.kind = problem_kind_from_string(p.at("kind").get<std::string>());
        c.problem.size = detail::get_or(p, "size", c.problem.size);
        c.problem.count = detail::get_or(p, "count", c.problem.count);
        c.problem.seed = detail::get_or<std::uint64_t>(p, "seed", c.problem.seed);
        c.problem.options.weighted = detail::get_or(p, "weighted", c.problem.options.weighted);
        c.problem.options.max_integer = detail::get_or<std::int64_t>(p, "max_integer", c.problem.options.max_integer);
        c.problem.options.coupling = detail::get_or(p, "coupling", c.problem.options.coupling);
        c.problem.options.field = detail::get_or(p, "field", c.problem.options.field);
    }
    c.ansatz = ansatz_from_json(j.value("ansatz", Json::object()), default_ansatz_for(c.problem.kind));
    for (const auto &m : j.value("methods", Json::array())) {
        c.methods.push_back(optimizer_from_json(m, c.ansatz));
    }
    c.degeneracy_tol = detail::get_or(j, "degeneracy_tol", c.degeneracy_tol);
    c.output_dir = detail::get_or<std::string>(j, "output_dir", c.output_dir);
    if (j.contains("analysis")) {
        const auto &a = j.at("analysis");
        auto &o = c.analysis;
        o.ansatz = ansatz_from_json(a.value("ansatz", Json::object()), o.ansatz);
        o.num_qubits = detail::get_or(a, "num_qubits", o.num_qubits);
        o.bases_per_layer = detail::get_or(a, "bases_per_layer", o.bases_per_layer);
        o.max_measurement_layers = detail::get_or(a, "max_measurement_layers", o.max_measurement_layers);
        o.rank_trials = detail::get_or(a, "rank_trials", o.rank_trials);
        o.rank_basis_layers = detail::get_or(a, "rank_basis_layers", o.rank_basis_layers);
        o.heisenberg_qubits = detail::get_or(a, "heisenberg_qubits", o.heisenberg_qubits);
        o.heisenberg_iterations = detail::get_or(a, "heisenberg_iterations", o.heisenberg_iterations);
        o.heisenberg_eta = detail::get_or(a, "heisenberg_eta", o.heisenberg_eta);
        o.seed = detail::get_or<std::uint64_t>(a, "seed", o.seed);
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    return config_from_json(Json::parse(in));
}

// ---------------------------------------------------------------------------
// Traces and summaries.

inline constexpr const char *kTraceHeader = "iteration,loss,grad_norm,step_norm,preparations,diagnostics";

inline std::string trace_csv(const OptimizerTrace &t) {
    std::string out = kTraceHeader;
    out += '\n';
    for (const auto &r : t.records) {
        out += std::to_string(r.iteration) + ',' + format_double(r.loss) + ',' + format_double(r.grad_norm) + ',' +
               format_double(r.step_norm) + ',' + std::to_string(r.preparations) + ',' + r.diagnostics + '\n';
    }
    return out;
}

struct TraceRow {
    int iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double step_norm = 0.0;
    std::uint64_t preparations = 0;
    std::string diagnostics;
};

inline std::vector<TraceRow> parse_trace_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw std::invalid_argument("trace CSV has an unexpected header");
    }
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::size_t start = 0;
        for (int k = 0; k < 5; ++k) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos) {
                throw std::invalid_argument("trace CSV row has too few fields: " + line);
            }
            f.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                        std::stoull(f[4]), line.substr(start)});
    }
    return rows;
}

inline Json to_json(const RunSummary &s) {
    Json instances = Json::array();
    for (const auto &inst : s.instances) {
        Json methods = Json::array();
        for (const auto &m : inst.methods) {
            methods.push_back({{"label", m.label},
                               {"config", to_json(m.config)},
                               {"initial_loss", m.initial_loss},
                               {"final_loss", m.final_loss},
                               {"relative_error", m.relative.value},
                               {"absolute_error_fallback", m.relative.absolute_fallback},
                               {"overlap", m.overlap},
                               {"iterations", m.iterations},
                               {"preparations", m.preparations}});
        }
        instances.push_back({{"index", inst.index},
                             {"seed", inst.instance.seed.value_or(0)},
                             {"e_opt", inst.e_opt()},
                             {"ground_degeneracy", inst.instance.ground->indices.size()},
                             {"methods", methods}});
    }
    Json aggregates = Json::array();
    for (const auto &a : s.aggregates) {
        aggregates.push_back({{"label", a.label},
                              {"mean_final_loss", a.mean_final_loss},
                              {"mean_relative_error", a.mean_relative_error},
                              {"mean_overlap", a.mean_overlap},
                              {"mean_preparations", a.mean_preparations}});
    }
    return {{"instances", instances}, {"aggregates", aggregates}};
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

/// "<kind>_n<size>_s<seed>_<label>.csv"
inline std::string trace_file_name(const ProblemInstance &inst, const std::string &label) {
    return to_string(inst.kind) + "_n" + std::to_string(inst.num_qubits()) + "_s" +
           std::to_string(inst.seed.value_or(0)) + "_" + label + ".csv";
}

/// run_campaign plus files: one CSV trace per (instance, method) and summary.json.
inline RunSummary run_benchmark(const ExperimentConfig &config) {
    auto summary = run_campaign(config);
    const std::filesystem::path dir = config.output_dir;
    std::filesystem::create_directories(dir);
    for (const auto &inst : summary.instances) {
        for (const auto &m : inst.methods) {
            write_text(dir / trace_file_name(inst.instance, m.label), trace_csv(m.trace));
        }
    }
    write_text(dir / "summary.json", to_json(summary).dump(2) + "\n");
    return summary;
}

inline Json to_json(const FisherAnalysis &a) {
    Json hist = Json::array();
    for (const auto &h : a.distances) {
        hist.push_back({{"measurement_layers", h.measurement_layers}, {"mean", h.mean}, {"distances", h.distances}});
    }
    Json ranks = Json::array();
    for (const auto &r : a.ranks) {
        ranks.push_back({{"trial", r.trial},
                         {"rank_quantum", r.rank_quantum},
                         {"rank_z", r.rank_z},
                         {"rank_random", r.rank_random},
                         {"m", r.m}});
    }
    Json traces = Json::array();
    for (const auto &t : a.heisenberg.traces) {
        traces.push_back({{"method", to_string(t.method)},
                          {"final_loss", t.final_loss()},
                          {"preparations", t.preparations()}});
    }
    return {{"distance_histograms", hist},
            {"ranks", ranks},
            {"heisenberg",
             {{"e_opt", a.heisenberg.instance.ground->energy},
              {"num_qubits", a.heisenberg.instance.num_qubits()},
              {"traces", traces}}}};
}

/// analyze_fisher plus files: distances.csv, ranks.csv, heisenberg_<method>.csv, analysis.json.
inline FisherAnalysis run_analysis(const ExperimentConfig &config) {
    auto a = analyze_fisher(config.analysis);
    const std::filesystem::path dir = config.output_dir;
    std::filesystem::create_directories(dir);
    std::string dist = "measurement_layers,basis,distance\n";
    for (const auto &h : a.distances) {
        for (std::size_t b = 0; b < h.distances.size(); ++b) {
            dist += std::to_string(h.measurement_layers) + ',' + std::to_string(b) + ',' +
                    format_double(h.distances[b]) + '\n';
        }
    }
    write_text(dir / "distances.csv", dist);
    std::string ranks = "trial,rank_quantum,rank_z,rank_random,m\n";
    for (const auto &r : a.ranks) {
        ranks += std::to_string(r.trial) + ',' + std::to_string(r.rank_quantum) + ',' + std::to_string(r.rank_z) +
                 ',' + std::to_string(r.rank_random) + ',' + std::to_string(r.m) + '\n';
    }
    write_text(dir / "ranks.csv", ranks);
    for (const auto &t : a.heisenberg.traces) {
        write_text(dir / ("heisenberg_" + to_string(t.method) + ".csv"), trace_csv(t));
    }
    write_text(dir / "analysis.json", to_json(a).dump(2) + "\n");
    return a;
}

struct ComparisonRow {
    std::string label;
    int runs = 0;
    double mean_final_loss = 0.0;
    double mean_preparations = 0.0;
};

/// Groups the trace CSVs in `dir` by the method label at the end of the file
/// name and averages their final rows. Files are visited in sorted order.
inline std::vector<ComparisonRow> compare_traces(const std::filesystem::path &dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto &e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, ComparisonRow> groups;
    for (const auto &f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        const auto text = buf.str();
        if (text.rfind(kTraceHeader, 0) != 0) {
            continue;
        }
        const auto rows = parse_trace_csv(text);
        if (rows.empty()) {
            continue;
        }
        const auto stem = f.stem().string();
        const auto label = stem.substr(stem.find_last_of('_') + 1);
        auto &g = groups[label];
        g.label = label;
        ++g.runs;
        g.mean_final_loss += rows.back().loss;
        g.mean_preparations += static_cast<double>(rows.back().preparations);
    }
    if (groups.empty()) {
        throw std::runtime_error("no trace files in " + dir.string());
    }
    std::vector<ComparisonRow> out;
    for (auto &[label, g] : groups) {
        g.mean_final_loss /= g.runs;
        g.mean_preparations /= g.runs;
        out.push_back(g);
    }
    return out;
}

}  // namespace natgrad
