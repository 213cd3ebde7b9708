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

// natgrad: instance generation, benchmark campaigns and Fisher analyses.
//
//   natgrad generate --kind maxcut --qubits 8 --seed 3 --out inst.json
//   natgrad run --config configs/maxcut_small.json --out out/maxcut
//   natgrad analyze --config configs/analysis.json --out out/analysis
//   natgrad compare out/maxcut

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "natgrad/natgrad.hpp"

namespace {

using namespace natgrad;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> qubits;
    std::optional<int> layers;
    std::string method;
    std::optional<double> eta;
    std::optional<int> iters;
};

void add_common(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--qubits", o.qubits, "qubit count")->check(CLI::PositiveNumber);
    cmd->add_option("--layers", o.layers, "ansatz layers")->check(CLI::PositiveNumber);
    cmd->add_option("--eta", o.eta, "step size");
    cmd->add_option("--iters", o.iters, "iterations")->check(CLI::NonNegativeNumber);
}

ExperimentConfig base_config(const Overrides &o) {
    return o.config.empty() ? ExperimentConfig{} : load_config(o.config);
}

int cmd_generate(const Overrides &o, const std::string &kind) {
    const auto k = problem_kind_from_string(kind);
    const int n = o.qubits.value_or(8);
    auto inst = with_ground(random_instance(k, n, o.seed.value_or(0)));
    const auto text = to_json(inst).dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_text(o.out, text);
    }
    return 0;
}

int cmd_run(const Overrides &o) {
    auto c = base_config(o);
    if (o.seed) c.problem.seed = *o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.qubits) c.problem.size = *o.qubits;
    if (o.layers) c.ansatz.layers = *o.layers;
    if (!o.method.empty()) {
        OptimizerConfig m = c.methods.empty() ? OptimizerConfig{} : c.methods.front();
        m.method = method_from_string(o.method);
        m.rng_basis = default_rng_basis(c.ansatz);
        c.methods = {m};
    }
    if (c.methods.empty()) {
        throw std::invalid_argument("no optimizer methods configured (use --method or a config file)");
    }
    for (auto &m : c.methods) {
        if (o.eta) m.eta = *o.eta;
        if (o.iters) m.iterations = *o.iters;
    }
    c.validate();
    const auto s = run_benchmark(c);
    for (const auto &a : s.aggregates) {
        std::cout << a.label << ": mean final loss " << a.mean_final_loss << ", mean relative error "
                  << a.mean_relative_error << ", mean overlap " << a.mean_overlap << ", mean preparations "
                  << a.mean_preparations << "\n";
    }
    std::cout << "wrote " << c.output_dir << "/summary.json\n";
    return 0;
}

int cmd_analyze(const Overrides &o) {
    auto c = base_config(o);
    if (o.seed) c.analysis.seed = *o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.qubits) c.analysis.num_qubits = *o.qubits;
    if (o.layers) c.analysis.ansatz.layers = *o.layers;
    if (o.eta) c.analysis.heisenberg_eta = *o.eta;
    if (o.iters) c.analysis.heisenberg_iterations = *o.iters;
    const auto a = run_analysis(c);
    for (const auto &h : a.distances) {
        std::cout << "measurement layers " << h.measurement_layers << ": mean distance " << h.mean << "\n";
    }
    for (const auto &t : a.heisenberg.traces) {
        std::cout << to_string(t.method) << ": final loss " << t.final_loss() << ", preparations "
                  << t.preparations() << "\n";
    }
    std::cout << "wrote " << c.output_dir << "/analysis.json\n";
    return 0;
}

int cmd_compare(const std::string &dir) {
    const auto rows = compare_traces(dir);
    Json j = Json::array();
    for (const auto &r : rows) {
        std::cout << r.label << ": " << r.runs << " runs, mean final loss " << r.mean_final_loss
                  << ", mean preparations " << r.mean_preparations << "\n";
        j.push_back({{"label", r.label},
                     {"runs", r.runs},
                     {"mean_final_loss", r.mean_final_loss},
                     {"mean_preparations", r.mean_preparations}});
    }
    write_text(std::filesystem::path(dir) / "comparison.json", j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"natural-gradient optimizers for variational circuits"};
    app.require_subcommand(1);

    Overrides gen, run_o, ana;
    std::string kind = "maxcut";
    auto *g = app.add_subcommand("generate", "emit a random problem instance as JSON");
    add_common(g, gen);
    g->add_option("--kind", kind, "maxcut | number_partitioning | heisenberg");

    auto *r = app.add_subcommand("run", "run a benchmark campaign");
    add_common(r, run_o);
    r->add_option("--method", run_o.method, "GD | QNG | RNG | SCQNG | ZNG (replaces the configured list)");

    auto *a = app.add_subcommand("analyze", "Fisher-information analyses");
    add_common(a, ana);

    std::string compare_dir;
    auto *c = app.add_subcommand("compare", "aggregate trace CSVs in a directory");
    c->add_option("dir", compare_dir, "directory of trace CSVs")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (g->parsed()) return cmd_generate(gen, kind);
        if (r->parsed()) return cmd_run(run_o);
        if (a->parsed()) return cmd_analyze(ana);
        return cmd_compare(compare_dir);
    } catch (const std::exception &e) {
        std::cerr << "natgrad: error: " << e.what() << "\n";
        return 1;
    }
}
