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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "natgrad/experiment.hpp"
#include "natgrad/io.hpp"
#include "oracles.hpp"

using namespace natgrad;
using namespace natgrad::testing;
using std::numbers::pi;

namespace {

std::filesystem::path scratch(const std::string &name) {
    const auto p = std::filesystem::temp_directory_path() / ("natgrad_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Statevector uniform_state(int n) {
    auto s = Statevector::zero(n);
    for (int q = 0; q < n; ++q) s.apply(SingleQubitUnitary::hadamard(), q);
    return s;
}

ExperimentConfig small_campaign(ProblemKind kind, int size, int count, int iters) {
    ExperimentConfig c;
    c.problem = {kind, size, count, 11, {}};
    c.ansatz = {AnsatzFamily::RyCz, 2, Connectivity::Ring, Pauli::Z};
    for (Method m : {Method::GD, Method::QNG, Method::RNG, Method::SCQNG}) {
        OptimizerConfig oc;
        oc.method = m;
        oc.eta = 0.05;
        oc.iterations = iters;
        oc.rng_basis = default_rng_basis(c.ansatz);
        c.methods.push_back(oc);
    }
    return c;
}

}  // namespace

TEST(Overlap, Examples) {
    auto g = Statevector::zero(3);
    g.apply(SingleQubitUnitary::pauli(Pauli::X), 1);  // basis state 2
    EXPECT_DOUBLE_EQ(overlap_with_optimal(g, std::vector<std::uint64_t>{2, 5}), 1.0);
    const std::vector<std::uint64_t> three = {0, 3, 6};
    EXPECT_NEAR(overlap_with_optimal(uniform_state(3), three), 3.0 / 8.0, 1e-15);

    const auto tri = with_ground(build_problem(MaxCutPayload{3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}}));
    EXPECT_NEAR(overlap_with_optimal(uniform_state(3), tri), 0.75, 1e-15);
    EXPECT_THROW(overlap_with_optimal(g, std::vector<std::uint64_t>{}), std::invalid_argument);
}

TEST(Overlap, HeisenbergUsesGroundVector) {
    const auto inst = with_ground(random_instance(ProblemKind::Heisenberg, 4, 0));
    const auto &v = inst.ground->eigenvector;
    const auto ground = Statevector::from_amplitudes(4, v);
    EXPECT_NEAR(overlap_with_optimal(ground, inst), 1.0, 1e-12);
    EXPECT_LT(overlap_with_optimal(Statevector::zero(4), inst), 1.0);
}

TEST(Overlap, BoundedAndSaturatedOnlyOnGroundSupport) {
    Rng rng(301);
    const auto inst = with_ground(random_instance(ProblemKind::MaxCut, 6, 2));
    const auto &idx = inst.ground->indices;
    for (int trial = 0; trial < 50; ++trial) {
        const double o = overlap_with_optimal(random_state(6, rng), inst);
        EXPECT_GE(o, 0.0);
        EXPECT_LT(o, 1.0);
    }
    // Supported on the ground set -> 1.
    std::vector<Complex> a(64, 0.0);
    a[idx[0]] = std::sqrt(0.3);
    a[idx[1]] = Complex(0.0, std::sqrt(0.7));
    EXPECT_NEAR(overlap_with_optimal(Statevector::from_amplitudes(6, a), inst), 1.0, 1e-15);
    // Any weight off the set -> strictly below 1.
    const std::uint64_t off = idx[0] == 0 && idx[1] == 1 ? 2 : (idx[0] == 0 ? 1 : 0);
    a[off] = 0.1;
    a[idx[0]] = std::sqrt(0.29);
    EXPECT_LT(overlap_with_optimal(Statevector::from_amplitudes(6, a), inst), 1.0);
}

TEST(RelativeError, Examples) {
    EXPECT_EQ(relative_error(-3.0, -3.0).value, 0.0);
    EXPECT_EQ(relative_error(0.0, -2.0).value, 1.0);
    EXPECT_FALSE(relative_error(0.0, -2.0).absolute_fallback);
    const auto fb = relative_error(4.0, 0.0);
    EXPECT_TRUE(fb.absolute_fallback);
    EXPECT_EQ(fb.value, 4.0);
}

TEST(Campaign, ZeroIterationsReportsInitialMetrics) {
    auto c = small_campaign(ProblemKind::MaxCut, 4, 1, 0);
    const auto s = run_campaign(c);
    ASSERT_EQ(s.instances.size(), 1u);
    for (const auto &m : s.instances[0].methods) {
        EXPECT_EQ(m.final_loss, m.initial_loss);
        EXPECT_EQ(m.preparations, 0u);
        EXPECT_EQ(m.trace.records.size(), 1u);
    }
}

TEST(Campaign, SingleParameterGdEqualsQng) {
    ParameterizedCircuit c(1);
    c.add_rotation(Pauli::Y, 0);
    const PauliHamiltonian h(1, {PauliString::from_label(1.0, "Z")});
    const auto theta0 = initial_angles(1, 5);
    OptimizerConfig gd, qng;
    gd.method = Method::GD;
    qng.method = Method::QNG;
    gd.iterations = qng.iterations = 40;
    EXPECT_EQ(run(gd, c, h, theta0).final_loss(), run(qng, c, h, theta0).final_loss());
}

TEST(Campaign, InvariantsHold) {
    for (auto kind : {ProblemKind::MaxCut, ProblemKind::NumberPartitioning, ProblemKind::Heisenberg}) {
        auto c = small_campaign(kind, 4, 3, 6);
        if (kind == ProblemKind::Heisenberg) c.ansatz = default_ansatz_for(kind);
        const auto s = run_campaign(c);
        for (const auto &inst : s.instances) {
            const double e_opt = inst.e_opt();
            const double first = inst.methods.front().initial_loss;
            const int m = static_cast<int>(inst.theta0.size());
            for (const auto &r : inst.methods) {
                EXPECT_EQ(r.initial_loss, first);  // shared theta_0
                for (const auto &rec : r.trace.records) EXPECT_GE(rec.loss, e_opt - 1e-9);
                EXPECT_GE(r.overlap, 0.0);
                EXPECT_LE(r.overlap, 1.0);
                EXPECT_EQ(r.relative.absolute_fallback, e_opt == 0.0);
                const auto um = static_cast<std::uint64_t>(m);
                const auto l = static_cast<std::uint64_t>((m + 1) / 2);
                const std::uint64_t per = r.config.method == Method::GD    ? 2 * um
                                          : r.config.method == Method::QNG ? 2 * um + 2 * um * (um + 1)
                                          : r.config.method == Method::RNG ? 4 * um + 1
                                                                           : 2 * l + 2 * l * (l + 1);
                EXPECT_EQ(r.preparations, 6 * per);
            }
        }
        for (std::size_t k = 0; k < s.aggregates.size(); ++k) {
            double loss_sum = 0.0, overlap_sum = 0.0;
            for (const auto &inst : s.instances) {
                loss_sum += inst.methods[k].final_loss;
                overlap_sum += inst.methods[k].overlap;
            }
            EXPECT_EQ(s.aggregates[k].mean_final_loss, loss_sum / 3.0);
            EXPECT_EQ(s.aggregates[k].mean_overlap, overlap_sum / 3.0);
        }
    }
}

TEST(Campaign, InitialAnglesInRangeAndSeeded) {
    const auto a = initial_angles(30, 4);
    EXPECT_EQ(a, initial_angles(30, 4));
    EXPECT_NE(a, initial_angles(30, 5));
    for (double x : a) {
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 2 * pi);
    }
}

TEST(Benchmark, OutputsAreDeterministic) {
    auto c = small_campaign(ProblemKind::MaxCut, 4, 2, 4);
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    c.output_dir = d1.string();
    run_benchmark(c);
    c.output_dir = d2.string();
    run_benchmark(c);
    std::size_t files = 0;
    for (const auto &e : std::filesystem::directory_iterator(d1)) {
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(d2 / e.path().filename())) << e.path();
    }
    EXPECT_EQ(files, 2u * 4u + 1u);
    const auto summary = Json::parse(slurp(d1 / "summary.json"));
    EXPECT_EQ(summary.at("instances").size(), 2u);
    EXPECT_EQ(summary.at("aggregates").size(), 4u);
}

TEST(Benchmark, CompareAggregatesTraceFiles) {
    auto c = small_campaign(ProblemKind::NumberPartitioning, 4, 3, 3);
    const auto dir = scratch("compare");
    c.output_dir = dir.string();
    const auto s = run_benchmark(c);
    const auto rows = compare_traces(dir);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto &row : rows) {
        EXPECT_EQ(row.runs, 3);
        const auto it = std::find_if(s.aggregates.begin(), s.aggregates.end(),
                                     [&](const auto &a) { return a.label == row.label; });
        ASSERT_NE(it, s.aggregates.end());
        EXPECT_NEAR(row.mean_final_loss, it->mean_final_loss, 1e-12);
        EXPECT_NEAR(row.mean_preparations, it->mean_preparations, 1e-9);
    }
    EXPECT_THROW(compare_traces(scratch("empty_missing")), std::runtime_error);
}

TEST(Io, TraceCsvRoundTrip) {
    Rng rng(307);
    const auto c = build_ansatz({AnsatzFamily::RyRzCnot, 2, 1});
    OptimizerConfig oc;
    oc.method = Method::RNG;
    oc.iterations = 5;
    const auto t = run(oc, c, random_hamiltonian(2, 3, rng), random_angles(4, rng));
    const auto rows = parse_trace_csv(trace_csv(t));
    ASSERT_EQ(rows.size(), t.records.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k].loss, t.records[k].loss);
        EXPECT_EQ(rows[k].grad_norm, t.records[k].grad_norm);
        EXPECT_EQ(rows[k].preparations, t.records[k].preparations);
        EXPECT_EQ(rows[k].diagnostics, t.records[k].diagnostics);
    }
    EXPECT_THROW(parse_trace_csv("a,b\n"), std::invalid_argument);
}

TEST(Io, ConfigRoundTripAndDefaults) {
    auto c = small_campaign(ProblemKind::Heisenberg, 4, 2, 9);
    c.methods[3].subset_size = 3;
    const auto back = config_from_json(Json::parse(to_json(c).dump()));
    EXPECT_EQ(to_json(back), to_json(c));

    const auto minimal = config_from_json(Json::parse(R"({
        "problem": {"kind": "heisenberg", "size": 6},
        "methods": [{"method": "RNG"}]
    })"));
    EXPECT_EQ(minimal.ansatz.family, AnsatzFamily::RyRzCnot);
    EXPECT_EQ(minimal.ansatz.layers, 3);
    EXPECT_EQ(minimal.methods[0].rng_basis.layers, 2);
    EXPECT_EQ(minimal.methods[0].rng_basis.family, AnsatzFamily::RyRzCnot);
    EXPECT_THROW(config_from_json(Json::parse(R"({"methods": [{"method": "RNG", "eta": -1}]})")),
                 std::invalid_argument);
    EXPECT_THROW(config_from_json(Json::parse(R"({"problem": {"size": 30}})")), SizeError);
}

TEST(Analysis, RankOrderingAndFiles) {
    ExperimentConfig c;
    c.analysis.num_qubits = 4;
    c.analysis.ansatz = {AnsatzFamily::RyRzCnot, 2, Connectivity::Ring, Pauli::Z};
    c.analysis.bases_per_layer = 10;
    c.analysis.max_measurement_layers = 2;
    c.analysis.rank_trials = 6;
    c.analysis.heisenberg_qubits = 3;
    c.analysis.heisenberg_iterations = 5;
    c.output_dir = scratch("analysis").string();
    const auto a = run_analysis(c);
    ASSERT_EQ(a.distances.size(), 2u);
    EXPECT_EQ(a.distances[0].distances.size(), 10u);
    for (const auto &r : a.ranks) {
        EXPECT_LE(r.rank_z, r.rank_quantum);
        EXPECT_LE(r.rank_random, r.rank_quantum);
        EXPECT_LE(r.rank_quantum, r.m);
    }
    ASSERT_EQ(a.heisenberg.traces.size(), 3u);
    EXPECT_EQ(a.heisenberg.traces[2].method, Method::ZNG);
    for (const char *f : {"distances.csv", "ranks.csv", "analysis.json", "heisenberg_RNG.csv", "heisenberg_QNG.csv",
                          "heisenberg_ZNG.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.output_dir) / f)) << f;
    }
}
