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
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "natgrad/circuit.hpp"
#include "natgrad/fisher.hpp"
#include "natgrad/hamiltonian.hpp"
#include "natgrad/linalg.hpp"
#include "natgrad/optimizers.hpp"
#include "natgrad/random.hpp"
#include "natgrad/statevector.hpp"

namespace natgrad {

// ---------------------------------------------------------------------------
// Metrics.

/// Probability mass on the listed basis states.
inline double overlap_with_optimal(const Statevector &state, std::span<const std::uint64_t> ground_indices) {
    if (ground_indices.empty()) {
        throw std::invalid_argument("ground set is empty");
    }
    double p = 0.0;
    for (auto b : ground_indices) {
        if (b >= state.dim()) {
            throw std::out_of_range("ground index out of range");
        }
        p += std::norm(state[b]);
    }
    return std::min(p, 1.0);
}

/// |<ground|psi>|^2 for a ground eigenvector.
inline double overlap_with_optimal(const Statevector &state, std::span<const Complex> ground_vector) {
    if (ground_vector.size() != state.dim()) {
        throw DimensionError("ground vector has the wrong dimension");
    }
    Complex acc{0.0, 0.0};
    for (std::size_t b = 0; b < state.dim(); ++b) {
        acc += std::conj(ground_vector[b]) * state[b];
    }
    return std::min(std::norm(acc), 1.0);
}

/// Dispatches on the instance's ground data (computed on demand).
inline double overlap_with_optimal(const Statevector &state, const ProblemInstance &instance,
                                   double degeneracy_tol = 1e-9) {
    const GroundState g = instance.ground ? *instance.ground : exact_ground(instance.hamiltonian, degeneracy_tol);
    if (instance.hamiltonian.is_diagonal()) {
        return overlap_with_optimal(state, std::span<const std::uint64_t>(g.indices));
    }
    return overlap_with_optimal(state, std::span<const Complex>(g.eigenvector));
}

struct RelativeError {
    double value = 0.0;
    /// Set when e_opt == 0 and `value` is the absolute error loss - e_opt.
    bool absolute_fallback = false;
};

/// (loss - e_opt) / |e_opt|.
inline RelativeError relative_error(double loss_value, double e_opt) {
    if (e_opt == 0.0) {
        return {loss_value - e_opt, true};
    }
    return {(loss_value - e_opt) / std::abs(e_opt), false};
}

// ---------------------------------------------------------------------------
// Campaign configuration.

struct ProblemSpec {
    ProblemKind kind = ProblemKind::MaxCut;
    int size = 8;
    int count = 1;
    std::uint64_t seed = 0;
    RandomInstanceOptions options{};

    /// Seed of instance `index`.
    std::uint64_t instance_seed(int index) const { return derive_seed(seed, static_cast<std::uint64_t>(index)); }
};

/// An ansatz shape without a qubit count.
struct AnsatzChoice {
    AnsatzFamily family = AnsatzFamily::RyCz;
    int layers = 4;
    Connectivity connectivity = Connectivity::Ring;
    Pauli second_axis = Pauli::Z;

    AnsatzSpec for_qubits(int n) const { return {family, n, layers, connectivity, second_axis}; }
};

/// Ry-CZ with 4 layers for the combinatorial problems, RyRz-CNOT with 3 for Heisenberg.
inline AnsatzChoice default_ansatz_for(ProblemKind kind) {
    if (kind == ProblemKind::Heisenberg) {
        return {AnsatzFamily::RyRzCnot, 3, Connectivity::Ring, Pauli::Z};
    }
    return {AnsatzFamily::RyCz, 4, Connectivity::Ring, Pauli::Z};
}

/// Random bases shaped like the ansatz with max(1, layers - 1) layers.
inline BasisArchitecture default_rng_basis(const AnsatzChoice &a) {
    return {std::max(1, a.layers - 1), a.family, a.connectivity};
}

struct AnalysisOptions {
    /// Distance histograms and rank table.
    AnsatzChoice ansatz{AnsatzFamily::RyRzCnot, 3, Connectivity::Ring, Pauli::Z};
    int num_qubits = 8;
    int bases_per_layer = 200;
    int max_measurement_layers = 3;
    int rank_trials = 50;
    /// Layers of the random basis in the rank table; 0 picks max(1, ansatz layers - 1).
    int rank_basis_layers = 0;
    /// Heisenberg comparison of RNG, QNG and the fixed Z-basis natural gradient.
    int heisenberg_qubits = 6;
    int heisenberg_iterations = 300;
    double heisenberg_eta = 0.05;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    ProblemSpec problem{};
    AnsatzChoice ansatz{};
    std::vector<OptimizerConfig> methods;
    double degeneracy_tol = 1e-9;
    std::string output_dir = "out";
    AnalysisOptions analysis{};

    void validate() const {
        if (problem.size < 1 || problem.size > kMaxExactQubits) {
            throw SizeError("problem size must lie in [1, " + std::to_string(kMaxExactQubits) + "]");
        }
        if (problem.count < 1) {
            throw std::invalid_argument("instance count must be positive");
        }
        for (const auto &m : methods) {
            m.validate();
        }
        if (!(degeneracy_tol >= 0.0)) {
            throw std::invalid_argument("degeneracy_tol must be non-negative");
        }
    }
};

/// Labels for the configured methods; repeated methods get a "#k" suffix.
inline std::vector<std::string> method_labels(const std::vector<OptimizerConfig> &methods) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        int repeats = 0;
        for (std::size_t j = 0; j < methods.size(); ++j) {
            repeats += methods[j].method == methods[i].method;
        }
        labels.push_back(repeats > 1 ? to_string(methods[i].method) + "#" + std::to_string(i)
                                     : to_string(methods[i].method));
    }
    return labels;
}

/// theta_0 uniform on [0, 2 pi)^m, a function of the instance seed only.
inline std::vector<double> initial_angles(int m, std::uint64_t instance_seed) {
    constexpr std::uint64_t kThetaStream = 0x7468657461ULL;
    Rng rng(derive_seed(instance_seed, kThetaStream));
    std::vector<double> theta(static_cast<std::size_t>(m));
    for (auto &t : theta) {
        t = 2.0 * std::numbers::pi * uniform01(rng);
    }
    return theta;
}

// ---------------------------------------------------------------------------
// Campaigns.

struct MethodResult {
    std::string label;
    OptimizerConfig config;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    RelativeError relative{};
    double overlap = 0.0;
    int iterations = 0;
    std::uint64_t preparations = 0;
    OptimizerTrace trace;
};

struct InstanceResult {
    int index = 0;
    ProblemInstance instance;
    std::vector<double> theta0;
    std::vector<MethodResult> methods;

    double e_opt() const { return instance.ground->energy; }
};

struct MethodAggregate {
    std::string label;
    double mean_final_loss = 0.0;
    double mean_relative_error = 0.0;
    double mean_overlap = 0.0;
    double mean_preparations = 0.0;
};

struct RunSummary {
    std::vector<InstanceResult> instances;
    std::vector<MethodAggregate> aggregates;
};

/// Runs every configured method on one instance from a shared theta_0.
inline InstanceResult run_instance(const ExperimentConfig &config, int index) {
    const std::uint64_t seed = config.problem.instance_seed(index);
    InstanceResult r{index,
                     with_ground(random_instance(config.problem.kind, config.problem.size, seed,
                                                 config.problem.options),
                                 config.degeneracy_tol),
                     {},
                     {}};
    const auto circuit = build_ansatz(config.ansatz.for_qubits(r.instance.num_qubits()));
    r.theta0 = initial_angles(circuit.param_count(), seed);
    const auto labels = method_labels(config.methods);
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
        OptimizerConfig oc = config.methods[k];
        oc.seed = derive_seed(oc.seed, seed);
        MethodResult mr;
        mr.label = labels[k];
        mr.config = config.methods[k];
        mr.trace = run(oc, circuit, r.instance.hamiltonian, r.theta0);
        mr.initial_loss = mr.trace.records.front().loss;
        mr.final_loss = mr.trace.final_loss();
        mr.relative = relative_error(mr.final_loss, r.e_opt());
        mr.overlap = overlap_with_optimal(circuit.evaluate(mr.trace.final_theta), r.instance);
        mr.iterations = oc.iterations;
        mr.preparations = mr.trace.preparations();
        r.methods.push_back(std::move(mr));
    }
    return r;
}

/// Means over instances, summed in instance order.
inline std::vector<MethodAggregate> aggregate(const std::vector<InstanceResult> &instances) {
    std::vector<MethodAggregate> out;
    if (instances.empty()) {
        return out;
    }
    const auto count = static_cast<double>(instances.size());
    for (std::size_t k = 0; k < instances.front().methods.size(); ++k) {
        MethodAggregate a;
        a.label = instances.front().methods[k].label;
        for (const auto &inst : instances) {
            const auto &m = inst.methods[k];
            a.mean_final_loss += m.final_loss;
            a.mean_relative_error += m.relative.value;
            a.mean_overlap += m.overlap;
            a.mean_preparations += static_cast<double>(m.preparations);
        }
        a.mean_final_loss /= count;
        a.mean_relative_error /= count;
        a.mean_overlap /= count;
        a.mean_preparations /= count;
        out.push_back(a);
    }
    return out;
}

/// In-memory campaign: every instance, every method.
inline RunSummary run_campaign(const ExperimentConfig &config) {
    config.validate();
    RunSummary s;
    for (int i = 0; i < config.problem.count; ++i) {
        s.instances.push_back(run_instance(config, i));
    }
    s.aggregates = aggregate(s.instances);
    return s;
}

// ---------------------------------------------------------------------------
// Fisher analyses.

struct DistanceHistogram {
    int measurement_layers = 0;
    std::vector<double> distances;
    double mean = 0.0;
};

/// ||F_C - F_Q / 2||_F over `bases` random bases per measurement depth 1..max_layers.
inline std::vector<DistanceHistogram> distance_study(const AnsatzSpec &spec, std::span<const double> theta,
                                                     int max_layers, int bases, std::uint64_t seed) {
    if (max_layers < 1 || bases < 1) {
        throw std::invalid_argument("distance study needs at least one layer and one basis");
    }
    const auto circuit = build_ansatz(spec);
    const Matrix fq = qfim_exact(circuit, theta).entries;
    ResourceCounter scratch;
    std::vector<DistanceHistogram> out;
    for (int layers = 1; layers <= max_layers; ++layers) {
        DistanceHistogram h{layers, {}, 0.0};
        const BasisArchitecture arch{layers, spec.family, spec.connectivity};
        const std::uint64_t layer_seed = derive_seed(seed, static_cast<std::uint64_t>(layers));
        for (int b = 0; b < bases; ++b) {
            const auto basis = arch.sample(spec.num_qubits, derive_seed(layer_seed, static_cast<std::uint64_t>(b)));
            const double d = fisher_distance(cfim(circuit, theta, basis, scratch).entries, fq);
            h.distances.push_back(d);
            h.mean += d;
        }
        h.mean /= static_cast<double>(bases);
        out.push_back(std::move(h));
    }
    return out;
}

struct RankRow {
    int trial = 0;
    int rank_quantum = 0;
    int rank_z = 0;
    int rank_random = 0;
    int m = 0;
};

/// Ranks of F_Q, the Z-basis CFIM and one random-basis CFIM at random theta.
inline std::vector<RankRow> rank_study(const AnsatzSpec &spec, int trials, int basis_layers, std::uint64_t seed,
                                       double tol = 1e-8) {
    if (trials < 1) {
        throw std::invalid_argument("rank study needs at least one trial");
    }
    const auto circuit = build_ansatz(spec);
    const int m = circuit.param_count();
    const BasisArchitecture arch{basis_layers, spec.family, spec.connectivity};
    const auto z = MeasurementBasis::computational(spec.num_qubits);
    ResourceCounter scratch;
    std::vector<RankRow> rows;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(t));
        const auto theta = initial_angles(m, s);
        const auto basis = arch.sample(spec.num_qubits, derive_seed(s, 1));
        rows.push_back({t, rank_tol(qfim_exact(circuit, theta).entries, tol),
                        rank_tol(cfim(circuit, theta, z, scratch).entries, tol),
                        rank_tol(cfim(circuit, theta, basis, scratch).entries, tol), m});
    }
    return rows;
}

struct ConvergenceComparison {
    ProblemInstance instance;
    std::vector<double> theta0;
    /// RNG, QNG and ZNG, in that order.
    std::vector<OptimizerTrace> traces;
};

/// RNG vs QNG vs fixed Z-basis natural gradient on the J = h = 1 Heisenberg chain.
inline ConvergenceComparison heisenberg_comparison(int num_qubits, const AnsatzChoice &ansatz, double eta,
                                                   int iterations, std::uint64_t seed) {
    ConvergenceComparison c{with_ground(random_instance(ProblemKind::Heisenberg, num_qubits, seed)), {}, {}};
    const auto circuit = build_ansatz(ansatz.for_qubits(num_qubits));
    c.theta0 = initial_angles(circuit.param_count(), seed);
    for (Method method : {Method::RNG, Method::QNG, Method::ZNG}) {
        OptimizerConfig oc;
        oc.method = method;
        oc.eta = eta;
        oc.iterations = iterations;
        oc.rng_basis = default_rng_basis(ansatz);
        oc.seed = seed;
        c.traces.push_back(run(oc, circuit, c.instance.hamiltonian, c.theta0));
    }
    return c;
}

struct FisherAnalysis {
    std::vector<DistanceHistogram> distances;
    std::vector<RankRow> ranks;
    ConvergenceComparison heisenberg;
};

inline FisherAnalysis analyze_fisher(const AnalysisOptions &opt) {
    const auto spec = opt.ansatz.for_qubits(opt.num_qubits);
    const auto theta = initial_angles(spec.param_count(), derive_seed(opt.seed, 0));
    const int basis_layers = opt.rank_basis_layers > 0 ? opt.rank_basis_layers : std::max(1, spec.layers - 1);
    return {distance_study(spec, theta, opt.max_measurement_layers, opt.bases_per_layer, derive_seed(opt.seed, 1)),
            rank_study(spec, opt.rank_trials, basis_layers, derive_seed(opt.seed, 2)),
            heisenberg_comparison(opt.heisenberg_qubits, default_ansatz_for(ProblemKind::Heisenberg),
                                  opt.heisenberg_eta, opt.heisenberg_iterations, derive_seed(opt.seed, 3))};
}

}  // namespace natgrad
