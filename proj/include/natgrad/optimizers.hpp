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
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "natgrad/circuit.hpp"
#include "natgrad/fisher.hpp"
#include "natgrad/hamiltonian.hpp"
#include "natgrad/linalg.hpp"
#include "natgrad/random.hpp"

namespace natgrad {

/// ZNG is natural gradient with the CFIM of a fixed computational-basis
/// measurement; it exists to show how that choice stalls.
enum class Method { GD, QNG, RNG, SCQNG, ZNG };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::GD:
            return "GD";
        case Method::QNG:
            return "QNG";
        case Method::RNG:
            return "RNG";
        case Method::SCQNG:
            return "SCQNG";
        case Method::ZNG:
            return "ZNG";
    }
    return "?";
}

inline Method method_from_string(std::string_view s) {
    if (s == "GD" || s == "gd") return Method::GD;
    if (s == "QNG" || s == "qng") return Method::QNG;
    if (s == "RNG" || s == "rng") return Method::RNG;
    if (s == "SCQNG" || s == "scqng" || s == "SC-QNG") return Method::SCQNG;
    if (s == "ZNG" || s == "zng") return Method::ZNG;
    throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

struct OptimizerConfig {
    Method method = Method::GD;
    double eta = 0.05;
    int iterations = 100;
    double pinv_cutoff = kDefaultPinvCutoff;
    /// Random bases for RNG.
    BasisArchitecture rng_basis{};
    /// SCQNG subset size; 0 picks ceil(m / 2).
    int subset_size = 0;
    /// SCQNG: evaluate the gradient on every coordinate instead of only the subset.
    bool scqng_full_gradient = false;
    /// Divide the step by ||F^{+1/2} g|| (||g|| for GD).
    bool normalize_step = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(eta > 0.0) || !std::isfinite(eta)) {
            throw std::invalid_argument("eta must be positive");
        }
        if (iterations < 0) {
            throw std::invalid_argument("iterations must be non-negative");
        }
        if (!(pinv_cutoff > 0.0)) {
            throw std::invalid_argument("pinv_cutoff must be positive");
        }
        if (subset_size < 0) {
            throw std::invalid_argument("subset_size must be non-negative");
        }
    }

    int resolved_subset_size(int m) const {
        const int l = subset_size == 0 ? (m + 1) / 2 : subset_size;
        if (l < 1 || l > m) {
            throw std::invalid_argument("subset_size must lie in [1, m]");
        }
        return l;
    }
};

struct IterationRecord {
    int iteration = 0;
    /// Loss at the iterate the step was computed from.
    double loss_before = 0.0;
    /// Loss after the update (record 0: the initial loss).
    double loss = 0.0;
    double grad_norm = 0.0;
    double step_norm = 0.0;
    std::uint64_t preparations = 0;
    std::string diagnostics;
};

struct OptimizerTrace {
    Method method = Method::GD;
    std::vector<IterationRecord> records;
    std::vector<double> final_theta;

    double final_loss() const { return records.back().loss; }
    std::uint64_t preparations() const { return records.back().preparations; }
};

/// Delta theta = -eta F+ g (GD: -eta g), F+ the cutoff pseudoinverse.
inline Vector compute_step(Method method, const Vector &gradient, const std::optional<Matrix> &info, double eta,
                           double cutoff = kDefaultPinvCutoff, bool normalize = false) {
    if (!(eta > 0.0)) {
        throw std::invalid_argument("eta must be positive");
    }
    if (method == Method::GD) {
        if (normalize) {
            const double n = gradient.norm();
            return n > 0.0 ? Vector(-eta * gradient / n) : Vector(Vector::Zero(gradient.size()));
        }
        return -eta * gradient;
    }
    if (!info) {
        throw std::invalid_argument(to_string(method) + " needs an information matrix");
    }
    if (info->rows() != gradient.size() || info->cols() != gradient.size()) {
        throw DimensionError("information matrix and gradient sizes differ");
    }
    if (!(cutoff > 0.0)) {
        throw std::invalid_argument("cutoff must be positive");
    }
    const auto d = eigh(*info);
    Vector step = Vector::Zero(gradient.size());
    double metric_sq = 0.0;
    for (Eigen::Index k = 0; k < d.eigenvalues.size(); ++k) {
        const double lambda = d.eigenvalues(k);
        if (lambda <= cutoff) {
            continue;
        }
        const double c = d.eigenvectors.col(k).dot(gradient);
        step.noalias() += (c / lambda) * d.eigenvectors.col(k);
        metric_sq += c * c / lambda;
    }
    if (normalize) {
        const double n = std::sqrt(metric_sq);
        return n > 0.0 ? Vector(-eta * step / n) : Vector(Vector::Zero(gradient.size()));
    }
    return -eta * step;
}

/// Uniform size-l subset of {0, ..., m-1}, ascending.
inline std::vector<int> sample_subset(int m, int l, std::uint64_t seed) {
    if (l < 1 || l > m) {
        throw std::invalid_argument("subset size must lie in [1, m]");
    }
    std::vector<int> pool(static_cast<std::size_t>(m));
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(seed);
    // Partial Fisher-Yates.
    for (int i = 0; i < l; ++i) {
        const auto j = i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(m - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(l));
    std::sort(pool.begin(), pool.end());
    return pool;
}

namespace detail {
inline void check_coverage_args(int m, int l, int k) {
    if (m < 0 || l < 0 || k < 0) {
        throw std::invalid_argument("coverage arguments must be non-negative");
    }
    if (l + k > m) {
        throw std::invalid_argument("coverage requires l + k <= m");
    }
}

inline std::uint64_t binomial(int n, int r) {
    std::uint64_t c = 1;
    for (int i = 1; i <= r; ++i) {
        // Exact: c * (n - r + i) is divisible by i at every step.
        c = c * static_cast<std::uint64_t>(n - r + i) / static_cast<std::uint64_t>(i);
    }
    return c;
}
}  // namespace detail

/// Probability that a fixed l-subset lies inside a uniform (l + k)-subset of [m]:
/// (l + k)! (m - l)! / (k! m!).
inline double subset_coverage_probability(int m, int l, int k) {
    detail::check_coverage_args(m, l, k);
    const double log_p = std::lgamma(l + k + 1.0) + std::lgamma(m - l + 1.0) - std::lgamma(k + 1.0) -
                         std::lgamma(m + 1.0);
    // lgamma rounding can land a hair above 1 when l + k = m.
    return std::min(1.0, std::exp(log_p));
}

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    friend bool operator==(const Rational &, const Rational &) = default;
};

/// The same probability as a reduced fraction C(m - l, k) / C(m, l + k); m <= 60.
inline Rational subset_coverage_probability_exact(int m, int l, int k) {
    detail::check_coverage_args(m, l, k);
    if (m > 60) {
        throw std::invalid_argument("exact coverage supports m <= 60");
    }
    const std::uint64_t num = detail::binomial(m - l, k);
    const std::uint64_t den = detail::binomial(m, l + k);
    const std::uint64_t g = std::gcd(num, den);
    return {num / g, den / g};
}

/// Runs K updates from theta0. Loss evaluations used only for the trace are not
/// counted as preparations.
inline OptimizerTrace run(const OptimizerConfig &config, const ParameterizedCircuit &circuit,
                          const PauliHamiltonian &h, std::span<const double> theta0) {
    config.validate();
    circuit.check_params(theta0);
    if (h.num_qubits() != circuit.num_qubits()) {
        throw DimensionError("Hamiltonian and circuit qubit counts differ");
    }
    const int m = circuit.param_count();
    const int l = config.method == Method::SCQNG ? config.resolved_subset_size(m) : 0;
    const auto computational = MeasurementBasis::computational(circuit.num_qubits());

    OptimizerTrace trace;
    trace.method = config.method;
    std::vector<double> theta(theta0.begin(), theta0.end());
    ResourceCounter counter;
    double current = loss(h, circuit.evaluate(theta));
    trace.records.push_back({0, current, current, 0.0, 0.0, 0, ""});

    for (int it = 1; it <= config.iterations; ++it) {
        const std::uint64_t stream = derive_seed(config.seed, static_cast<std::uint64_t>(it));
        Vector grad;
        std::optional<Matrix> info;
        std::string diag;
        switch (config.method) {
            case Method::GD:
                grad = gradient_parameter_shift(circuit, h, theta, counter);
                break;
            case Method::QNG:
                grad = gradient_parameter_shift(circuit, h, theta, counter);
                info = qfim_parameter_shift(circuit, theta, counter).entries;
                break;
            case Method::RNG: {
                grad = gradient_parameter_shift(circuit, h, theta, counter);
                const auto basis = config.rng_basis.sample(circuit.num_qubits(), stream);
                info = cfim(circuit, theta, basis, counter).entries;
                diag = "basis_seed=" + std::to_string(stream);
                break;
            }
            case Method::SCQNG: {
                const auto subset = sample_subset(m, l, stream);
                grad = config.scqng_full_gradient ? gradient_parameter_shift(circuit, h, theta, counter)
                                                  : gradient_parameter_shift_subset(circuit, h, theta, subset, counter);
                info = reduced_qfim(circuit, theta, subset, counter).entries;
                diag = "subset=";
                for (std::size_t i = 0; i < subset.size(); ++i) {
                    diag += (i ? ";" : "") + std::to_string(subset[i]);
                }
                break;
            }
            case Method::ZNG:
                grad = gradient_parameter_shift(circuit, h, theta, counter);
                info = cfim(circuit, theta, computational, counter).entries;
                break;
        }
        const Vector step = compute_step(config.method, grad, info, config.eta, config.pinv_cutoff,
                                         config.normalize_step);
        for (int j = 0; j < m; ++j) {
            theta[static_cast<std::size_t>(j)] += step(j);
        }
        const double before = current;
        current = loss(h, circuit.evaluate(theta));
        trace.records.push_back(
            {it, before, current, grad.norm(), step.norm(), counter.state_preparations, std::move(diag)});
    }
    trace.final_theta = std::move(theta);
    return trace;
}

}  // namespace natgrad
