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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "natgrad/circuit.hpp"
#include "natgrad/errors.hpp"
#include "natgrad/hamiltonian.hpp"
#include "natgrad/linalg.hpp"
#include "natgrad/random.hpp"
#include "natgrad/statevector.hpp"

namespace natgrad {

/// Counts the distinct state preparations a hardware run would need.
struct ResourceCounter {
    std::uint64_t state_preparations = 0;
    void add(std::uint64_t n) { state_preparations += n; }
};

inline constexpr double kDefaultProbFloor = 1e-12;

enum class FisherKind { Quantum, Classical, ReducedQuantum };

struct FisherMatrix {
    FisherKind kind = FisherKind::Quantum;
    Matrix entries;
    /// Classical: a short description of the measurement basis.
    std::string basis;
    /// ReducedQuantum: the sampled parameter subset, ascending.
    std::vector<int> subset;

    int m() const { return static_cast<int>(entries.rows()); }
};

namespace detail {

inline void require_half_generators(const ParameterizedCircuit &c) {
    if (!c.all_half_generators()) {
        throw std::invalid_argument("two-term parameter shift requires generator eigenvalues r = 1/2");
    }
}

inline std::vector<double> shifted(std::span<const double> theta, int i, double s) {
    std::vector<double> t(theta.begin(), theta.end());
    t[static_cast<std::size_t>(i)] += s;
    return t;
}

inline std::vector<int> all_params(int m) {
    std::vector<int> v(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        v[static_cast<std::size_t>(i)] = i;
    }
    return v;
}

inline std::vector<int> checked_subset(std::span<const int> subset, int m) {
    if (subset.empty()) {
        throw std::invalid_argument("parameter subset is empty");
    }
    std::vector<int> s(subset.begin(), subset.end());
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
        throw std::invalid_argument("parameter subset has duplicates");
    }
    if (s.front() < 0 || s.back() >= m) {
        throw std::out_of_range("parameter subset index out of range");
    }
    return s;
}

/// <bra| sigma_axis(qubit) |ket>.
inline Complex pauli_matrix_element(const Statevector &bra, Pauli axis, int qubit, const Statevector &ket) {
    const auto p = bra.amplitudes();
    const auto x = ket.amplitudes();
    const std::size_t mask = std::size_t{1} << qubit;
    Complex acc{0.0, 0.0};
    switch (axis) {
        case Pauli::X:
            for (std::size_t b = 0; b < p.size(); ++b) {
                acc += std::conj(p[b]) * x[b ^ mask];
            }
            break;
        case Pauli::Y:
            // (Y x)_b = i x_{b^mask} if bit q of b is set, else -i x_{b^mask}.
            for (std::size_t b = 0; b < p.size(); ++b) {
                const Complex t = std::conj(p[b]) * x[b ^ mask];
                acc += (b & mask) ? Complex(-t.imag(), t.real()) : Complex(t.imag(), -t.real());
            }
            break;
        case Pauli::Z:
            for (std::size_t b = 0; b < p.size(); ++b) {
                const Complex t = std::conj(p[b]) * x[b];
                acc += (b & mask) ? -t : t;
            }
            break;
        case Pauli::I:
            return inner_product(bra, ket);
    }
    return acc;
}

/// QFIM block over `params` (ascending) from the four shifted fidelities
///   F_ij = -1/2 [f(+,+) - f(+,-) - f(-,+) + f(-,-)],  f(a,b) = |<psi(theta)|psi(theta + a e_i + b e_j)>|^2,
/// with a, b = +-pi/2. Entries outside params x params are zero.
///
/// The suffix after the later shifted gate cancels in each overlap, so with
/// P_k the state just before gate k and g(i) < g(j):
///   <psi|psi'> = <P_g(j)| R_j(b) S(g(i), g(j)) R_i(theta_i + a) |P_g(i)>,
/// which lets one forward sweep per (i, a) serve every later j.
inline Matrix qfim_from_overlaps(const ParameterizedCircuit &circuit, std::span<const double> theta,
                                 const std::vector<int> &params) {
    const int m = circuit.param_count();
    Matrix f = Matrix::Zero(m, m);
    std::vector<int> order = params;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return circuit.gate_of_param(a) < circuit.gate_of_param(b); });

    // Prefix states before each selected rotation.
    std::vector<Statevector> prefix;
    prefix.reserve(order.size());
    {
        Statevector s = Statevector::zero(circuit.num_qubits());
        std::size_t k = 0;
        for (int p : order) {
            const std::size_t g = circuit.gate_of_param(p);
            circuit.apply_range(s, k, g, theta);
            k = g;
            prefix.push_back(s);
        }
    }

    constexpr double kHalfPi = std::numbers::pi / 2.0;
    const double c = std::cos(kHalfPi / 2.0);
    const double s = std::sin(kHalfPi / 2.0);
    for (std::size_t a_idx = 0; a_idx < order.size(); ++a_idx) {
        const int i = order[a_idx];
        const auto &ri = circuit.rotation_of_param(i);
        const std::size_t gi = circuit.gate_of_param(i);

        // Same-parameter shifts combine to +-pi, 0, 0, +-pi; R(+-pi) = -+ i sigma.
        const Complex self = pauli_matrix_element(prefix[a_idx], ri.axis, ri.qubit, prefix[a_idx]);
        const double f_pp = std::norm(self);
        const double f_mm = std::norm(-self);
        f(i, i) = -0.5 * (f_pp - 1.0 - 1.0 + f_mm);

        // fid[sa][j-slot][sb] for a, b in {+, -}.
        const std::size_t later = order.size() - a_idx - 1;
        std::vector<double> fid(4 * later, 0.0);
        for (int sa = 0; sa < 2; ++sa) {
            const double a = sa == 0 ? kHalfPi : -kHalfPi;
            Statevector x = prefix[a_idx];
            x.apply_rotation(ri.axis, ri.qubit, theta[static_cast<std::size_t>(i)] + a);
            std::size_t k = gi + 1;
            for (std::size_t b_idx = a_idx + 1; b_idx < order.size(); ++b_idx) {
                const int j = order[b_idx];
                const auto &rj = circuit.rotation_of_param(j);
                const std::size_t gj = circuit.gate_of_param(j);
                circuit.apply_range(x, k, gj, theta);
                k = gj;
                const Complex c0 = inner_product(prefix[b_idx], x);
                const Complex c1 = pauli_matrix_element(prefix[b_idx], rj.axis, rj.qubit, x);
                // R(b) = cos(b/2) - i sin(b/2) sigma.
                const Complex minus_i_c1{c1.imag(), -c1.real()};
                const std::size_t slot = b_idx - a_idx - 1;
                fid[4 * slot + 2 * static_cast<std::size_t>(sa) + 0] = std::norm(c * c0 + s * minus_i_c1);
                fid[4 * slot + 2 * static_cast<std::size_t>(sa) + 1] = std::norm(c * c0 - s * minus_i_c1);
            }
        }
        for (std::size_t b_idx = a_idx + 1; b_idx < order.size(); ++b_idx) {
            const int j = order[b_idx];
            const std::size_t slot = b_idx - a_idx - 1;
            const double pp = fid[4 * slot + 0], pm = fid[4 * slot + 1];
            const double mp = fid[4 * slot + 2], mm = fid[4 * slot + 3];
            const double v = -0.5 * (pp - pm - mp + mm);
            f(i, j) = v;
            f(j, i) = v;
        }
    }
    return f;
}

}  // namespace detail

/// dL/dtheta_j = 1/2 [L(theta + pi/2 e_j) - L(theta - pi/2 e_j)] for j in `subset`,
/// zero elsewhere. Costs 2 |subset| preparations.
inline Vector gradient_parameter_shift_subset(const ParameterizedCircuit &circuit, const PauliHamiltonian &h,
                                              std::span<const double> theta, std::span<const int> subset,
                                              ResourceCounter &counter) {
    circuit.check_params(theta);
    detail::require_half_generators(circuit);
    if (h.num_qubits() != circuit.num_qubits()) {
        throw DimensionError("Hamiltonian and circuit qubit counts differ");
    }
    const auto params = detail::checked_subset(subset, circuit.param_count());
    constexpr double kShift = std::numbers::pi / 2.0;
    Vector g = Vector::Zero(circuit.param_count());
    for (int j : params) {
        const double plus = loss(h, circuit.evaluate(detail::shifted(theta, j, kShift)));
        const double minus = loss(h, circuit.evaluate(detail::shifted(theta, j, -kShift)));
        g(j) = 0.5 * (plus - minus);
    }
    counter.add(2 * params.size());
    return g;
}

/// Full parameter-shift gradient; costs 2m preparations.
inline Vector gradient_parameter_shift(const ParameterizedCircuit &circuit, const PauliHamiltonian &h,
                                       std::span<const double> theta, ResourceCounter &counter) {
    if (circuit.param_count() == 0) {
        circuit.check_params(theta);
        return Vector(0);
    }
    const auto all = detail::all_params(circuit.param_count());
    return gradient_parameter_shift_subset(circuit, h, theta, all, counter);
}

struct ProbabilityJacobian {
    /// 2^n x m; column j is dp/dtheta_j.
    Matrix jacobian;
    Vector probabilities;
};

/// Shift-rule derivative of the full outcome distribution under `basis`.
/// Costs 2m + 1 preparations (shifted distributions plus the unshifted one).
inline ProbabilityJacobian probability_jacobian(const ParameterizedCircuit &circuit, std::span<const double> theta,
                                                const MeasurementBasis &basis, ResourceCounter &counter) {
    circuit.check_params(theta);
    detail::require_half_generators(circuit);
    constexpr double kShift = std::numbers::pi / 2.0;
    const int m = circuit.param_count();
    const auto p0 = probabilities_under_measurement(circuit, theta, basis);
    const auto dim = static_cast<Eigen::Index>(p0.size());
    ProbabilityJacobian out{Matrix(dim, m), Eigen::Map<const Vector>(p0.data(), dim)};
    for (int j = 0; j < m; ++j) {
        const auto plus = probabilities_under_measurement(circuit, detail::shifted(theta, j, kShift), basis);
        const auto minus = probabilities_under_measurement(circuit, detail::shifted(theta, j, -kShift), basis);
        for (Eigen::Index l = 0; l < dim; ++l) {
            out.jacobian(l, j) = 0.5 * (plus[static_cast<std::size_t>(l)] - minus[static_cast<std::size_t>(l)]);
        }
    }
    counter.add(2 * static_cast<std::uint64_t>(m) + 1);
    return out;
}

/// [F_C]_ij = sum_{l : p_l >= floor} (1/p_l) dp_l/dtheta_i dp_l/dtheta_j.
inline Matrix cfim_from_jacobian(const Matrix &jacobian, const Vector &probs, double prob_floor = kDefaultProbFloor) {
    if (!(prob_floor > 0.0)) {
        throw std::invalid_argument("prob_floor must be positive");
    }
    if (jacobian.rows() != probs.size()) {
        throw DimensionError("jacobian rows and probability count differ");
    }
    const Eigen::Index m = jacobian.cols();
    Matrix f = Matrix::Zero(m, m);
    for (Eigen::Index l = 0; l < probs.size(); ++l) {
        if (probs(l) < prob_floor) {
            continue;
        }
        const auto row = jacobian.row(l);
        f.noalias() += (1.0 / probs(l)) * row.transpose() * row;
    }
    return 0.5 * (f + f.transpose());
}

inline FisherMatrix cfim(const ParameterizedCircuit &circuit, std::span<const double> theta,
                         const MeasurementBasis &basis, ResourceCounter &counter,
                         double prob_floor = kDefaultProbFloor) {
    const auto pj = probability_jacobian(circuit, theta, basis, counter);
    FisherMatrix f;
    f.kind = FisherKind::Classical;
    f.entries = cfim_from_jacobian(pj.jacobian, pj.probabilities, prob_floor);
    f.basis = basis.circuit.gates().empty() ? "computational"
                                            : "random(" + std::to_string(basis.circuit.param_count()) + " angles)";
    return f;
}

/// [F_Q]_ij = 4 Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>] with
/// |d_i psi> = (|psi(theta + pi e_i)> - |psi(theta - pi e_i)>) / 4, exact for r = 1/2.
/// Simulator-only oracle: no preparation cost is recorded.
inline FisherMatrix qfim_exact(const ParameterizedCircuit &circuit, std::span<const double> theta) {
    circuit.check_params(theta);
    detail::require_half_generators(circuit);
    const int m = circuit.param_count();
    const Statevector psi = circuit.evaluate(theta);
    const auto dim = static_cast<Eigen::Index>(psi.dim());
    Eigen::MatrixXcd d(dim, m);
    for (int i = 0; i < m; ++i) {
        const auto plus = circuit.evaluate(detail::shifted(theta, i, std::numbers::pi));
        const auto minus = circuit.evaluate(detail::shifted(theta, i, -std::numbers::pi));
        for (Eigen::Index b = 0; b < dim; ++b) {
            d(b, i) = 0.25 * (plus[static_cast<std::size_t>(b)] - minus[static_cast<std::size_t>(b)]);
        }
    }
    const Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), dim);
    const Eigen::MatrixXcd gram = d.adjoint() * d;
    const Eigen::VectorXcd proj = d.adjoint() * v;
    const Eigen::MatrixXcd q = gram - proj * proj.adjoint();
    Matrix f = 4.0 * q.real();
    FisherMatrix out;
    out.kind = FisherKind::Quantum;
    out.entries = 0.5 * (f + f.transpose());
    return out;
}

/// Reduced QFIM: the L x L block from shifted-state fidelities, zero elsewhere.
/// Costs 2 l (l + 1) preparations: four overlaps per unordered pair, diagonal included.
inline FisherMatrix reduced_qfim(const ParameterizedCircuit &circuit, std::span<const double> theta,
                                 std::span<const int> subset, ResourceCounter &counter) {
    circuit.check_params(theta);
    detail::require_half_generators(circuit);
    const auto params = detail::checked_subset(subset, circuit.param_count());
    FisherMatrix out;
    out.kind = FisherKind::ReducedQuantum;
    out.entries = detail::qfim_from_overlaps(circuit, theta, params);
    out.subset = params;
    const auto l = static_cast<std::uint64_t>(params.size());
    counter.add(2 * l * (l + 1));
    return out;
}

/// Full QFIM from shifted-state fidelities; costs 2m(m + 1) preparations.
inline FisherMatrix qfim_parameter_shift(const ParameterizedCircuit &circuit, std::span<const double> theta,
                                         ResourceCounter &counter) {
    circuit.check_params(theta);
    if (circuit.param_count() == 0) {
        return {FisherKind::Quantum, Matrix(0, 0), {}, {}};
    }
    auto f = reduced_qfim(circuit, theta, detail::all_params(circuit.param_count()), counter);
    f.kind = FisherKind::Quantum;
    f.subset.clear();
    return f;
}

/// Symmetrized central-difference Hessian of the loss.
inline Matrix hessian_finite_difference(const ParameterizedCircuit &circuit, const PauliHamiltonian &h,
                                        std::span<const double> theta, double step = 1e-4) {
    circuit.check_params(theta);
    if (!(step > 0.0)) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    const int m = circuit.param_count();
    const auto at = [&](int i, double si, int j, double sj) {
        std::vector<double> t(theta.begin(), theta.end());
        t[static_cast<std::size_t>(i)] += si;
        t[static_cast<std::size_t>(j)] += sj;
        return loss(h, circuit.evaluate(t));
    };
    const double l0 = loss(h, circuit.evaluate(theta));
    Matrix hess(m, m);
    for (int i = 0; i < m; ++i) {
        hess(i, i) = (at(i, step, i, 0.0) - 2.0 * l0 + at(i, -step, i, 0.0)) / (step * step);
        for (int j = i + 1; j < m; ++j) {
            const double v =
                (at(i, step, j, step) - at(i, step, j, -step) - at(i, -step, j, step) + at(i, -step, j, -step)) /
                (4.0 * step * step);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    }
    return 0.5 * (hess + hess.transpose());
}

namespace detail {
inline void require_same_shape(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw DimensionError("Fisher matrices have different dimensions");
    }
}
}  // namespace detail

struct NullSpaceReport {
    bool holds = true;
    /// max v^T F_C v over eigenvectors v of F_Q with eigenvalue < tol.
    double max_violation = 0.0;
    int kernel_dimension = 0;
};

/// Checks that every (numerical) kernel direction of `fq` is also flat for `fc`.
inline NullSpaceReport null_space_containment(const Matrix &fq, const Matrix &fc, double tol = 1e-8) {
    detail::require_same_shape(fq, fc);
    const auto d = eigh(fq);
    const Matrix sym = 0.5 * (fc + fc.transpose());
    NullSpaceReport r;
    for (Eigen::Index k = 0; k < d.eigenvalues.size(); ++k) {
        if (d.eigenvalues(k) < tol) {
            const auto v = d.eigenvectors.col(k);
            r.max_violation = std::max(r.max_violation, v.dot(sym * v));
            ++r.kernel_dimension;
        }
    }
    r.holds = r.max_violation < tol;
    return r;
}

/// a <= b in the Loewner order: min eigenvalue of (b - a) >= -tol.
inline bool loewner_leq(const Matrix &a, const Matrix &b, double tol = 1e-8) {
    detail::require_same_shape(a, b);
    return min_eigenvalue(b - a) >= -tol;
}

/// ||F_C - F_Q / 2||_F.
inline double fisher_distance(const Matrix &fc, const Matrix &fq) {
    detail::require_same_shape(fc, fq);
    return (fc - 0.5 * fq).norm();
}

inline NullSpaceReport null_space_containment(const FisherMatrix &fq, const FisherMatrix &fc, double tol = 1e-8) {
    return null_space_containment(fq.entries, fc.entries, tol);
}
inline bool loewner_leq(const FisherMatrix &a, const FisherMatrix &b, double tol = 1e-8) {
    return loewner_leq(a.entries, b.entries, tol);
}
inline double fisher_distance(const FisherMatrix &fc, const FisherMatrix &fq) {
    return fisher_distance(fc.entries, fq.entries);
}

/// Shape of the random basis-change circuits.
struct BasisArchitecture {
    int layers = 1;
    AnsatzFamily family = AnsatzFamily::RyRzCnot;
    Connectivity connectivity = Connectivity::Ring;

    MeasurementBasis sample(int num_qubits, std::uint64_t seed) const {
        return sample_random_measurement(num_qubits, layers, seed, family, connectivity);
    }
};

struct TraceSearchResult {
    MeasurementBasis best;
    double best_trace = 0.0;
    /// Best trace after each trial.
    std::vector<double> running_best;
};

/// Random search for max_phi tr F_C^{M(phi)}; trial t uses derive_seed(seed, t).
inline TraceSearchResult trace_objective_search(const ParameterizedCircuit &circuit, std::span<const double> theta,
                                                const BasisArchitecture &arch, int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("trace search needs at least one trial");
    }
    ResourceCounter scratch;
    std::optional<TraceSearchResult> result;
    for (int t = 0; t < trials; ++t) {
        auto basis = arch.sample(circuit.num_qubits(), derive_seed(seed, static_cast<std::uint64_t>(t)));
        const double tr = cfim(circuit, theta, basis, scratch).entries.trace();
        if (!result) {
            result = TraceSearchResult{std::move(basis), tr, {}};
        } else if (tr > result->best_trace) {
            result->best = std::move(basis);
            result->best_trace = tr;
        }
        result->running_best.push_back(result->best_trace);
    }
    return std::move(*result);
}

/// eta F+ H F+ <= 2 F+ on the retained spectrum of F (eigenvalues > cutoff), to 1e-9.
inline bool descent_condition(const Matrix &f, const Matrix &hessian, double eta, double cutoff = kDefaultPinvCutoff) {
    if (!(eta > 0.0)) {
        throw std::invalid_argument("eta must be positive");
    }
    detail::require_same_shape(f, hessian);
    const auto d = eigh(f);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < d.eigenvalues.size(); ++k) {
        if (d.eigenvalues(k) > cutoff) {
            kept.push_back(k);
        }
    }
    if (kept.empty()) {
        return true;
    }
    const auto r = static_cast<Eigen::Index>(kept.size());
    Matrix q(f.rows(), r);
    Vector inv(r);
    for (Eigen::Index c = 0; c < r; ++c) {
        q.col(c) = d.eigenvectors.col(kept[static_cast<std::size_t>(c)]);
        inv(c) = 1.0 / d.eigenvalues(kept[static_cast<std::size_t>(c)]);
    }
    // In the eigenbasis of the range, F+ = diag(inv).
    const Matrix h_r = q.transpose() * hessian * q;
    Matrix gap = -eta * inv.asDiagonal() * h_r * inv.asDiagonal();
    gap.diagonal() += 2.0 * inv;
    return min_eigenvalue(gap) >= -1e-9;
}

}  // namespace natgrad
