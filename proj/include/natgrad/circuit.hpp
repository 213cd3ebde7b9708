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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "natgrad/errors.hpp"
#include "natgrad/random.hpp"
#include "natgrad/statevector.hpp"

namespace natgrad {

/// exp(-i theta_param sigma_axis / 2); the generator sigma/2 has eigenvalues +-r, r = 1/2.
struct PauliRotation {
    Pauli axis;
    int qubit;
    int param;
    double generator_eigenvalue = 0.5;
};

enum class FixedKind { CNOT, CZ, H };

/// Parameter-free gate. For CNOT `q0` is the control; H ignores `q1`.
struct FixedGate {
    FixedKind kind;
    int q0;
    int q1 = -1;
};

using Gate = std::variant<PauliRotation, FixedGate>;

/// Ordered gate list acting on |0...0>. Every parameter drives exactly one rotation.
class ParameterizedCircuit {
   public:
    explicit ParameterizedCircuit(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw SizeError("circuit qubit count out of range");
        }
    }

    /// Validating constructor for deserialized gate lists.
    ParameterizedCircuit(int num_qubits, std::vector<Gate> gates) : ParameterizedCircuit(num_qubits) {
        int max_param = -1;
        for (const auto &g : gates) {
            if (const auto *r = std::get_if<PauliRotation>(&g)) {
                max_param = std::max(max_param, r->param);
            }
        }
        param_gate_.assign(static_cast<std::size_t>(max_param + 1), kUnassigned);
        for (std::size_t k = 0; k < gates.size(); ++k) {
            std::visit([this](const auto &g) { check_gate(g); }, gates[k]);
            if (const auto *r = std::get_if<PauliRotation>(&gates[k])) {
                if (r->param < 0) {
                    throw std::invalid_argument("negative parameter index");
                }
                auto &slot = param_gate_[static_cast<std::size_t>(r->param)];
                if (slot != kUnassigned) {
                    throw std::invalid_argument("parameter " + std::to_string(r->param) + " drives two gates");
                }
                slot = k;
            }
        }
        for (std::size_t p = 0; p < param_gate_.size(); ++p) {
            if (param_gate_[p] == kUnassigned) {
                throw std::invalid_argument("parameter " + std::to_string(p) + " drives no gate");
            }
        }
        gates_ = std::move(gates);
    }

    /// Appends a rotation with a fresh parameter and returns its index.
    int add_rotation(Pauli axis, int qubit) {
        PauliRotation r{axis, qubit, param_count(), 0.5};
        check_gate(r);
        param_gate_.push_back(gates_.size());
        gates_.emplace_back(r);
        return r.param;
    }

    void add_fixed(FixedKind kind, int q0, int q1 = -1) {
        FixedGate g{kind, q0, q1};
        check_gate(g);
        gates_.emplace_back(g);
    }

    int num_qubits() const { return num_qubits_; }
    int param_count() const { return static_cast<int>(param_gate_.size()); }
    const std::vector<Gate> &gates() const { return gates_; }

    /// Position in gates() of the rotation driven by `param`.
    std::size_t gate_of_param(int param) const { return param_gate_.at(static_cast<std::size_t>(param)); }

    const PauliRotation &rotation_of_param(int param) const {
        return std::get<PauliRotation>(gates_[gate_of_param(param)]);
    }

    bool all_half_generators() const {
        for (const auto &g : gates_) {
            if (const auto *r = std::get_if<PauliRotation>(&g); r && r->generator_eigenvalue != 0.5) {
                return false;
            }
        }
        return true;
    }

    void check_params(std::span<const double> theta) const {
        if (theta.size() != param_gate_.size()) {
            throw DimensionError("expected " + std::to_string(param_gate_.size()) + " parameters, got " +
                                 std::to_string(theta.size()));
        }
    }

    /// Applies gate `k` with angles `theta` (no length check).
    void apply_gate(Statevector &state, std::size_t k, std::span<const double> theta) const {
        const Gate &g = gates_[k];
        if (const auto *r = std::get_if<PauliRotation>(&g)) {
            state.apply_rotation(r->axis, r->qubit, theta[static_cast<std::size_t>(r->param)]);
            return;
        }
        const auto &f = std::get<FixedGate>(g);
        switch (f.kind) {
            case FixedKind::CNOT:
                state.apply_cnot(f.q0, f.q1);
                break;
            case FixedKind::CZ:
                state.apply_cz(f.q0, f.q1);
                break;
            case FixedKind::H:
                state.apply(SingleQubitUnitary::hadamard(), f.q0);
                break;
        }
    }

    /// Applies gates [first, last) in order.
    void apply_range(Statevector &state, std::size_t first, std::size_t last, std::span<const double> theta) const {
        for (std::size_t k = first; k < last; ++k) {
            apply_gate(state, k, theta);
        }
    }

    void apply(Statevector &state, std::span<const double> theta) const {
        check_params(theta);
        if (state.num_qubits() != num_qubits_) {
            throw DimensionError("state and circuit qubit counts differ");
        }
        apply_range(state, 0, gates_.size(), theta);
    }

    /// U(theta)|0...0>.
    Statevector evaluate(std::span<const double> theta) const {
        check_params(theta);
        Statevector s = Statevector::zero(num_qubits_);
        apply_range(s, 0, gates_.size(), theta);
        return s;
    }

   private:
    static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

    void check_qubit(int q) const {
        if (q < 0 || q >= num_qubits_) {
            throw std::out_of_range("gate qubit " + std::to_string(q) + " out of range");
        }
    }
    void check_gate(const PauliRotation &r) const {
        check_qubit(r.qubit);
        if (r.axis == Pauli::I) {
            throw std::invalid_argument("rotation axis must be X, Y or Z");
        }
        if (!(r.generator_eigenvalue > 0.0)) {
            throw std::invalid_argument("generator eigenvalue must be positive");
        }
    }
    void check_gate(const FixedGate &f) const {
        check_qubit(f.q0);
        if (f.kind != FixedKind::H) {
            check_qubit(f.q1);
            if (f.q0 == f.q1) {
                throw std::invalid_argument("two-qubit gate needs distinct qubits");
            }
        }
    }

    int num_qubits_;
    std::vector<Gate> gates_;
    std::vector<std::size_t> param_gate_;
};

inline Statevector evaluate(const ParameterizedCircuit &circuit, std::span<const double> theta) {
    return circuit.evaluate(theta);
}

enum class AnsatzFamily {
    /// Per layer: Ry, Rz on every qubit, then a CNOT entangler.
    RyRzCnot,
    /// Initial Ry on every qubit, then per layer a CZ entangler followed by Ry on every qubit.
    RyCz,
};

enum class Connectivity { Ring, AllToAll };

struct AnsatzSpec {
    AnsatzFamily family = AnsatzFamily::RyRzCnot;
    int num_qubits = 2;
    int layers = 1;
    Connectivity connectivity = Connectivity::Ring;
    /// Second rotation of the RyRz-CNOT layer. Z by default; X selects the Ry-Rx variant.
    Pauli second_axis = Pauli::Z;

    int param_count() const {
        return family == AnsatzFamily::RyRzCnot ? 2 * num_qubits * layers : (layers + 1) * num_qubits;
    }
};

namespace detail {

/// CNOT control/target pairs for one entangling layer.
/// Ring: (0,1),(2,3),... then (1,2),(3,4),... then the wrap-around (n-1,0) for n >= 3.
inline std::vector<std::pair<int, int>> cnot_pairs(int n, Connectivity c) {
    std::vector<std::pair<int, int>> pairs;
    if (c == Connectivity::AllToAll) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                pairs.emplace_back(i, j);
            }
        }
        return pairs;
    }
    for (int start : {0, 1}) {
        for (int i = start; i + 1 < n; i += 2) {
            pairs.emplace_back(i, i + 1);
        }
    }
    if (n >= 3) {
        pairs.emplace_back(n - 1, 0);
    }
    return pairs;
}

/// CZ pairs: the ladder (0,1),(1,2),...,(n-2,n-1) plus (n-1,0) for n >= 3, or all pairs.
inline std::vector<std::pair<int, int>> cz_pairs(int n, Connectivity c) {
    if (c == Connectivity::AllToAll) {
        return cnot_pairs(n, c);
    }
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i + 1 < n; ++i) {
        pairs.emplace_back(i, i + 1);
    }
    if (n >= 3) {
        pairs.emplace_back(n - 1, 0);
    }
    return pairs;
}

inline void validate(const AnsatzSpec &spec) {
    if (spec.num_qubits < 1 || spec.num_qubits > kMaxQubits) {
        throw SizeError("ansatz qubit count out of range");
    }
    if (spec.layers < 1) {
        throw std::invalid_argument("ansatz needs at least one layer");
    }
    if (spec.second_axis == Pauli::I) {
        throw std::invalid_argument("second rotation axis must be X, Y or Z");
    }
}

/// Builds the family's gate layout; `axis_for` picks the axis of each successive rotation.
template <typename AxisFn>
ParameterizedCircuit build_layout(const AnsatzSpec &spec, AxisFn &&axis_for) {
    validate(spec);
    const int n = spec.num_qubits;
    ParameterizedCircuit c(n);
    if (spec.family == AnsatzFamily::RyRzCnot) {
        const auto pairs = cnot_pairs(n, spec.connectivity);
        for (int layer = 0; layer < spec.layers; ++layer) {
            for (int q = 0; q < n; ++q) {
                c.add_rotation(axis_for(Pauli::Y), q);
                c.add_rotation(axis_for(spec.second_axis), q);
            }
            for (const auto &[ctl, tgt] : pairs) {
                c.add_fixed(FixedKind::CNOT, ctl, tgt);
            }
        }
    } else {
        const auto pairs = cz_pairs(n, spec.connectivity);
        for (int q = 0; q < n; ++q) {
            c.add_rotation(axis_for(Pauli::Y), q);
        }
        for (int layer = 0; layer < spec.layers; ++layer) {
            for (const auto &[a, b] : pairs) {
                c.add_fixed(FixedKind::CZ, a, b);
            }
            for (int q = 0; q < n; ++q) {
                c.add_rotation(axis_for(Pauli::Y), q);
            }
        }
    }
    return c;
}

}  // namespace detail

inline ParameterizedCircuit build_ansatz(const AnsatzSpec &spec) {
    return detail::build_layout(spec, [](Pauli axis) { return axis; });
}

/// V(phi): a basis-change circuit and its angles.
struct MeasurementBasis {
    ParameterizedCircuit circuit;
    std::vector<double> angles;

    /// Computational-basis measurement (V = identity).
    static MeasurementBasis computational(int num_qubits) { return {ParameterizedCircuit(num_qubits), {}}; }
};

/// Hardware-efficient random basis: the layout of `family` with every rotation
/// axis drawn uniformly from {X, Y, Z} and angles uniform on [0, 2 pi).
inline MeasurementBasis sample_random_measurement(int num_qubits, int layers, std::uint64_t seed,
                                                  AnsatzFamily family = AnsatzFamily::RyRzCnot,
                                                  Connectivity connectivity = Connectivity::Ring) {
    if (layers < 1) {
        throw std::invalid_argument("random measurement needs at least one layer");
    }
    Rng rng(seed);
    constexpr Pauli kAxes[3] = {Pauli::X, Pauli::Y, Pauli::Z};
    AnsatzSpec spec{family, num_qubits, layers, connectivity, Pauli::Z};
    auto circuit = detail::build_layout(spec, [&rng, &kAxes](Pauli) { return kAxes[uniform_below(rng, 3)]; });
    std::vector<double> angles(static_cast<std::size_t>(circuit.param_count()));
    for (auto &a : angles) {
        a = 2.0 * std::numbers::pi * uniform01(rng);
    }
    return {std::move(circuit), std::move(angles)};
}

/// Statevector V(phi) U(theta)|0>.
inline Statevector evaluate_in_basis(const ParameterizedCircuit &circuit, std::span<const double> theta,
                                     const MeasurementBasis &basis) {
    if (basis.circuit.num_qubits() != circuit.num_qubits()) {
        throw DimensionError("measurement basis acts on a different number of qubits");
    }
    basis.circuit.check_params(basis.angles);
    Statevector s = circuit.evaluate(theta);
    basis.circuit.apply(s, basis.angles);
    return s;
}

/// p_l = |<l| V(phi) U(theta) |0>|^2.
inline std::vector<double> probabilities_under_measurement(const ParameterizedCircuit &circuit,
                                                           std::span<const double> theta,
                                                           const MeasurementBasis &basis) {
    return probabilities(evaluate_in_basis(circuit, theta, basis));
}

}  // namespace natgrad
