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
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "natgrad/errors.hpp"
#include "natgrad/statevector.hpp"

namespace natgrad {

/// c * P_{n-1} ... P_1 P_0. `ops[q]` acts on qubit q.
class PauliString {
   public:
    PauliString(double coefficient, std::vector<Pauli> ops) : coefficient_(coefficient), ops_(std::move(ops)) {
        if (!std::isfinite(coefficient_)) {
            throw std::invalid_argument("Pauli coefficient must be finite");
        }
        if (ops_.empty()) {
            throw std::invalid_argument("Pauli string must act on at least one qubit");
        }
    }

    /// Parses a label such as "XIZ". As with bitstrings, the rightmost character is qubit 0.
    static PauliString from_label(double coefficient, std::string_view label) {
        std::vector<Pauli> ops(label.size());
        for (std::size_t k = 0; k < label.size(); ++k) {
            const std::size_t q = label.size() - 1 - k;
            switch (label[k]) {
                case 'I':
                case '_':
                    ops[q] = Pauli::I;
                    break;
                case 'X':
                    ops[q] = Pauli::X;
                    break;
                case 'Y':
                    ops[q] = Pauli::Y;
                    break;
                case 'Z':
                    ops[q] = Pauli::Z;
                    break;
                default:
                    throw std::invalid_argument("bad Pauli label character '" + std::string(1, label[k]) + "'");
            }
        }
        return PauliString(coefficient, std::move(ops));
    }

    /// Single- or two-site string on n qubits, identity elsewhere.
    static PauliString sites(double coefficient, int num_qubits, std::initializer_list<std::pair<int, Pauli>> factors) {
        std::vector<Pauli> ops(static_cast<std::size_t>(num_qubits), Pauli::I);
        for (const auto &[q, p] : factors) {
            if (q < 0 || q >= num_qubits) {
                throw std::out_of_range("Pauli site out of range");
            }
            ops[static_cast<std::size_t>(q)] = p;
        }
        return PauliString(coefficient, std::move(ops));
    }

    double coefficient() const { return coefficient_; }
    int num_qubits() const { return static_cast<int>(ops_.size()); }
    const std::vector<Pauli> &ops() const { return ops_; }
    Pauli op(int q) const { return ops_[static_cast<std::size_t>(q)]; }

    std::string label() const {
        std::string s;
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
            s.push_back(pauli_char(*it));
        }
        return s;
    }

    /// Qubits carrying X or Y.
    std::uint64_t x_mask() const {
        std::uint64_t m = 0;
        for (std::size_t q = 0; q < ops_.size(); ++q) {
            if (ops_[q] == Pauli::X || ops_[q] == Pauli::Y) {
                m |= std::uint64_t{1} << q;
            }
        }
        return m;
    }

    /// Qubits carrying Z or Y.
    std::uint64_t z_mask() const {
        std::uint64_t m = 0;
        for (std::size_t q = 0; q < ops_.size(); ++q) {
            if (ops_[q] == Pauli::Z || ops_[q] == Pauli::Y) {
                m |= std::uint64_t{1} << q;
            }
        }
        return m;
    }

    int y_count() const {
        int c = 0;
        for (auto p : ops_) {
            c += p == Pauli::Y ? 1 : 0;
        }
        return c;
    }

    bool is_diagonal() const { return x_mask() == 0; }

   private:
    double coefficient_;
    std::vector<Pauli> ops_;
};

namespace detail {

/// i^k for integer k.
inline Complex i_power(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0:
            return {1.0, 0.0};
        case 1:
            return {0.0, 1.0};
        case 2:
            return {-1.0, 0.0};
        default:
            return {0.0, -1.0};
    }
}

inline int parity(std::uint64_t x) { return __builtin_popcountll(x) & 1; }

}  // namespace detail

/// c <psi|P|psi>. Uses P|b> = i^{#Y} (-1)^{|b & z|} |b ^ x>.
inline double expectation_pauli_string(const Statevector &state, const PauliString &p) {
    if (p.num_qubits() != state.num_qubits()) {
        throw DimensionError("Pauli string length " + std::to_string(p.num_qubits()) + " does not match " +
                             std::to_string(state.num_qubits()) + " qubits");
    }
    const std::uint64_t x = p.x_mask();
    const std::uint64_t z = p.z_mask();
    const auto a = state.amplitudes();
    Complex acc{0.0, 0.0};
    for (std::uint64_t b = 0; b < a.size(); ++b) {
        const Complex term = std::conj(a[b ^ x]) * a[b];
        acc += detail::parity(b & z) ? -term : term;
    }
    acc *= detail::i_power(p.y_count());
    if (std::abs(acc.imag()) > 1e-10) {
        throw std::logic_error("Pauli expectation has a non-negligible imaginary part");
    }
    return p.coefficient() * acc.real();
}

}  // namespace natgrad
