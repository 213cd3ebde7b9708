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
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "natgrad/errors.hpp"
#include "natgrad/random.hpp"

namespace natgrad {

using Complex = std::complex<double>;

/// Largest register the dense simulator accepts (2^20 amplitudes, 16 MiB).
inline constexpr int kMaxQubits = 20;

enum class Pauli : std::uint8_t { I, X, Y, Z };

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

/// A 2x2 unitary, stored row-major. Construction from raw entries checks
/// U^dagger U = I to 1e-12.
class SingleQubitUnitary {
   public:
    explicit SingleQubitUnitary(const std::array<Complex, 4> &entries) : m_(entries) {
        const Complex a = std::conj(m_[0]) * m_[0] + std::conj(m_[2]) * m_[2];
        const Complex b = std::conj(m_[0]) * m_[1] + std::conj(m_[2]) * m_[3];
        const Complex d = std::conj(m_[1]) * m_[1] + std::conj(m_[3]) * m_[3];
        if (std::abs(a - 1.0) > 1e-12 || std::abs(b) > 1e-12 || std::abs(d - 1.0) > 1e-12) {
            throw std::invalid_argument("gate matrix is not unitary");
        }
    }

    static SingleQubitUnitary identity() { return trusted({1.0, 0.0, 0.0, 1.0}); }

    static SingleQubitUnitary hadamard() {
        const double s = 1.0 / std::sqrt(2.0);
        return trusted({s, s, s, -s});
    }

    static SingleQubitUnitary pauli(Pauli p) {
        const Complex i{0.0, 1.0};
        switch (p) {
            case Pauli::I:
                return identity();
            case Pauli::X:
                return trusted({0.0, 1.0, 1.0, 0.0});
            case Pauli::Y:
                return trusted({0.0, -i, i, 0.0});
            case Pauli::Z:
                return trusted({1.0, 0.0, 0.0, -1.0});
        }
        throw std::invalid_argument("unknown Pauli");
    }

    /// exp(-i angle sigma / 2) for sigma in {X, Y, Z}.
    static SingleQubitUnitary rotation(Pauli axis, double angle) {
        const double c = std::cos(angle / 2.0);
        const double s = std::sin(angle / 2.0);
        switch (axis) {
            case Pauli::X:
                return trusted({c, Complex(0.0, -s), Complex(0.0, -s), c});
            case Pauli::Y:
                return trusted({c, -s, s, c});
            case Pauli::Z:
                return trusted({Complex(c, -s), 0.0, 0.0, Complex(c, s)});
            case Pauli::I:
                break;
        }
        throw std::invalid_argument("rotation axis must be X, Y or Z");
    }

    SingleQubitUnitary adjoint() const {
        return trusted({std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])});
    }

    const Complex &operator()(int row, int col) const { return m_[2 * row + col]; }

   private:
    struct Trusted {};
    SingleQubitUnitary(Trusted, const std::array<Complex, 4> &entries) : m_(entries) {}
    static SingleQubitUnitary trusted(const std::array<Complex, 4> &entries) {
        return SingleQubitUnitary(Trusted{}, entries);
    }

    std::array<Complex, 4> m_;
};

/// Dense pure state of n qubits. Basis index bit q holds the value of qubit q
/// (qubit 0 is the least-significant bit); bitstrings render with qubit 0 rightmost.
class Statevector {
   public:
    /// |0...0> on n qubits, 1 <= n <= kMaxQubits.
    static Statevector zero(int num_qubits) {
        check_size(num_qubits);
        Statevector s;
        s.num_qubits_ = num_qubits;
        s.amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
        s.amps_[0] = 1.0;
        return s;
    }

    /// Wraps explicit amplitudes; they must have length 2^n and unit norm to 1e-10.
    static Statevector from_amplitudes(int num_qubits, std::vector<Complex> amps) {
        check_size(num_qubits);
        if (amps.size() != (std::size_t{1} << num_qubits)) {
            throw DimensionError("amplitude count must be 2^n");
        }
        double norm = 0.0;
        for (const auto &a : amps) {
            norm += std::norm(a);
        }
        if (std::abs(norm - 1.0) > 1e-10) {
            throw std::invalid_argument("amplitudes are not normalized");
        }
        Statevector s;
        s.num_qubits_ = num_qubits;
        s.amps_ = std::move(amps);
        return s;
    }

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    const Complex &operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const {
        double n = 0.0;
        for (const auto &a : amps_) {
            n += std::norm(a);
        }
        return n;
    }

    void apply(const SingleQubitUnitary &u, int qubit) {
        check_qubit(qubit);
        const std::size_t stride = std::size_t{1} << qubit;
        const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const Complex a0 = amps_[i];
                const Complex a1 = amps_[i + stride];
                amps_[i] = u00 * a0 + u01 * a1;
                amps_[i + stride] = u10 * a0 + u11 * a1;
            }
        }
    }

    /// Applies u to `target` on the subspace where `control` is 1.
    void apply_controlled(const SingleQubitUnitary &u, int control, int target) {
        check_qubit(control);
        check_qubit(target);
        if (control == target) {
            throw std::invalid_argument("control and target must differ");
        }
        const std::size_t cmask = std::size_t{1} << control;
        const std::size_t stride = std::size_t{1} << target;
        const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                if ((i & cmask) == 0) {
                    continue;
                }
                const Complex a0 = amps_[i];
                const Complex a1 = amps_[i + stride];
                amps_[i] = u00 * a0 + u01 * a1;
                amps_[i + stride] = u10 * a0 + u11 * a1;
            }
        }
    }

    void apply_cnot(int control, int target) {
        check_qubit(control);
        check_qubit(target);
        if (control == target) {
            throw std::invalid_argument("control and target must differ");
        }
        const std::size_t cmask = std::size_t{1} << control;
        const std::size_t tmask = std::size_t{1} << target;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cmask) != 0 && (i & tmask) == 0) {
                std::swap(amps_[i], amps_[i | tmask]);
            }
        }
    }

    void apply_cz(int a, int b) {
        check_qubit(a);
        check_qubit(b);
        if (a == b) {
            throw std::invalid_argument("CZ qubits must differ");
        }
        const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & mask) == mask) {
                amps_[i] = -amps_[i];
            }
        }
    }

    /// exp(-i angle sigma_axis / 2) on `qubit`.
    void apply_rotation(Pauli axis, int qubit, double angle) {
        if (axis == Pauli::Z) {
            check_qubit(qubit);
            const Complex lo(std::cos(angle / 2.0), -std::sin(angle / 2.0));
            const Complex hi = std::conj(lo);
            const std::size_t mask = std::size_t{1} << qubit;
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                amps_[i] *= (i & mask) ? hi : lo;
            }
            return;
        }
        apply(SingleQubitUnitary::rotation(axis, angle), qubit);
    }

   private:
    static void check_size(int num_qubits) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw SizeError("qubit count must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                            std::to_string(num_qubits));
        }
    }
    void check_qubit(int q) const {
        if (q < 0 || q >= num_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range");
        }
    }

    int num_qubits_ = 0;
    std::vector<Complex> amps_;
};

inline Statevector new_zero_state(int num_qubits) { return Statevector::zero(num_qubits); }

struct SingleQubitGate {
    SingleQubitUnitary unitary;
    int qubit;
};

struct ControlledGate {
    SingleQubitUnitary unitary;
    int control;
    int target;
};

using GateSpec = std::variant<SingleQubitGate, ControlledGate>;

inline Statevector apply_gate(Statevector state, const GateSpec &gate) {
    std::visit(
        [&state](const auto &g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, SingleQubitGate>) {
                state.apply(g.unitary, g.qubit);
            } else {
                state.apply_controlled(g.unitary, g.control, g.target);
            }
        },
        gate);
    return state;
}

/// <a|b>.
inline Complex inner_product(const Statevector &a, const Statevector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw DimensionError("inner product of states with different qubit counts");
    }
    Complex acc{0.0, 0.0};
    const auto x = a.amplitudes();
    const auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += std::conj(x[i]) * y[i];
    }
    return acc;
}

/// Computational-basis outcome probabilities |a_l|^2.
inline std::vector<double> probabilities(const Statevector &state) {
    std::vector<double> p(state.dim());
    const auto a = state.amplitudes();
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::norm(a[i]);
    }
    return p;
}

/// Draws `shots` computational-basis samples; deterministic in `seed`.
inline std::map<std::uint64_t, std::uint64_t> sample_counts(const Statevector &state, std::uint64_t shots,
                                                            std::uint64_t seed) {
    if (shots == 0) {
        throw std::invalid_argument("shots must be at least 1");
    }
    const auto p = probabilities(state);
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    Rng rng(seed);
    std::map<std::uint64_t, std::uint64_t> counts;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = uniform01(rng) * acc;
        // First cdf entry strictly above u, so zero-probability outcomes are never hit.
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        ++counts[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), p.size() - 1)];
    }
    return counts;
}

/// Renders a basis index as a bitstring, qubit 0 rightmost.
inline std::string bitstring(std::uint64_t index, int num_qubits) {
    std::string s(static_cast<std::size_t>(num_qubits), '0');
    for (int q = 0; q < num_qubits; ++q) {
        if ((index >> q) & 1U) {
            s[static_cast<std::size_t>(num_qubits - 1 - q)] = '1';
        }
    }
    return s;
}

}  // namespace natgrad
