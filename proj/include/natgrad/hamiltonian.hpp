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
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "natgrad/errors.hpp"
#include "natgrad/pauli.hpp"
#include "natgrad/random.hpp"
#include "natgrad/statevector.hpp"

namespace natgrad {

/// Largest register for which the exact ground-state oracle builds dense matrices.
inline constexpr int kMaxExactQubits = 14;

/// H = sum_l c_l P_l + offset.
class PauliHamiltonian {
   public:
    PauliHamiltonian(int num_qubits, std::vector<PauliString> terms, double offset = 0.0)
        : num_qubits_(num_qubits), terms_(std::move(terms)), offset_(offset) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw SizeError("Hamiltonian qubit count out of range");
        }
        if (terms_.empty()) {
            throw std::invalid_argument("Hamiltonian needs at least one term");
        }
        for (const auto &t : terms_) {
            if (t.num_qubits() != num_qubits) {
                throw DimensionError("term " + t.label() + " has the wrong length");
            }
        }
        if (!std::isfinite(offset_)) {
            throw std::invalid_argument("offset must be finite");
        }
    }

    int num_qubits() const { return num_qubits_; }
    const std::vector<PauliString> &terms() const { return terms_; }
    double offset() const { return offset_; }

    bool is_diagonal() const {
        return std::all_of(terms_.begin(), terms_.end(), [](const auto &t) { return t.is_diagonal(); });
    }

   private:
    int num_qubits_;
    std::vector<PauliString> terms_;
    double offset_;
};

/// <psi|H|psi>.
inline double loss(const PauliHamiltonian &h, const Statevector &state) {
    if (h.num_qubits() != state.num_qubits()) {
        throw DimensionError("Hamiltonian and state qubit counts differ");
    }
    double e = 0.0;
    for (const auto &t : h.terms()) {
        e += expectation_pauli_string(state, t);
    }
    return e + h.offset();
}

/// Energy of every basis state of a diagonal (I/Z only) Hamiltonian.
inline std::vector<double> diagonal_energies(const PauliHamiltonian &h) {
    if (!h.is_diagonal()) {
        throw std::invalid_argument("Hamiltonian has off-diagonal terms");
    }
    const std::size_t dim = std::size_t{1} << h.num_qubits();
    std::vector<double> e(dim, 0.0);
    for (const auto &t : h.terms()) {
        const std::uint64_t z = t.z_mask();
        const double c = t.coefficient();
        for (std::uint64_t b = 0; b < dim; ++b) {
            e[b] += detail::parity(b & z) ? -c : c;
        }
    }
    for (auto &v : e) {
        v += h.offset();
    }
    return e;
}

/// Dense 2^n x 2^n matrix of H.
inline Eigen::MatrixXcd dense_matrix(const PauliHamiltonian &h) {
    if (h.num_qubits() > kMaxExactQubits) {
        throw SizeError("dense Hamiltonian limited to " + std::to_string(kMaxExactQubits) + " qubits");
    }
    const std::size_t dim = std::size_t{1} << h.num_qubits();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto &t : h.terms()) {
        const std::uint64_t x = t.x_mask();
        const std::uint64_t z = t.z_mask();
        const Complex phase = detail::i_power(t.y_count()) * t.coefficient();
        for (std::uint64_t b = 0; b < dim; ++b) {
            m(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) +=
                detail::parity(b & z) ? -phase : phase;
        }
    }
    m.diagonal().array() += h.offset();
    return m;
}

struct GroundState {
    double energy = 0.0;
    /// Degenerate ground basis states of a diagonal Hamiltonian (empty otherwise).
    std::vector<std::uint64_t> indices;
    /// Ground eigenvector of a non-diagonal Hamiltonian (empty for diagonal ones).
    std::vector<Complex> eigenvector;
};

/// Exact minimum eigenvalue. Diagonal Hamiltonians also report every basis
/// state within `degeneracy_tol` of the minimum.
inline GroundState exact_ground(const PauliHamiltonian &h, double degeneracy_tol = 1e-9) {
    if (h.num_qubits() > kMaxExactQubits) {
        throw SizeError("exact ground state limited to " + std::to_string(kMaxExactQubits) + " qubits");
    }
    GroundState g;
    if (h.is_diagonal()) {
        const auto e = diagonal_energies(h);
        g.energy = *std::min_element(e.begin(), e.end());
        for (std::uint64_t b = 0; b < e.size(); ++b) {
            if (e[b] <= g.energy + degeneracy_tol) {
                g.indices.push_back(b);
            }
        }
        return g;
    }
    const Eigen::MatrixXcd m = dense_matrix(h);
    const bool real = std::all_of(h.terms().begin(), h.terms().end(),
                                  [](const auto &t) { return t.y_count() % 2 == 0; });
    if (real) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.real());
        g.energy = solver.eigenvalues()(0);
        const auto v = solver.eigenvectors().col(0);
        g.eigenvector.assign(v.data(), v.data() + v.size());
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
        g.energy = solver.eigenvalues()(0);
        const auto v = solver.eigenvectors().col(0);
        g.eigenvector.assign(v.data(), v.data() + v.size());
    }
    return g;
}

// ---------------------------------------------------------------------------
// Benchmark problems.

enum class ProblemKind { MaxCut, NumberPartitioning, Heisenberg };

inline std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::MaxCut:
            return "maxcut";
        case ProblemKind::NumberPartitioning:
            return "number_partitioning";
        case ProblemKind::Heisenberg:
            return "heisenberg";
    }
    return "?";
}

inline ProblemKind problem_kind_from_string(const std::string &s) {
    if (s == "maxcut") return ProblemKind::MaxCut;
    if (s == "number_partitioning" || s == "np") return ProblemKind::NumberPartitioning;
    if (s == "heisenberg") return ProblemKind::Heisenberg;
    throw std::invalid_argument("unknown problem kind '" + s + "'");
}

struct WeightedEdge {
    int u;
    int v;
    double weight = 1.0;
};

struct MaxCutPayload {
    int num_vertices = 0;
    std::vector<WeightedEdge> edges;
};

struct NumberPartitioningPayload {
    std::vector<std::int64_t> numbers;
};

/// Open XXX chain with transverse field.
struct HeisenbergPayload {
    int num_qubits = 2;
    double coupling = 1.0;
    double field = 1.0;
};

using ProblemPayload = std::variant<MaxCutPayload, NumberPartitioningPayload, HeisenbergPayload>;

struct ProblemInstance {
    ProblemKind kind;
    ProblemPayload payload;
    PauliHamiltonian hamiltonian;
    std::optional<std::uint64_t> seed;
    std::optional<GroundState> ground;

    int num_qubits() const { return hamiltonian.num_qubits(); }
};

namespace detail {

/// H_MC = -sum_<ij> (w_ij / 2)(1 - Z_i Z_j).
inline PauliHamiltonian maxcut_hamiltonian(const MaxCutPayload &p) {
    const int n = p.num_vertices;
    if (n < 2) {
        throw std::invalid_argument("MaxCut needs at least two vertices");
    }
    if (p.edges.empty()) {
        throw std::invalid_argument("MaxCut graph has no edges");
    }
    std::set<std::pair<int, int>> seen;
    std::vector<PauliString> terms;
    double offset = 0.0;
    for (const auto &e : p.edges) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (e.u == e.v) {
            throw std::invalid_argument("graph has a self-loop");
        }
        if (!seen.insert(std::minmax(e.u, e.v)).second) {
            throw std::invalid_argument("graph has a repeated edge");
        }
        if (!std::isfinite(e.weight) || e.weight == 0.0) {
            throw std::invalid_argument("edge weights must be finite and non-zero");
        }
        terms.push_back(PauliString::sites(e.weight / 2.0, n, {{e.u, Pauli::Z}, {e.v, Pauli::Z}}));
        offset -= e.weight / 2.0;
    }
    return PauliHamiltonian(n, std::move(terms), offset);
}

/// H_NP = sum_{i != j} n_i n_j Z_i Z_j + sum_i n_i^2, the ordered-pair sum
/// stored as one term 2 n_i n_j per unordered pair.
inline PauliHamiltonian number_partitioning_hamiltonian(const NumberPartitioningPayload &p) {
    const int n = static_cast<int>(p.numbers.size());
    if (n < 2) {
        throw std::invalid_argument("number partitioning needs at least two integers");
    }
    std::vector<PauliString> terms;
    double offset = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto ni = p.numbers[static_cast<std::size_t>(i)];
        if (ni < 0) {
            throw std::invalid_argument("number partitioning integers must be nonnegative");
        }
        offset += static_cast<double>(ni * ni);
        for (int j = i + 1; j < n; ++j) {
            const auto nj = p.numbers[static_cast<std::size_t>(j)];
            terms.push_back(
                PauliString::sites(2.0 * static_cast<double>(ni * nj), n, {{i, Pauli::Z}, {j, Pauli::Z}}));
        }
    }
    return PauliHamiltonian(n, std::move(terms), offset);
}

/// J sum_{i<n-1} (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}) + h sum_i X_i.
inline PauliHamiltonian heisenberg_hamiltonian(const HeisenbergPayload &p) {
    const int n = p.num_qubits;
    if (n < 2) {
        throw std::invalid_argument("Heisenberg chain needs at least two sites");
    }
    if (!std::isfinite(p.coupling) || !std::isfinite(p.field)) {
        throw std::invalid_argument("Heisenberg couplings must be finite");
    }
    std::vector<PauliString> terms;
    for (int i = 0; i + 1 < n; ++i) {
        for (Pauli a : {Pauli::X, Pauli::Y, Pauli::Z}) {
            terms.push_back(PauliString::sites(p.coupling, n, {{i, a}, {i + 1, a}}));
        }
    }
    for (int i = 0; i < n; ++i) {
        terms.push_back(PauliString::sites(p.field, n, {{i, Pauli::X}}));
    }
    return PauliHamiltonian(n, std::move(terms));
}

}  // namespace detail

inline ProblemInstance build_problem(const ProblemPayload &payload) {
    return std::visit(
        [&payload](const auto &p) -> ProblemInstance {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, MaxCutPayload>) {
                return {ProblemKind::MaxCut, payload, detail::maxcut_hamiltonian(p), std::nullopt, std::nullopt};
            } else if constexpr (std::is_same_v<P, NumberPartitioningPayload>) {
                return {ProblemKind::NumberPartitioning, payload, detail::number_partitioning_hamiltonian(p),
                        std::nullopt, std::nullopt};
            } else {
                return {ProblemKind::Heisenberg, payload, detail::heisenberg_hamiltonian(p), std::nullopt,
                        std::nullopt};
            }
        },
        payload);
}

/// Attaches exact ground-state data to `instance`.
inline ProblemInstance with_ground(ProblemInstance instance, double degeneracy_tol = 1e-9) {
    instance.ground = exact_ground(instance.hamiltonian, degeneracy_tol);
    return instance;
}

struct RandomInstanceOptions {
    /// MaxCut: weights uniform on (0, 1] when true, otherwise 1.
    bool weighted = true;
    /// Number partitioning: integers uniform on [1, max_integer].
    std::int64_t max_integer = 25;
    double coupling = 1.0;
    double field = 1.0;
};

/// Uniformly random simple 3-regular graph on `n` vertices (pairing model with rejection).
inline std::vector<std::pair<int, int>> random_three_regular_graph(int n, Rng &rng) {
    if (n < 4 || n % 2 != 0) {
        throw std::invalid_argument("3-regular graphs need an even vertex count of at least 4");
    }
    const std::size_t points = static_cast<std::size_t>(3 * n);
    std::vector<int> stubs(points);
    for (;;) {
        for (std::size_t k = 0; k < points; ++k) {
            stubs[k] = static_cast<int>(k / 3);
        }
        for (std::size_t k = points - 1; k > 0; --k) {
            std::swap(stubs[k], stubs[uniform_below(rng, k + 1)]);
        }
        std::set<std::pair<int, int>> edges;
        bool simple = true;
        for (std::size_t k = 0; k < points && simple; k += 2) {
            const int a = stubs[k];
            const int b = stubs[k + 1];
            simple = a != b && edges.insert(std::minmax(a, b)).second;
        }
        if (simple) {
            return {edges.begin(), edges.end()};
        }
    }
}

/// Seeded benchmark instance; `size` is the qubit count.
inline ProblemInstance random_instance(ProblemKind kind, int size, std::uint64_t seed,
                                       const RandomInstanceOptions &options = {}) {
    Rng rng(seed);
    ProblemPayload payload;
    switch (kind) {
        case ProblemKind::MaxCut: {
            MaxCutPayload p{size, {}};
            for (const auto &[u, v] : random_three_regular_graph(size, rng)) {
                // 1 - U[0,1) lies in (0, 1].
                const double w = options.weighted ? 1.0 - uniform01(rng) : 1.0;
                p.edges.push_back({u, v, w});
            }
            payload = std::move(p);
            break;
        }
        case ProblemKind::NumberPartitioning: {
            if (size < 2) {
                throw std::invalid_argument("number partitioning needs at least two integers");
            }
            if (options.max_integer < 1) {
                throw std::invalid_argument("max_integer must be positive");
            }
            NumberPartitioningPayload p;
            for (int i = 0; i < size; ++i) {
                p.numbers.push_back(
                    1 + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(options.max_integer))));
            }
            payload = std::move(p);
            break;
        }
        case ProblemKind::Heisenberg:
            payload = HeisenbergPayload{size, options.coupling, options.field};
            break;
    }
    ProblemInstance inst = build_problem(payload);
    inst.seed = seed;
    return inst;
}

}  // namespace natgrad
