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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "natgrad/hamiltonian.hpp"
#include "natgrad/io.hpp"
#include "oracles.hpp"

using namespace natgrad;
using namespace natgrad::testing;
using std::numbers::pi;

namespace {

PauliHamiltonian single(const char *label, double c = 1.0) {
    return PauliHamiltonian(static_cast<int>(std::string(label).size()), {PauliString::from_label(c, label)});
}

ProblemInstance triangle() {
    return build_problem(MaxCutPayload{3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}});
}

/// Cut weight of bitstring b: sum of w over edges whose endpoints differ.
double cut_weight(const MaxCutPayload &g, std::uint64_t b) {
    double w = 0.0;
    for (const auto &e : g.edges) {
        if (((b >> e.u) & 1) != ((b >> e.v) & 1)) w += e.weight;
    }
    return w;
}

}  // namespace

TEST(Loss, Examples) {
    EXPECT_DOUBLE_EQ(loss(single("Z"), new_zero_state(1)), 1.0);
    auto s = new_zero_state(1);
    s.apply_rotation(Pauli::Y, 0, pi / 2);
    const PauliHamiltonian zx(1, {PauliString::from_label(1.0, "Z"), PauliString::from_label(1.0, "X")});
    EXPECT_NEAR(loss(zx, s), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(loss(triangle().hamiltonian, new_zero_state(3)), 0.0);
    EXPECT_THROW(loss(zx, new_zero_state(2)), DimensionError);
}

TEST(Loss, MatchesDenseExpectation) {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(uniform_below(rng, 5));
        const auto h = random_hamiltonian(n, 6, rng);
        const auto s = random_state(n, rng);
        const CVec v = to_vec(s);
        EXPECT_NEAR(loss(h, s), v.dot(hamiltonian_mat(h) * v).real(), 1e-10);
    }
}

TEST(Hamiltonian, Validation) {
    EXPECT_THROW(PauliHamiltonian(2, {}), std::invalid_argument);
    EXPECT_THROW(PauliHamiltonian(2, {PauliString::from_label(1.0, "Z")}), DimensionError);
    EXPECT_THROW(PauliString(std::nan(""), {Pauli::Z}), std::invalid_argument);
}

TEST(Hamiltonian, DenseMatrixMatchesKroneckerAndIsHermitian) {
    Rng rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(uniform_below(rng, 4));
        const auto h = random_hamiltonian(n, 5, rng);
        const auto m = dense_matrix(h);
        EXPECT_LT((m - hamiltonian_mat(h)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
    for (const auto &inst : {random_instance(ProblemKind::MaxCut, 6, 1), random_instance(ProblemKind::NumberPartitioning, 5, 1),
                             random_instance(ProblemKind::Heisenberg, 4, 1)}) {
        const auto m = dense_matrix(inst.hamiltonian);
        EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ExactGround, Examples) {
    const auto z = exact_ground(single("Z"));
    EXPECT_DOUBLE_EQ(z.energy, -1.0);
    EXPECT_EQ(z.indices, (std::vector<std::uint64_t>{1}));

    const auto t = exact_ground(triangle().hamiltonian);
    EXPECT_DOUBLE_EQ(t.energy, -2.0);
    EXPECT_EQ(t.indices.size(), 6u);
    EXPECT_EQ(std::count(t.indices.begin(), t.indices.end(), 0u), 0);
    EXPECT_EQ(std::count(t.indices.begin(), t.indices.end(), 7u), 0);

    const auto np = exact_ground(build_problem(NumberPartitioningPayload{{1, 2, 3}}).hamiltonian);
    EXPECT_DOUBLE_EQ(np.energy, 0.0);
    // "011" and "100" with qubit 0 rightmost.
    EXPECT_NE(std::find(np.indices.begin(), np.indices.end(), 3u), np.indices.end());
    EXPECT_NE(std::find(np.indices.begin(), np.indices.end(), 4u), np.indices.end());
    EXPECT_EQ(bitstring(3, 3), "011");
}

TEST(ExactGround, SizeCap) {
    const auto big = random_instance(ProblemKind::Heisenberg, 15, 0);
    EXPECT_THROW(exact_ground(big.hamiltonian), SizeError);
}

TEST(ExactGround, NonDiagonalMatchesDenseEigensolver) {
    Rng rng(47);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(uniform_below(rng, 3));
        const auto h = random_hamiltonian(n, 6, rng);
        const auto g = exact_ground(h);
        const CMat m = hamiltonian_mat(h);
        Eigen::SelfAdjointEigenSolver<CMat> solver(m);
        if (h.is_diagonal()) continue;
        EXPECT_NEAR(g.energy, solver.eigenvalues()(0), 1e-10);
        ASSERT_EQ(g.eigenvector.size(), std::size_t{1} << n);
        const Eigen::Map<const CVec> v(g.eigenvector.data(), static_cast<Eigen::Index>(g.eigenvector.size()));
        EXPECT_LT((m * v - g.energy * v).norm(), 1e-9);
        EXPECT_TRUE(g.indices.empty());
    }
}

TEST(BuildProblem, SingleEdge) {
    const auto inst = build_problem(MaxCutPayload{2, {{0, 1, 1.0}}});
    EXPECT_EQ(diagonal_energies(inst.hamiltonian), (std::vector<double>{0.0, -1.0, -1.0, 0.0}));
    EXPECT_DOUBLE_EQ(exact_ground(inst.hamiltonian).energy, -1.0);
    EXPECT_DOUBLE_EQ(inst.hamiltonian.offset(), -0.5);
}

TEST(BuildProblem, HeisenbergSinglet) {
    const auto inst = build_problem(HeisenbergPayload{2, 1.0, 0.0});
    EXPECT_NEAR(exact_ground(inst.hamiltonian).energy, -3.0, 1e-12);
    EXPECT_EQ(inst.kind, ProblemKind::Heisenberg);
    // Open chain: 3 couplings per bond, one field term per site.
    EXPECT_EQ(build_problem(HeisenbergPayload{5, 1.0, 1.0}).hamiltonian.terms().size(), 4u * 3u + 5u);
}

TEST(BuildProblem, InvalidPayloads) {
    EXPECT_THROW(build_problem(MaxCutPayload{3, {{0, 0, 1.0}}}), std::invalid_argument);
    EXPECT_THROW(build_problem(MaxCutPayload{3, {{0, 1, 1.0}, {1, 0, 2.0}}}), std::invalid_argument);
    EXPECT_THROW(build_problem(MaxCutPayload{3, {{0, 5, 1.0}}}), std::invalid_argument);
    EXPECT_THROW(build_problem(MaxCutPayload{3, {}}), std::invalid_argument);
    EXPECT_THROW(build_problem(NumberPartitioningPayload{{1, -2, 3}}), std::invalid_argument);
    EXPECT_THROW(build_problem(NumberPartitioningPayload{{4}}), std::invalid_argument);
    EXPECT_THROW(build_problem(HeisenbergPayload{1, 1.0, 1.0}), std::invalid_argument);
}

TEST(RandomInstance, MaxCutIsThreeRegularAndDeterministic) {
    const auto a = random_instance(ProblemKind::MaxCut, 8, 5);
    const auto b = random_instance(ProblemKind::MaxCut, 8, 5);
    EXPECT_EQ(to_json(a), to_json(b));
    const auto &g = std::get<MaxCutPayload>(a.payload);
    EXPECT_EQ(g.edges.size(), 12u);
    std::vector<int> degree(8, 0);
    std::set<std::pair<int, int>> seen;
    for (const auto &e : g.edges) {
        ++degree[static_cast<std::size_t>(e.u)];
        ++degree[static_cast<std::size_t>(e.v)];
        EXPECT_NE(e.u, e.v);
        EXPECT_TRUE(seen.insert(std::minmax(e.u, e.v)).second);
        EXPECT_GT(e.weight, 0.0);
        EXPECT_LE(e.weight, 1.0);
    }
    for (int d : degree) EXPECT_EQ(d, 3);
    EXPECT_THROW(random_instance(ProblemKind::MaxCut, 7, 1), std::invalid_argument);
    const auto unweighted = random_instance(ProblemKind::MaxCut, 6, 2, {.weighted = false});
    for (const auto &e : std::get<MaxCutPayload>(unweighted.payload).edges) EXPECT_EQ(e.weight, 1.0);
}

TEST(RandomInstance, NumberPartitioningRange) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = random_instance(ProblemKind::NumberPartitioning, 12, seed);
        for (auto x : std::get<NumberPartitioningPayload>(inst.payload).numbers) {
            EXPECT_GE(x, 1);
            EXPECT_LE(x, 25);
        }
    }
    EXPECT_THROW(random_instance(ProblemKind::NumberPartitioning, 1, 1), std::invalid_argument);
}

TEST(Properties, MaxCutEnergyIsMinusCutWeight) {
    // Dyadic weights keep every partial sum exact.
    Rng rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 * (2 + static_cast<int>(uniform_below(rng, 4)));
        auto g = std::get<MaxCutPayload>(random_instance(ProblemKind::MaxCut, n, rng()).payload);
        for (auto &e : g.edges) e.weight = static_cast<double>(1 + uniform_below(rng, 1024)) / 1024.0;
        const auto e = diagonal_energies(build_problem(g).hamiltonian);
        for (std::uint64_t b = 0; b < e.size(); ++b) EXPECT_EQ(e[b], -cut_weight(g, b));
    }
}

TEST(Properties, MaxCutEnergyWithRandomWeights) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = random_instance(ProblemKind::MaxCut, 10, seed);
        const auto &g = std::get<MaxCutPayload>(inst.payload);
        const auto e = diagonal_energies(inst.hamiltonian);
        for (std::uint64_t b = 0; b < e.size(); ++b) EXPECT_NEAR(e[b], -cut_weight(g, b), 1e-12);
    }
}

TEST(Properties, NumberPartitioningEnergyIsSquaredDifference) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = random_instance(ProblemKind::NumberPartitioning, 10, seed);
        const auto &nums = std::get<NumberPartitioningPayload>(inst.payload).numbers;
        const auto e = diagonal_energies(inst.hamiltonian);
        for (std::uint64_t b = 0; b < e.size(); ++b) {
            std::int64_t diff = 0;
            for (std::size_t i = 0; i < nums.size(); ++i) diff += ((b >> i) & 1 ? 1 : -1) * nums[i];
            EXPECT_EQ(e[b], static_cast<double>(diff * diff));
        }
    }
}

TEST(Properties, ComplementSymmetry) {
    for (auto kind : {ProblemKind::MaxCut, ProblemKind::NumberPartitioning}) {
        const auto inst = random_instance(kind, 8, 3);
        const auto e = diagonal_energies(inst.hamiltonian);
        const std::uint64_t all = e.size() - 1;
        for (std::uint64_t b = 0; b < e.size(); ++b) EXPECT_EQ(e[b], e[b ^ all]);
        const auto g = exact_ground(inst.hamiltonian);
        EXPECT_EQ(g.indices.size() % 2, 0u);
    }
}

TEST(Properties, VariationalBound) {
    Rng rng(59);
    for (auto kind : {ProblemKind::MaxCut, ProblemKind::NumberPartitioning, ProblemKind::Heisenberg}) {
        const auto inst = with_ground(random_instance(kind, 6, 4));
        for (int trial = 0; trial < 50; ++trial) {
            EXPECT_GE(loss(inst.hamiltonian, random_state(6, rng)), inst.ground->energy - 1e-9);
        }
    }
}

TEST(Instance, JsonRoundTrip) {
    for (auto kind : {ProblemKind::MaxCut, ProblemKind::NumberPartitioning, ProblemKind::Heisenberg}) {
        const auto inst = with_ground(random_instance(kind, 6, 8));
        const auto back = with_ground(instance_from_json(Json::parse(to_json(inst).dump())));
        EXPECT_EQ(to_json(back), to_json(inst));
        EXPECT_EQ(back.seed, inst.seed);
    }
    EXPECT_EQ(problem_kind_from_string("np"), ProblemKind::NumberPartitioning);
    EXPECT_THROW(problem_kind_from_string("tsp"), std::invalid_argument);
}
