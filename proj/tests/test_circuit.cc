// Copyright 2026 The wdistill Authors
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

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.h"
#include "wdistill/circuit.h"
#include "wdistill/errors.h"

using namespace wdistill;

namespace {

// Full 2^n unitary of a (possibly controlled) single-qubit gate g = [[g00, g01], [g10, g11]].
oracle::Dense embed(size_t n, const std::array<oracle::C, 4> &g, size_t target, const std::vector<size_t> &controls,
                    const std::vector<size_t> &anti = {}) {
    size_t dim = size_t{1} << n;
    oracle::Dense u(dim * dim);
    for (size_t c = 0; c < dim; c++) {
        bool active = true;
        for (size_t q : controls) active = active && ((c >> q) & 1);
        for (size_t q : anti) active = active && !((c >> q) & 1);
        if (!active) {
            u[c * dim + c] = 1;
            continue;
        }
        size_t bit = (c >> target) & 1;
        size_t c0 = c & ~(size_t{1} << target);
        size_t c1 = c0 | (size_t{1} << target);
        u[c0 * dim + c] = g[0 * 2 + bit];
        u[c1 * dim + c] = g[1 * 2 + bit];
    }
    return u;
}

std::array<oracle::C, 4> ry_matrix(double theta) {
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return {c, -s, s, c};
}

}  // namespace

TEST(Gates, EpsilonThetaRoundTrip) {
    for (double e : {0.0, 0.1, 0.5, 1 / std::sqrt(6.0), 1.0}) {
        EXPECT_NEAR(epsilon_from_theta(theta_from_epsilon(e)), e, 1e-15);
        EXPECT_NEAR(std::sin(theta_from_epsilon(e) / 2), e, 1e-15);
    }
    EXPECT_THROW(theta_from_epsilon(-0.1), InvalidArgument);
    EXPECT_THROW(theta_from_epsilon(1.1), InvalidArgument);
}

TEST(Gates, RyOnBasisStates) {
    double t = 0.7;
    auto out = apply(ry(0, t), Statevector::from_label("0"));
    EXPECT_NEAR(out[0].real(), std::cos(t / 2), 1e-15);
    EXPECT_NEAR(out[1].real(), std::sin(t / 2), 1e-15);
    out = apply(ry(0, t), Statevector::from_label("1"));
    EXPECT_NEAR(out[0].real(), -std::sin(t / 2), 1e-15);
    EXPECT_NEAR(out[1].real(), std::cos(t / 2), 1e-15);
}

TEST(Gates, CnotTruthTable) {
    const std::pair<const char *, const char *> table[] = {{"00", "00"}, {"10", "11"}, {"01", "01"}, {"11", "10"}};
    for (auto [in, expected] : table) {
        auto out = apply(cnot(0, 1), Statevector::from_label(in));
        EXPECT_NEAR(std::norm(out[basis_index(expected)]), 1, 1e-15) << in;
    }
}

TEST(Gates, XAndProjectors) {
    auto one = apply(x_gate(1), Statevector::from_label("00"));
    EXPECT_EQ(one[basis_index("01")], Complex(1));
    auto plus = Statevector::from_amplitudes({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
    EXPECT_NEAR(apply(projector_f(0), plus).norm_squared(), 0.5, 1e-15);
    EXPECT_NEAR(apply(projector_g(0), plus)[1].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_FALSE(projector_f(0).is_unitary());
    EXPECT_TRUE(cry(0, 1, 0.3).is_unitary());
}

TEST(Gates, DensityActionMatchesDenseConjugation) {
    std::mt19937_64 gen(21);
    const size_t n = 4;
    auto rho = oracle::random_density(gen, n);
    const double t = 1.234;
    struct Case {
        CircuitOp op;
        oracle::Dense u;
    };
    std::vector<Case> cases{
        {ry(2, t), embed(n, ry_matrix(t), 2, {})},
        {cry(0, 3, t), embed(n, ry_matrix(t), 3, {0})},
        {cnot(3, 1), embed(n, {0, 1, 1, 0}, 1, {3})},
    };
    CircuitOp anti = cry(1, 2, t);
    anti.anti_controls = {0, 3};
    cases.push_back({anti, embed(n, ry_matrix(t), 2, {1}, {0, 3})});
    for (const auto &c : cases) {
        auto got = apply(c.op, rho);
        auto ref = oracle::conjugate_by(c.u, oracle::dense(rho.matrix()));
        EXPECT_LT(oracle::max_abs_diff(oracle::dense(got.matrix()), ref), 1e-14);
        // Pure path agrees with the density path.
        auto psi = oracle::random_pure(gen, n);
        auto pure = DensityMatrix::from_pure(apply(c.op, psi));
        auto mixed = apply(c.op, DensityMatrix::from_pure(psi));
        EXPECT_LT(oracle::max_abs_diff(pure.matrix(), mixed.matrix()), 1e-14);
    }
}

TEST(Gates, RejectsBadQubits) {
    Statevector s(2);
    EXPECT_THROW(apply(ry(2, 0.1), s), InvalidArgument);
    EXPECT_THROW(apply(cnot(0, 0), s), InvalidArgument);
}

TEST(States, WAndBellStates) {
    auto w = prepare_w();
    EXPECT_NEAR(w.norm_squared(), 1, 1e-15);
    for (const char *l : {"011", "101", "110"}) {
        EXPECT_NEAR(std::norm(w[basis_index(l)]), 1.0 / 3, 1e-15);
    }
    EXPECT_THROW(prepare_w(4), UnsupportedError);
    auto pp = psi_plus();
    EXPECT_NEAR(pp[basis_index("01")].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(pp[basis_index("10")].real(), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(inner(psi_plus(), psi_minus())), 0, 1e-15);
    EXPECT_NEAR(std::abs(inner(phi_plus(), phi_minus())), 0, 1e-15);
}

// Table I: branch probabilities of one weak round on |W>.
class TableOne : public ::testing::TestWithParam<double> {};

TEST_P(TableOne, BranchProbabilitiesMatchClosedForm) {
    const double e = GetParam(), e2 = e * e;
    auto reg = tensor(prepare_w(), Statevector(3));
    auto coupled = couple_all(reg, e);
    auto branches = measure(coupled, {3, 4, 5});
    double total = 0;
    for (const auto &b : branches) {
        total += b.probability;
        int ones = std::popcount(b.outcome);
        if (ones == 0) {
            EXPECT_NEAR(b.probability, (1 - e2) * (1 - e2), 1e-12);
            EXPECT_NEAR(fidelity(partial_trace(b.post_state, {0, 1, 2}), prepare_w()), 1, 1e-12);
        } else if (ones == 1) {
            EXPECT_NEAR(b.probability, 2 * e2 * (1 - e2) / 3, 1e-12);
            size_t party = static_cast<size_t>(std::countr_zero(b.outcome));
            auto pair = partial_trace(b.post_state, other_parties(party));
            EXPECT_NEAR(fidelity(pair, psi_plus()), 1, 1e-12);
        } else {
            // Only the two-excitation patterns carry weight; they sum to e^4.
            EXPECT_EQ(ones, 2);
        }
    }
    double fail = 0;
    for (const auto &b : branches) {
        if (std::popcount(b.outcome) >= 2) fail += b.probability;
    }
    EXPECT_NEAR(fail, e2 * e2, 1e-12);
    EXPECT_NEAR(total, 1, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Strengths, TableOne, ::testing::Values(0.1, 1 / std::sqrt(6.0), 0.5));

TEST(CoupleAll, DensityAndPurePathsAgree) {
    auto reg = tensor(prepare_w(), Statevector(3));
    auto a = DensityMatrix::from_pure(couple_all(reg, 0.37));
    auto b = couple_all(DensityMatrix::from_pure(reg), 0.37);
    EXPECT_LT(oracle::max_abs_diff(a.matrix(), b.matrix()), 1e-14);
}

TEST(CoupleAll, RequiresGroundAncillae) {
    auto reg = tensor(prepare_w(), Statevector::from_label("100"));
    EXPECT_THROW(couple_all(reg, 0.5), PreconditionError);
    EXPECT_THROW(couple_all(Statevector(3), 0.5), InvalidArgument);
}

TEST(Measure, ProbabilitiesAndPostStates) {
    std::mt19937_64 gen(4);
    auto psi = oracle::random_pure(gen, 3);
    auto branches = measure(psi, {2, 0});
    double total = 0;
    for (const auto &b : branches) {
        size_t q2 = b.outcome & 1, q0 = (b.outcome >> 1) & 1;
        double p = 0;
        for (size_t i = 0; i < 8; i++) {
            if (((i >> 2) & 1) == q2 && (i & 1) == q0) p += std::norm(psi[i]);
        }
        EXPECT_NEAR(b.probability, p, 1e-14);
        EXPECT_NEAR(b.post_state.norm_squared(), 1, 1e-14);
        total += b.probability;
    }
    EXPECT_NEAR(total, 1, 1e-14);
    auto rho = DensityMatrix::from_pure(psi);
    auto mixed = measure(rho, {2, 0});
    ASSERT_EQ(mixed.size(), branches.size());
    for (size_t i = 0; i < mixed.size(); i++) {
        EXPECT_EQ(mixed[i].outcome, branches[i].outcome);
        EXPECT_NEAR(mixed[i].probability, branches[i].probability, 1e-14);
    }
    EXPECT_THROW(measure(psi, {}), InvalidArgument);
    EXPECT_THROW(measure(psi, {3}), InvalidArgument);
}

TEST(Measure, PrunesZeroBranches) {
    auto branches = measure(Statevector::from_label("10"), {0, 1});
    ASSERT_EQ(branches.size(), 1u);
    EXPECT_EQ(branches[0].outcome, 1u);
}

TEST(StrongMeasurement, SpecificPartyOnW) {
    for (size_t party = 0; party < 3; party++) {
        auto branches = strong_measure_party(prepare_w(), party);
        for (const auto &b : branches) {
            if (b.outcome == 1) {
                EXPECT_NEAR(b.probability, 2.0 / 3, 1e-15);
                EXPECT_NEAR(fidelity(partial_trace(b.post_state, other_parties(party)), psi_plus()), 1, 1e-14);
            } else {
                EXPECT_NEAR(b.probability, 1.0 / 3, 1e-15);
            }
        }
    }
    EXPECT_EQ(other_parties(1), (std::vector<size_t>{0, 2}));
    EXPECT_THROW(other_parties(3), InvalidArgument);
}
