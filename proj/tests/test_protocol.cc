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

#include <cmath>

#include "oracles.h"
#include "wdistill/circuit.h"
#include "wdistill/errors.h"
#include "wdistill/protocol.h"

using namespace wdistill;

namespace {

DensityMatrix ideal_w() {
    return DensityMatrix::from_pure(prepare_w());
}

// A W state survives every all-zero round unchanged, so round k contributes
// 2 x_k (1 - x_k) with x_k = eps_k^2 and the strong stage contributes 2/3.
double success_recursion(const std::vector<double> &eps) {
    double reach = 1, total = 0;
    for (double e : eps) {
        double x = e * e;
        total += reach * 2 * x * (1 - x);
        reach *= (1 - x) * (1 - x);
    }
    return total + reach * 2.0 / 3;
}

double recorded_success(const ProtocolResult &r) {
    double total = 0;
    for (const auto &rec : r.rounds) {
        total += r.reach_probability(rec.round_index) * rec.p_epr_total();
    }
    if (r.strong.reached) {
        total += r.reach_probability(r.rounds_requested + 1) * r.strong.p_epr;
    }
    return total;
}

double max_diff(const ProtocolResult &a, const ProtocolResult &b) {
    double d = 0;
    EXPECT_EQ(a.rounds.size(), b.rounds.size());
    for (size_t k = 0; k < std::min(a.rounds.size(), b.rounds.size()); k++) {
        const auto &x = a.rounds[k], &y = b.rounds[k];
        d = std::max({d, std::abs(x.p_w - y.p_w), std::abs(x.p_fail - y.p_fail)});
        for (size_t o = 0; o < 8; o++) {
            d = std::max(d, std::abs(x.outcome_probabilities[o] - y.outcome_probabilities[o]));
        }
        for (size_t i = 0; i < 3; i++) {
            d = std::max(d, std::abs(x.p_epr_by_party[i] - y.p_epr_by_party[i]));
            EXPECT_EQ(x.distilled_states[i].has_value(), y.distilled_states[i].has_value());
            if (x.distilled_states[i] && y.distilled_states[i]) {
                d = std::max(d, oracle::max_abs_diff(x.distilled_states[i]->matrix(), y.distilled_states[i]->matrix()));
            }
        }
        d = std::max(d, oracle::max_abs_diff(x.w_state_before.matrix(), y.w_state_before.matrix()));
        if (x.w_state_after && y.w_state_after) {
            d = std::max(d, oracle::max_abs_diff(x.w_state_after->matrix(), y.w_state_after->matrix()));
        }
    }
    d = std::max(d, std::abs(a.strong.p_epr - b.strong.p_epr));
    EXPECT_EQ(a.strong.reached, b.strong.reached);
    if (a.strong.distilled_state && b.strong.distilled_state) {
        d = std::max(d, oracle::max_abs_diff(a.strong.distilled_state->matrix(), b.strong.distilled_state->matrix()));
    }
    return d;
}

}  // namespace

TEST(Schedule, OptimalAndPublishedValues) {
    EXPECT_DOUBLE_EQ(optimal_epsilon(1), 0.5);
    EXPECT_NEAR(optimal_epsilon(6), 1 / 3.0, 1e-15);
    EXPECT_NEAR(published_epsilon(1), 1 / std::sqrt(6.0), 1e-15);
    EXPECT_NEAR(published_epsilon(4), 1 / 3.0, 1e-15);
    for (int d = 1; d < 10; d++) {
        EXPECT_GT(optimal_epsilon(d), optimal_epsilon(d + 1));
        EXPECT_GT(published_epsilon(d), published_epsilon(d + 1));
    }
    EXPECT_THROW(optimal_epsilon(0), InvalidArgument);
    EXPECT_THROW(published_epsilon(0), InvalidArgument);
}

TEST(Schedule, RoundIndexing) {
    auto s = EpsilonSchedule::optimal(3);
    EXPECT_EQ(s.rounds(), 3);
    // The first round has the most rounds remaining and the weakest coupling.
    EXPECT_NEAR(s.for_round(1), optimal_epsilon(3), 1e-15);
    EXPECT_NEAR(s.for_round(3), 0.5, 1e-15);
    EXPECT_NEAR(s.for_remaining(2), s.for_round(2), 0);
    EXPECT_THROW(s.for_round(0), InvalidArgument);
    EXPECT_THROW(s.for_round(4), InvalidArgument);
    EXPECT_THROW(EpsilonSchedule::by_round({0.2, 1.5}), ConfigError);
    EXPECT_NO_THROW(EpsilonSchedule::uniform(2, 0.0));
}

TEST(Classification, AllPatterns) {
    EXPECT_EQ(classify_outcome(0).kind, OutcomeClass::Continue);
    for (uint64_t p = 0; p < 3; p++) {
        auto c = classify_outcome(uint64_t{1} << p);
        EXPECT_EQ(c.kind, OutcomeClass::Success);
        EXPECT_EQ(c.party, p);
        EXPECT_EQ(c.pair(), other_parties(p));
    }
    for (uint64_t b : {3, 5, 6, 7}) {
        EXPECT_EQ(classify_outcome(b).kind, OutcomeClass::Fail);
        EXPECT_TRUE(classify_outcome(b).pair().empty());
    }
    EXPECT_THROW(classify_outcome(8), InvalidArgument);
}

class IdealRuns : public ::testing::TestWithParam<int> {};

TEST_P(IdealRuns, OptimalScheduleHitsClosedForm) {
    const int n = GetParam();
    auto r = run_random_party(ProtocolConfig::optimal(n), ideal_w());
    ASSERT_EQ(static_cast<int>(r.rounds.size()), n);
    EXPECT_NEAR(recorded_success(r), (n + 2.0) / (n + 3.0), 1e-12);
    for (const auto &rec : r.rounds) {
        double x = rec.epsilon * rec.epsilon;
        EXPECT_NEAR(rec.p_w, (1 - x) * (1 - x), 1e-12);
        EXPECT_NEAR(rec.p_epr_total(), 2 * x * (1 - x), 1e-12);
        EXPECT_NEAR(rec.p_fail, x * x, 1e-12);
        double sum = 0;
        for (double p : rec.outcome_probabilities) sum += p;
        EXPECT_NEAR(sum, 1, 1e-12);
        for (size_t i = 0; i < 3; i++) {
            ASSERT_TRUE(rec.distilled_states[i]);
            EXPECT_NEAR(fidelity(*rec.distilled_states[i], psi_plus()), 1, 1e-12);
        }
        ASSERT_TRUE(rec.w_state_after);
        EXPECT_NEAR(fidelity(*rec.w_state_after, prepare_w()), 1, 1e-12);
    }
    EXPECT_TRUE(r.strong.reached);
    EXPECT_NEAR(r.strong.p_epr, 2.0 / 3, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Rounds, IdealRuns, ::testing::Values(1, 2, 3, 4, 5));

TEST(RandomParty, ArbitrarySchedulesMatchRecursion) {
    std::vector<std::vector<double>> schedules{
        EpsilonSchedule::published(3).per_round(), {0.1}, {0.3, 0.7}, {0.9, 0.2, 0.4, 0.6}, {0.0, 0.0}};
    for (const auto &eps : schedules) {
        ProtocolConfig c;
        c.rounds = static_cast<int>(eps.size());
        c.schedule = EpsilonSchedule::by_round(eps);
        EXPECT_NEAR(recorded_success(run_random_party(c, ideal_w())), success_recursion(eps), 1e-12);
    }
}

TEST(RandomParty, PublishedScheduleFallsShortOfClosedForm) {
    ProtocolConfig c;
    c.schedule = EpsilonSchedule::published(1);
    EXPECT_NEAR(recorded_success(run_random_party(c, ideal_w())), success_recursion({1 / std::sqrt(6.0)}), 1e-12);
    EXPECT_LT(recorded_success(run_random_party(c, ideal_w())), 0.75 - 1e-3);
}

TEST(RandomParty, ZeroCouplingReducesToSpecificParty) {
    ProtocolConfig c;
    c.rounds = 3;
    c.schedule = EpsilonSchedule::uniform(3, 0.0);
    auto r = run_random_party(c, ideal_w());
    for (const auto &rec : r.rounds) {
        EXPECT_NEAR(rec.p_w, 1, 1e-15);
        EXPECT_FALSE(rec.distilled_states[0]);
    }
    EXPECT_NEAR(r.strong.p_epr, 2.0 / 3, 1e-12);
}

TEST(RandomParty, FullCouplingStopsEarly) {
    ProtocolConfig c;
    c.rounds = 2;
    c.schedule = EpsilonSchedule::uniform(2, 1.0);
    auto r = run_random_party(c, ideal_w());
    ASSERT_EQ(r.rounds.size(), 1u);
    EXPECT_FALSE(r.rounds[0].w_state_after);
    EXPECT_NEAR(r.rounds[0].p_fail, 1, 1e-12);
    EXPECT_FALSE(r.strong.reached);
    EXPECT_EQ(r.reach_probability(3), 0);
}

TEST(RandomParty, HookSeesEachCompletedRound) {
    std::vector<int> seen;
    ChannelHook hook = [&](const DensityMatrix &s, int k) {
        seen.push_back(k);
        return s;
    };
    run_random_party(ProtocolConfig::optimal(3), ideal_w(), hook);
    EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
}

TEST(RandomParty, HookOutputFeedsNextRound) {
    auto mixed = DensityMatrix::maximally_mixed(3);
    ChannelHook hook = [&](const DensityMatrix &, int) { return mixed; };
    auto r = run_random_party(ProtocolConfig::optimal(2), ideal_w(), hook);
    EXPECT_LT(oracle::max_abs_diff(r.rounds[1].w_state_before.matrix(), mixed.matrix()), 1e-15);
    EXPECT_LT(oracle::max_abs_diff(r.strong.input_state->matrix(), mixed.matrix()), 1e-15);
}

TEST(RandomParty, ConfigValidation) {
    ProtocolConfig c = ProtocolConfig::optimal(2);
    c.schedule = EpsilonSchedule::optimal(3);
    EXPECT_THROW(run_random_party(c, ideal_w()), ConfigError);
    c = ProtocolConfig::optimal(1);
    c.strong_party = 3;
    EXPECT_THROW(run_random_party(c, ideal_w()), ConfigError);
    c = ProtocolConfig::optimal(1);
    c.rounds = 0;
    EXPECT_THROW(run_random_party(c, ideal_w()), ConfigError);
    EXPECT_THROW(run_random_party(ProtocolConfig::optimal(1), DensityMatrix::maximally_mixed(2)), InvalidArgument);
}

TEST(SpecificParty, TwoThirdsAndPerfectPair) {
    for (size_t party = 0; party < 3; party++) {
        auto r = run_specific_party(ideal_w(), party);
        EXPECT_EQ(r.variant, Variant::SpecificParty);
        EXPECT_TRUE(r.rounds.empty());
        EXPECT_NEAR(r.strong.p_epr, 2.0 / 3, 1e-12);
        EXPECT_NEAR(fidelity(*r.strong.distilled_state, psi_plus()), 1, 1e-10);
    }
    EXPECT_THROW(run_specific_party(ideal_w(), 3), InvalidArgument);
}

TEST(AncillaChains, RecordSlots) {
    AncillaChains ch{3, 3};
    EXPECT_EQ(ch.n_qubits(), 12u);
    EXPECT_EQ(ch.qubit(0, 0), 3u);
    EXPECT_EQ(ch.qubit(2, 2), 11u);
    // After round 1 (shifted) round 1 sits in slot 1; after the final round 3, rounds 1..3 sit in 2..0.
    EXPECT_EQ(ch.record_slot(1, 1), 1);
    EXPECT_EQ(ch.record_slot(1, 2), 2);
    EXPECT_EQ(ch.record_slot(2, 2), 1);
    EXPECT_EQ(ch.record_slot(1, 3), 2);
    EXPECT_EQ(ch.record_slot(3, 3), 0);
}

TEST(AncillaChains, RoundOpsStructure) {
    AncillaChains ch{2, 2};
    auto r1 = no_mcm_round_ops(ch, 1, 0.5, NoMcmGating::Controlled);
    // Three couplings and one swap (two CNOTs) per party.
    ASSERT_EQ(r1.size(), 3u + 3 * 2);
    EXPECT_TRUE(r1[0].anti_controls.empty());
    auto r2 = no_mcm_round_ops(ch, 2, 0.5, NoMcmGating::Controlled);
    ASSERT_EQ(r2.size(), 3u);
    EXPECT_EQ(r2[0].anti_controls.size(), 3u);
    auto s2 = no_mcm_round_ops(ch, 2, 0.5, NoMcmGating::Static);
    EXPECT_TRUE(s2[0].anti_controls.empty());
}

class DeferredMeasurement : public ::testing::TestWithParam<int> {};

TEST_P(DeferredMeasurement, MatchesMidCircuitVariant) {
    const int n = GetParam();
    auto c = ProtocolConfig::optimal(n);
    auto mcm = run_random_party(c, ideal_w());
    c.variant = Variant::NoMcm;
    auto nomcm = run_protocol(c, ideal_w());
    EXPECT_EQ(nomcm.variant, Variant::NoMcm);
    EXPECT_LT(max_diff(mcm, nomcm), 1e-10);

    // Mixed input, decomposed into a pure ensemble internally.
    Matrix m = ideal_w().matrix();
    m *= 0.9;
    m += 0.1 * DensityMatrix::maximally_mixed(3).matrix();
    DensityMatrix noisy(m);
    EXPECT_LT(max_diff(run_random_party(c, noisy), run_no_mcm(c, noisy)), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Rounds, DeferredMeasurement, ::testing::Values(1, 2, 3));

TEST(NoMcm, StaticGatingDisturbsEarlierPairs) {
    auto c = ProtocolConfig::optimal(2);
    c.variant = Variant::NoMcm;
    c.gating = NoMcmGating::Static;
    auto r = run_no_mcm(c, ideal_w());
    ASSERT_TRUE(r.rounds[0].distilled_states[0]);
    EXPECT_LT(fidelity(*r.rounds[0].distilled_states[0], psi_plus()), 1 - 1e-3);
    // The round statistics themselves do not depend on the gating.
    auto mcm = run_random_party(ProtocolConfig::optimal(2), ideal_w());
    EXPECT_NEAR(r.rounds[1].p_w, mcm.rounds[1].p_w, 1e-12);
}

TEST(NoMcm, RegisterLimits) {
    auto c = ProtocolConfig::optimal(2);
    c.variant = Variant::NoMcm;
    c.ancillas_per_party = 1;
    EXPECT_THROW(run_no_mcm(c, ideal_w()), ConfigError);
    auto big = ProtocolConfig::optimal(7);
    big.variant = Variant::NoMcm;
    EXPECT_THROW(run_no_mcm(big, ideal_w()), ConfigError);
    ChannelHook hook = [](const DensityMatrix &s, int) { return s; };
    EXPECT_THROW(run_protocol(c, ideal_w(), hook), ConfigError);
}
