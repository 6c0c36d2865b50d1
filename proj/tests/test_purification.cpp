#include "cqed/purification.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cqed;

namespace {

const std::array<std::size_t, 1> kFirst{0};

BellDiagonal eq11(double p) { return {p, 0.0, 1.0 - p, 0.0}; }

double expected_negativity(double p) { return (2.0 * p - 1.0) / (p * p + (1.0 - p) * (1.0 - p)); }

BellDiagonal pure_label(BellLabel l) {
  BellDiagonal w{0.0, 0.0, 0.0, 0.0};
  switch (l) {
    case BellLabel::kPhiPlus: w.a_plus = 1.0; break;
    case BellLabel::kPhiMinus: w.a_minus = 1.0; break;
    case BellLabel::kPsiPlus: w.b_plus = 1.0; break;
    case BellLabel::kPsiMinus: w.b_minus = 1.0; break;
  }
  return w;
}

bool is_phi(BellLabel l) { return l == BellLabel::kPhiPlus || l == BellLabel::kPhiMinus; }

}  // namespace

TEST(IdealFilter, SurvivalProbability) {
  for (double p : {0.55, 0.75, 0.9}) {
    const auto r = ideal_filter_round(eq11(p), eq11(p));
    EXPECT_NEAR(r.field_projection_probability, (p * p + (1 - p) * (1 - p)) / 2.0, 1e-12);
    EXPECT_NEAR(r.post_state.trace(), 1.0, 1e-12);
  }
}

TEST(IdealFilter, PhiPsiCrossTermAnnihilated) {
  EXPECT_THROW(ideal_filter_round(pure_label(BellLabel::kPhiPlus), pure_label(BellLabel::kPsiPlus)),
               EmptyBranchError);
}

TEST(IdealFilter, ParityPattern) {
  const BellLabel all[] = {BellLabel::kPhiPlus, BellLabel::kPhiMinus, BellLabel::kPsiPlus,
                           BellLabel::kPsiMinus};
  for (BellLabel l : all) {
    for (BellLabel r : all) {
      if (is_phi(l) == is_phi(r)) {
        EXPECT_NEAR(ideal_filter_round(pure_label(l), pure_label(r)).field_projection_probability, 0.5,
                    1e-14);
      } else {
        EXPECT_THROW(ideal_filter_round(pure_label(l), pure_label(r)), EmptyBranchError);
      }
    }
  }
}

TEST(IdealFilter, PureInputGivesPhiSquared) {
  const auto r = ideal_filter_round(eq11(1.0), eq11(1.0));
  EXPECT_NEAR(r.field_projection_probability, 0.5, 1e-14);
  CVector v = CVector::Zero(16);
  v(0b1100) = 1.0 / std::numbers::sqrt2;  // g g e e with e = 0
  v(0b0011) = 1.0 / std::numbers::sqrt2;
  EXPECT_NEAR(fidelity(PureState(HilbertSpace::qubits(4), v), r.post_state), 1.0, 1e-12);
}

TEST(MeasurePairPm, PlusBranchWeights) {
  const auto [plus, minus] = measure_pair_pm(ideal_filter_round(eq11(0.75), eq11(0.75)));
  const auto w = bell_decompose(plus.post_state).weights;
  EXPECT_NEAR(w.a_plus, 0.9, 1e-12);
  EXPECT_NEAR(w.b_plus, 0.1, 1e-12);
  EXPECT_NEAR(negativity(plus.post_state, kFirst), 0.8, 1e-12);
  EXPECT_NEAR(plus.cumulative_probability + minus.cumulative_probability, 0.3125, 1e-12);
  EXPECT_EQ(plus.measurement_branch, "plus");
}

TEST(MeasurePairPm, MinusBranchConvertsToPlus) {
  const auto [plus, minus] = measure_pair_pm(ideal_filter_round(eq11(0.7), eq11(0.7)));
  const MixedState flipped = flip_minus_branch(minus.post_state);
  EXPECT_LT((flipped.matrix() - plus.post_state.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  const auto w = bell_decompose(minus.post_state).weights;
  EXPECT_GT(w.a_minus, 0.5);
}

TEST(BellRound, MatchesStateMachinery) {
  for (double p : {0.55, 0.6, 0.7, 0.8, 0.95}) {
    const auto closed = bell_round(eq11(p), eq11(p));
    const auto [plus, minus] = measure_pair_pm(ideal_filter_round(eq11(p), eq11(p)));
    const auto w = bell_decompose(plus.post_state).weights;
    EXPECT_NEAR(closed.weights.a_plus, w.a_plus, 1e-12);
    EXPECT_NEAR(closed.weights.b_plus, w.b_plus, 1e-12);
    EXPECT_NEAR(negativity(plus.post_state, kFirst), expected_negativity(p), 1e-12);
  }
}

TEST(IterateIdeal, Examples) {
  const auto two = iterate_ideal(0.6, 2);
  EXPECT_NEAR(two.weights.a_plus, 0.36 / 0.52, 1e-12);
  EXPECT_NEAR(two.probability, 0.13, 1e-12);
  const auto one = iterate_ideal(0.6, 1);
  EXPECT_NEAR(one.weights.a_plus, 0.6, 1e-15);
  EXPECT_NEAR(one.probability, 0.5, 1e-15);
  for (int q = 1; q <= 6; ++q) {
    const auto pure = iterate_ideal(1.0, q);
    EXPECT_NEAR(pure.weights.a_plus, 1.0, 1e-15);
    EXPECT_NEAR(pure.probability, std::pow(2.0, -q), 1e-15);
    EXPECT_NEAR(iterate_ideal(0.5, q).weights.a_plus, 0.5, 1e-15);
  }
}

TEST(IterateIdeal, MonotoneInRounds) {
  for (double p : {0.55, 0.7, 0.9}) {
    double prev_a = 0.0;
    double prev_p = 1.0;
    for (int q = 1; q <= 10; ++q) {
      const auto r = iterate_ideal(p, q);
      EXPECT_GT(r.weights.a_plus, prev_a);
      EXPECT_LT(r.probability, prev_p);
      prev_a = r.weights.a_plus;
      prev_p = r.probability;
    }
    EXPECT_GT(prev_a, p);
  }
  EXPECT_THROW(iterate_ideal(0.6, 0), std::invalid_argument);
}

TEST(Ghz, Probabilities) {
  EXPECT_NEAR(ghz_extend(1.0).probability, 0.5, 1e-12);
  EXPECT_NEAR(ghz_extend(0.75).probability, 0.405, 1e-12);
  EXPECT_NEAR(ghz_extend(0.0).probability, 0.0, 1e-15);
  EXPECT_NEAR(ghz_extend(0.75).state.norm_squared(), 1.0, 1e-12);
}

TEST(Werner, RoundOneAtPure) {
  const MixedState out = werner_round(1.0, 1);
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPhiPlus), out), 1.0, 1e-12);
  EXPECT_THROW(werner_round(0.4, 1), std::invalid_argument);
}

TEST(Werner, RoundWeights) {
  const auto w1 = werner_round_weights(0.7, 1);
  EXPECT_NEAR(w1.a_plus, 0.735294117647, 1e-11);
  EXPECT_NEAR(w1.a_minus, 0.205882352941, 1e-11);
  EXPECT_NEAR(w1.b_plus, 0.029411764706, 1e-11);
  EXPECT_NEAR(w1.b_minus, 0.029411764706, 1e-11);
  EXPECT_NEAR(werner_round_weights(0.7, 2).a_plus, 0.845946, 1e-6);
}

TEST(Werner, RoundTwoInfidelityIsQuadratic) {
  std::vector<double> lq;
  std::vector<double> li;
  for (double q : {0.01, 0.02, 0.04}) {
    const double p = 1.0 - 3.0 * q;
    lq.push_back(std::log(q));
    li.push_back(std::log(1.0 - werner_round_weights(p, 2).a_plus));
  }
  const double slope = (li[2] - li[0]) / (lq[2] - lq[0]);
  EXPECT_GE(slope, 1.9);
}

TEST(Werner, NaiveIterationLosesNegativity) {
  bool drop = false;
  for (double p = 0.55; p < 1.0; p += 0.05) {
    const double input = negativity(werner_state(p), kFirst);
    const double naive = negativity(werner_naive_two_copies(p).to_state(), kFirst);
    if (naive < input) drop = true;
  }
  EXPECT_TRUE(drop);
}

TEST(Mems, Endpoints) {
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPhiPlus), mems_state(1.0)), 1.0, 1e-12);
  const MixedState pure = mems_purify(1.0);
  EXPECT_NEAR(std::abs(pure.matrix()(0, 3)), 0.5, 1e-12);
  EXPECT_NEAR(negativity(pure, kFirst), 1.0, 1e-10);
  EXPECT_NEAR(linear_entropy(pure), 0.0, 1e-10);
  EXPECT_NEAR(negativity(mems_state(0.0), kFirst), 0.0, 1e-12);
  EXPECT_NEAR(linear_entropy(mems_state(0.0)), 8.0 / 9.0, 1e-12);
  EXPECT_NEAR(negativity(mems_purify(0.0), kFirst), 1.0 / 3.0, 1e-10);
  EXPECT_LT(linear_entropy(mems_purify(0.0)), 8.0 / 9.0);
}

TEST(Mems, PurifiedDominatesInput) {
  for (int i = 1; i < 10; ++i) {
    const double g = i / 10.0;
    const MixedState in = mems_state(g);
    for (const MixedState& out : {mems_purify(g), mems_purify_filtered(g)}) {
      EXPECT_GT(negativity(out, kFirst), negativity(in, kFirst));
      EXPECT_LT(linear_entropy(out), linear_entropy(in));
    }
  }
}

TEST(Simplified, ThetaValues) {
  const SimplifiedParams params(2, 3);
  EXPECT_NEAR(params.theta2() / std::numbers::pi, 2.474874, 1e-6);
  EXPECT_NEAR(std::pow(std::sin(params.theta2()), 2), 0.9938, 1e-4);
}

TEST(Simplified, RoundNearPhiMinus) {
  const auto r = simplified_round(SimplifiedParams(2, 3), 0.8);
  EXPECT_GT(r.bell_fidelity, 1.0 - 1e-4);
  EXPECT_GE(r.subspace_fidelity, r.bell_fidelity);
  EXPECT_NEAR(r.state.trace(), 1.0, 1e-12);
}

TEST(Simplified, EffectiveMapMagnitudesMatchExactEvolution) {
  const SimplifiedParams params(2, 3);
  const CMatrix m = simplified_effective_map(params);
  const double t1 = params.theta1();
  const double t2 = params.theta2();
  EXPECT_NEAR(std::abs(m(0, 0)), std::abs(std::cos(t1) * std::cos(t2)), 1e-12);
  EXPECT_NEAR(std::abs(m(1, 0)), std::abs(std::sin(t1)), 1e-12);
  EXPECT_NEAR(std::abs(m(0, 1)), std::abs(std::sin(t2)), 1e-12);
}

TEST(Simplified, ChooseParams) {
  const auto best = choose_simplified_params(8);
  EXPECT_EQ(best.params.m1, 2);
  EXPECT_EQ(best.params.m2, 3);
  const auto shallow = choose_simplified_params(1);
  EXPECT_LE(shallow.params.m1, 1);
  EXPECT_LE(shallow.params.m2, 1);
  EXPECT_THROW(choose_simplified_params(0), std::invalid_argument);
  EXPECT_THROW(choose_simplified_params(1, 1e-9), std::domain_error);
}

TEST(Probe, SinglePhotonExcites) {
  CVector one = CVector::Zero(3);
  one(1) = 1.0;
  const auto r = probe_photon_detect(one);
  EXPECT_GT(r.excited_probability, 1.0 - 0.05 * 0.05 - 1e-12);
  EXPECT_NEAR(std::sin(std::numbers::sqrt2 * r.lambda_t), 0.0, 1e-10);
}

TEST(Probe, ZeroAndTwoPhotonsStayGround) {
  CVector zero = CVector::Zero(3);
  zero(0) = 1.0;
  EXPECT_EQ(probe_photon_detect(zero).excited_probability, 0.0);
  CVector two = CVector::Zero(3);
  two(2) = 1.0;
  EXPECT_NEAR(probe_photon_detect(two).excited_probability, 0.0, 1e-10);
}

TEST(Probe, EqualSuperposition) {
  CVector v = CVector::Ones(3) / std::sqrt(3.0);
  EXPECT_NEAR(probe_photon_detect(v).excited_probability, 1.0 / 3.0, 0.01);
  EXPECT_THROW(probe_time(1e-12, 10.0), std::domain_error);
}

TEST(ExactRound, ApproachesIdealWithN) {
  double prev = 1.0;
  for (std::size_t n : {10u, 50u, 200u}) {
    const double infidelity = 1.0 - exact_round(n, eq11(0.75), eq11(0.75)).fidelity_to_ideal;
    EXPECT_LT(infidelity, prev);
    prev = infidelity;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(ExactRound, SmallNDeviates) {
  EXPECT_GT(1.0 - exact_round(2, eq11(0.75), eq11(0.75)).fidelity_to_ideal, 1e-3);
  EXPECT_THROW(exact_round(1, eq11(0.75), eq11(0.75)), std::invalid_argument);
}

TEST(ExactRound, PureInputAtHundred) {
  const auto r = exact_round(100, eq11(1.0), eq11(1.0));
  const auto [plus, minus] = measure_pair_pm(r.round);
  EXPECT_LT(1.0 - fidelity(bell_state(BellLabel::kPhiPlus), plus.post_state), 5e-9);
}
