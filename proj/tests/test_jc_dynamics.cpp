#include "cqed/jc_dynamics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <numbers>

using namespace cqed;

namespace {

constexpr double kPi = std::numbers::pi;

// Local index of |q, n> in a [0, n_max] propagator.
Eigen::Index idx(std::size_t q, std::size_t n, std::size_t n_max) {
  return static_cast<Eigen::Index>(q * (n_max + 1) + n);
}

}  // namespace

TEST(JcPropagator, GroundOnePhotonToExcitedVacuum) {
  const CMatrix u = jc_propagator({kPi / 2.0, 2});
  const Complex amp = u(idx(kExcited, 0, 2), idx(kGround, 1, 2));
  EXPECT_NEAR(amp.real(), 0.0, 1e-15);
  EXPECT_NEAR(amp.imag(), -1.0, 1e-15);
}

TEST(JcPropagator, VacuumGroundInvariant) {
  for (double lt : {0.3, 1.0, 17.2, 250.0}) {
    const CMatrix u = jc_propagator({lt, 3});
    EXPECT_NEAR(std::abs(u(idx(kGround, 0, 3), idx(kGround, 0, 3)) - 1.0), 0.0, 1e-15);
  }
}

TEST(JcPropagator, ExcitedOnePhotonToGroundTwo) {
  const CMatrix u = jc_propagator({kPi / (2.0 * std::numbers::sqrt2), 2});
  const Complex amp = u(idx(kGround, 2, 2), idx(kExcited, 1, 2));
  EXPECT_NEAR(amp.real(), 0.0, 1e-15);
  EXPECT_NEAR(amp.imag(), -1.0, 1e-15);
}

TEST(JcPropagator, ZeroTimeIsIdentity) {
  EXPECT_TRUE(jc_propagator({0.0, 4}).isApprox(CMatrix::Identity(10, 10), 1e-15));
}

TEST(JcPropagator, UnitaryForRandomTimes) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> lt(0.0, 100.0 * kPi);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix u = jc_propagator({lt(rng), 5});
    EXPECT_LT((u.adjoint() * u - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(JcPropagator, WindowMatchesFullSpaceInside) {
  const double lt = 0.731;
  const CMatrix full = jc_propagator({lt, 12});
  const CMatrix win = jc_propagator({lt, 12, 8});
  // |g,9> and |e,8> couple identically in both.
  EXPECT_NEAR(std::abs(full(idx(kExcited, 8, 12), idx(kGround, 9, 12)) -
                       win(static_cast<Eigen::Index>(kExcited * 5 + 0),
                           static_cast<Eigen::Index>(kGround * 5 + 1))),
              0.0, 1e-15);
}

TEST(JcPropagator, FeasibilityBound) {
  EXPECT_THROW(jc_propagator({5.0, 1, 0, 4.0}), FeasibilityBoundError);
  EXPECT_NO_THROW(jc_propagator({500.0, 1, 0, std::numeric_limits<double>::infinity()}));
  EXPECT_THROW(jc_propagator({-1.0, 1}), std::invalid_argument);
}

TEST(Passage, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(29);
  const HilbertSpace space({qubit_factor(), mode_factor(3)});
  const PureState psi = fixtures::random_pure(rng, space);
  EXPECT_TRUE(passage(psi, 0, 1, 0.0).amplitudes().isApprox(psi.amplitudes(), 1e-15));
}

TEST(Passage, RetrievalTransfersPhotonToAtom) {
  const HilbertSpace space({qubit_factor(), mode_factor(1)});
  const std::array<std::size_t, 2> g1{kGround, 1};
  const PureState out = passage(PureState::basis(space, g1), 0, 1, kPi / 2.0);
  const std::array<std::size_t, 2> e0{kExcited, 0};
  EXPECT_NEAR(std::abs(out.amplitude(e0)), 1.0, 1e-15);
}

TEST(Passage, RejectsWrongFactorKinds) {
  const HilbertSpace space({qubit_factor(), mode_factor(1)});
  const std::array<std::size_t, 2> g0{kGround, 0};
  const PureState psi = PureState::basis(space, g0);
  EXPECT_THROW(passage(psi, 1, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(passage(psi, 0, 0, 1.0), std::out_of_range);
}

TEST(Passage, ConservesExcitation) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> lt(0.0, 20.0);
  const HilbertSpace space({qubit_factor(), qubit_factor(), mode_factor(4)});
  for (int trial = 0; trial < 20; ++trial) {
    // Keep amplitude off the top level so the truncation is exact.
    CVector v = fixtures::random_pure(rng, space).amplitudes();
    for (std::size_t q0 = 0; q0 < 2; ++q0) {
      for (std::size_t q1 = 0; q1 < 2; ++q1) v(static_cast<Eigen::Index>(q0 * 10 + q1 * 5 + 4)) = 0.0;
    }
    const PureState psi(space, v.normalized());
    const PureState out = passage(passage(psi, 0, 2, lt(rng)), 1, 2, lt(rng));
    EXPECT_NEAR(mean_excitation(out), mean_excitation(psi), 1e-12);
  }
}

TEST(Passage, Composition) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> lt(0.0, 30.0);
  const HilbertSpace space({qubit_factor(), mode_factor(3)});
  for (int trial = 0; trial < 20; ++trial) {
    const PureState psi = fixtures::random_pure(rng, space);
    const double a = lt(rng);
    const double b = lt(rng);
    const PureState two = passage(passage(psi, 0, 1, a), 0, 1, b);
    const PureState one = passage(psi, 0, 1, a + b);
    EXPECT_LT((two.amplitudes() - one.amplitudes()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Passage, MixedMatchesPure) {
  std::mt19937_64 rng(41);
  const HilbertSpace space({mode_factor(2), qubit_factor()});
  const PureState psi = fixtures::random_pure(rng, space);
  const MixedState a = passage(MixedState::from_pure(psi), 1, 0, 2.2);
  const MixedState b = MixedState::from_pure(passage(psi, 1, 0, 2.2));
  EXPECT_TRUE(a.matrix().isApprox(b.matrix(), 1e-12));
}

TEST(Passage, RespectsBound) {
  const HilbertSpace space({qubit_factor(), mode_factor(1)});
  const std::array<std::size_t, 2> g0{kGround, 0};
  EXPECT_THROW(passage(PureState::basis(space, g0), 0, 1, 101.0 * kPi), FeasibilityBoundError);
}
