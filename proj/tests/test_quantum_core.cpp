#include "cqed/measures.hpp"
#include "cqed/quantum_core.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <numbers>

using namespace cqed;

namespace {

PureState ket(std::initializer_list<std::size_t> digits) {
  std::vector<std::size_t> d(digits);
  return PureState::basis(HilbertSpace::qubits(d.size()), d);
}

}  // namespace

TEST(HilbertSpace, DimensionsAndStrides) {
  HilbertSpace s({qubit_factor(), mode_factor(3), qubit_factor()});
  EXPECT_EQ(s.dimension(), 16u);
  EXPECT_EQ(s.strides(), (std::vector<std::size_t>{8, 2, 1}));
  const std::array<std::size_t, 1> mode{1};
  EXPECT_EQ(s.offsets(mode), (std::vector<std::size_t>{0, 2, 4, 6}));
  EXPECT_EQ(s.complement(mode), (std::vector<std::size_t>{0, 2}));
}

TEST(HilbertSpace, RejectsBadFactors) {
  EXPECT_THROW(HilbertSpace({Factor{FactorKind::kMode, 1, 0}}), std::invalid_argument);
  EXPECT_THROW(mode_window(3, 3), std::invalid_argument);
  const std::array<std::size_t, 2> repeated{0, 0};
  EXPECT_THROW(HilbertSpace::qubits(2).check_indices(repeated), std::out_of_range);
}

TEST(HilbertSpace, WindowedModeKeepsOffset) {
  const Factor f = mode_window(98, 102);
  EXPECT_EQ(f.dim, 5u);
  EXPECT_EQ(f.max_photons(), 102u);
}

TEST(Tensor, BasisProduct) {
  const PureState e = ket({kExcited});
  const PureState g = ket({kGround});
  const PureState eg = tensor(e, g);
  const std::array<std::size_t, 2> d{kExcited, kGround};
  EXPECT_DOUBLE_EQ(std::abs(eg.amplitude(d)), 1.0);
  EXPECT_NEAR(eg.norm_squared(), 1.0, 1e-12);
}

TEST(Tensor, MaximallyMixedProduct) {
  const MixedState half = MixedState::maximally_mixed(HilbertSpace::qubits(1));
  const MixedState quarter = tensor(half, half);
  EXPECT_TRUE(quarter.matrix().isApprox(CMatrix::Identity(4, 4) / 4.0, 1e-14));
}

TEST(Tensor, BellProductHasFourHalfAmplitudes) {
  const PureState phi = bell_state(BellLabel::kPhiPlus);
  const PureState both = tensor(phi, phi);
  int halves = 0;
  for (Eigen::Index i = 0; i < both.amplitudes().size(); ++i) {
    const double a = std::abs(both.amplitudes()(i));
    if (std::abs(a - 0.5) < 1e-12) ++halves;
    else EXPECT_NEAR(a, 0.0, 1e-15);
  }
  EXPECT_EQ(halves, 4);
}

TEST(LocalUnitary, RzFlipsRelativeSign) {
  CVector plus(2);
  plus << 1.0, 1.0;
  const PureState p(HilbertSpace::qubits(1), plus / std::numbers::sqrt2);
  const std::array<std::size_t, 1> t{0};
  const PureState out = apply_local_unitary(p, t, rotation_z(std::numbers::pi));
  CVector minus(2);
  minus << 1.0, -1.0;
  EXPECT_NEAR(fidelity(PureState(HilbertSpace::qubits(1), minus), out), 1.0, 1e-12);
}

TEST(LocalUnitary, RyExchangesPhiMinusAndPsiPlus) {
  const CMatrix ry = rotation_y(std::numbers::pi / 2.0);
  const std::array<std::size_t, 1> q0{0};
  const std::array<std::size_t, 1> q1{1};
  auto rotate = [&](BellLabel l) {
    return apply_local_unitary(apply_local_unitary(bell_state(l), q0, ry), q1, ry);
  };
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPsiPlus), rotate(BellLabel::kPhiMinus)), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPhiMinus), rotate(BellLabel::kPsiPlus)), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPhiPlus), rotate(BellLabel::kPhiPlus)), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPsiMinus), rotate(BellLabel::kPsiMinus)), 1.0, 1e-12);
}

TEST(LocalUnitary, RxOnBothQubitsSwapsPhiPlusAndPsiPlus) {
  // An x-rotation pair moves Phi+ instead of Phi-.
  const CMatrix rx = rotation_x(std::numbers::pi / 2.0);
  const std::array<std::size_t, 1> q0{0};
  const std::array<std::size_t, 1> q1{1};
  auto rotate = [&](BellLabel l) {
    return apply_local_unitary(apply_local_unitary(bell_state(l), q0, rx), q1, rx);
  };
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPsiPlus), rotate(BellLabel::kPhiPlus)), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(bell_state(BellLabel::kPhiMinus), rotate(BellLabel::kPhiMinus)), 1.0, 1e-12);
}

TEST(LocalUnitary, IdentityLeavesStateUnchanged) {
  std::mt19937_64 rng(1);
  const PureState psi = fixtures::random_pure(rng, HilbertSpace({qubit_factor(), mode_factor(2)}));
  const std::array<std::size_t, 1> t{1};
  const PureState out = apply_local_unitary(psi, t, CMatrix::Identity(3, 3));
  EXPECT_TRUE(out.amplitudes().isApprox(psi.amplitudes(), 1e-15));
}

TEST(LocalUnitary, RejectsNonUnitaryAndWrongDimension) {
  const PureState psi = ket({kGround, kGround});
  const std::array<std::size_t, 1> t{0};
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 0) = 2.0;
  EXPECT_THROW(apply_local_unitary(psi, t, bad), std::invalid_argument);
  EXPECT_THROW(apply_local_unitary(psi, t, CMatrix::Identity(3, 3)), std::invalid_argument);
}

TEST(LocalUnitary, PreservesNormAndTraceOnRandomStates) {
  std::mt19937_64 rng(7);
  const HilbertSpace space({qubit_factor(), mode_factor(2), qubit_factor()});
  for (int trial = 0; trial < 20; ++trial) {
    const PureState psi = fixtures::random_pure(rng, space);
    const MixedState rho = fixtures::random_mixed(rng, space);
    const std::array<std::size_t, 2> t{2, 1};
    const CMatrix u = fixtures::random_unitary(rng, 6);
    EXPECT_NEAR(apply_local_unitary(psi, t, u).norm_squared(), 1.0, 1e-12);
    const MixedState out = apply_local_unitary(rho, t, u);
    EXPECT_NEAR(out.trace(), 1.0, 1e-12);
    EXPECT_TRUE(out.is_density_matrix());
    // Mixed and pure paths agree.
    const MixedState from_pure = apply_local_unitary(MixedState::from_pure(psi), t, u);
    const PureState evolved = apply_local_unitary(psi, t, u);
    EXPECT_TRUE(from_pure.matrix().isApprox(MixedState::from_pure(evolved).matrix(), 1e-12));
  }
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
  const MixedState rho = MixedState::from_pure(bell_state(BellLabel::kPhiPlus));
  const std::array<std::size_t, 1> keep{0};
  EXPECT_TRUE(partial_trace(rho, keep).matrix().isApprox(CMatrix::Identity(2, 2) / 2.0, 1e-14));
}

TEST(PartialTrace, KeepingEverythingIsIdentity) {
  std::mt19937_64 rng(3);
  const MixedState rho = fixtures::random_mixed(rng, HilbertSpace::qubits(3));
  const std::array<std::size_t, 3> all{0, 1, 2};
  EXPECT_TRUE(partial_trace(rho, all).matrix().isApprox(rho.matrix(), 1e-15));
}

TEST(PartialTrace, MatchesReducedStateOfPure) {
  std::mt19937_64 rng(5);
  const PureState psi = fixtures::random_pure(rng, HilbertSpace({qubit_factor(), mode_factor(3), qubit_factor()}));
  const std::array<std::size_t, 2> keep{2, 0};
  const MixedState a = partial_trace(MixedState::from_pure(psi), keep);
  const MixedState b = reduced_state(psi, keep);
  EXPECT_TRUE(a.matrix().isApprox(b.matrix(), 1e-13));
  EXPECT_NEAR(a.trace(), 1.0, 1e-12);
}

TEST(PartialTrace, RejectsBadIndices) {
  const MixedState rho = MixedState::maximally_mixed(HilbertSpace::qubits(2));
  const std::array<std::size_t, 1> bad{5};
  EXPECT_THROW(partial_trace(rho, bad), std::out_of_range);
  EXPECT_THROW(partial_trace(rho, std::span<const std::size_t>{}), std::invalid_argument);
}

TEST(PartialTranspose, BellSpectrum) {
  const MixedState rho = MixedState::from_pure(bell_state(BellLabel::kPhiPlus));
  const std::array<std::size_t, 1> party{1};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(partial_transpose(rho, party));
  const Eigen::VectorXd ev = es.eigenvalues();
  EXPECT_NEAR(ev(0), -0.5, 1e-14);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(ev(i), 0.5, 1e-14);
}

TEST(PartialTranspose, ProductStateIsPositive) {
  std::mt19937_64 rng(11);
  const MixedState rho = tensor(fixtures::random_mixed(rng, HilbertSpace::qubits(1), 2),
                                fixtures::random_mixed(rng, HilbertSpace::qubits(1), 2));
  const std::array<std::size_t, 1> party{0};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(partial_transpose(rho, party));
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
}

TEST(PartialTranspose, WernerMinimumEigenvalue) {
  const MixedState w = werner_weights(0.75).to_state();
  const std::array<std::size_t, 1> party{0};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(partial_transpose(w, party));
  EXPECT_NEAR(es.eigenvalues().minCoeff(), -0.25, 1e-12);
}

TEST(PartialTranspose, IsAnInvolutionAndPreservesTrace) {
  std::mt19937_64 rng(13);
  const HilbertSpace space({qubit_factor(), mode_factor(2)});
  for (int trial = 0; trial < 10; ++trial) {
    const MixedState rho = fixtures::random_mixed(rng, space);
    const std::array<std::size_t, 1> party{1};
    const CMatrix once = partial_transpose(rho, party);
    EXPECT_NEAR(once.trace().real(), 1.0, 1e-12);
    EXPECT_TRUE(once.isApprox(once.adjoint(), 1e-14));
    const CMatrix twice = partial_transpose(MixedState(space, once), party);
    EXPECT_TRUE(twice.isApprox(rho.matrix(), 1e-15));
  }
}

TEST(PartialTranspose, RejectsImproperParty) {
  const MixedState rho = MixedState::maximally_mixed(HilbertSpace::qubits(2));
  const std::array<std::size_t, 2> all{0, 1};
  EXPECT_THROW(partial_transpose(rho, all), std::invalid_argument);
}

TEST(Project, PlusStateInZBasis) {
  CVector plus(2);
  plus << 1.0, 1.0;
  const PureState p(HilbertSpace::qubits(1), plus / std::numbers::sqrt2);
  const std::array<std::size_t, 1> t{0};
  const auto rec = project(p, t, basis_projector(2, kExcited), true, "e");
  EXPECT_NEAR(rec.probability, 0.5, 1e-15);
  EXPECT_NEAR(rec.post_state.norm_squared(), 1.0, 1e-15);
  EXPECT_EQ(rec.outcome, "e");
}

TEST(Project, EmptyBranchSignals) {
  const HilbertSpace space({mode_factor(2)});
  const std::array<std::size_t, 1> vac{0};
  const PureState vacuum = PureState::basis(space, vac);
  const std::array<std::size_t, 1> t{0};
  EXPECT_THROW(project(vacuum, t, basis_projector(3, 1), true), EmptyBranchError);
  EXPECT_NO_THROW(project(vacuum, t, basis_projector(3, 1), false));
  EXPECT_THROW(project(vacuum, t, CMatrix::Identity(3, 3) * 2.0, false), std::invalid_argument);
}

TEST(Project, CompleteOutcomeSetSumsToOne) {
  std::mt19937_64 rng(17);
  const HilbertSpace space({qubit_factor(), mode_factor(3)});
  for (int trial = 0; trial < 10; ++trial) {
    const MixedState rho = fixtures::random_mixed(rng, space);
    const std::array<std::size_t, 1> t{1};
    double total = 0.0;
    for (std::size_t k = 0; k < 4; ++k) total += project(rho, t, basis_projector(4, k), false).probability;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Schmidt, KnownCoefficients) {
  CVector v = CVector::Zero(4);
  v(0) = 0.6;
  v(3) = 0.8;
  const std::array<std::size_t, 1> a{0};
  const auto c = schmidt_coefficients(PureState(HilbertSpace::qubits(2), v), a);
  EXPECT_NEAR(c[0], 0.8, 1e-15);
  EXPECT_NEAR(c[1], 0.6, 1e-15);
  const auto b = schmidt_coefficients(bell_state(BellLabel::kPhiPlus), a);
  EXPECT_NEAR(b[0], 1.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(b[1], 1.0 / std::numbers::sqrt2, 1e-15);
}

TEST(Schmidt, SquaresSumToOne) {
  std::mt19937_64 rng(19);
  const HilbertSpace space({qubit_factor(), mode_factor(2), mode_factor(1)});
  for (int trial = 0; trial < 20; ++trial) {
    const PureState psi = fixtures::random_pure(rng, space);
    const std::array<std::size_t, 2> a{0, 2};
    double sum = 0.0;
    double prev = 2.0;
    for (double c : schmidt_coefficients(psi, a)) {
      EXPECT_LE(c, prev);
      prev = c;
      sum += c * c;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(MixedState, ValidatesShapeAndHermiticity) {
  EXPECT_THROW(MixedState(HilbertSpace::qubits(1), CMatrix::Identity(3, 3)), std::invalid_argument);
  CMatrix m = CMatrix::Identity(2, 2) / 2.0;
  m(0, 1) = 0.3;
  EXPECT_THROW(MixedState(HilbertSpace::qubits(1), m), std::invalid_argument);
}

TEST(ConditionOn, ExtractsSlice) {
  const PureState phi = bell_state(BellLabel::kPhiPlus);
  const std::array<std::size_t, 1> t{0};
  const std::array<std::size_t, 1> e{kExcited};
  const PureState rest = condition_on(phi, t, e);
  EXPECT_NEAR(rest.norm_squared(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(rest.amplitudes()(kExcited)), 1.0 / std::numbers::sqrt2, 1e-15);
}
