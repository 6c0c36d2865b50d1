#include "cqed/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cqed {

namespace {

void require_same_space(const HilbertSpace& a, const HilbertSpace& b) {
  if (!(a == b)) throw std::invalid_argument("states live on different spaces");
}

}  // namespace

CVector bell_vector(BellLabel label) {
  const double r = 1.0 / std::numbers::sqrt2;
  CVector v = CVector::Zero(4);
  switch (label) {
    case BellLabel::kPhiPlus: v(0) = r; v(3) = r; break;
    case BellLabel::kPhiMinus: v(0) = r; v(3) = -r; break;
    case BellLabel::kPsiPlus: v(1) = r; v(2) = r; break;
    case BellLabel::kPsiMinus: v(1) = r; v(2) = -r; break;
  }
  return v;
}

PureState bell_state(BellLabel label) {
  return PureState(HilbertSpace::qubits(2), bell_vector(label));
}

void BellDiagonal::validate() const {
  for (double w : weights()) {
    if (!(w >= -kEqualityTol)) throw std::invalid_argument("Bell weights must be non-negative");
  }
  if (std::abs(sum() - 1.0) > 1e-10) throw std::invalid_argument("Bell weights must sum to 1");
}

BellDiagonal BellDiagonal::normalized() const {
  const double s = sum();
  if (!(s > 0.0)) throw std::invalid_argument("Bell weights sum to zero");
  return {a_plus / s, a_minus / s, b_plus / s, b_minus / s};
}

MixedState BellDiagonal::to_state() const {
  const auto w = weights();
  CMatrix rho = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const CVector v = bell_vector(static_cast<BellLabel>(i));
    rho += w[static_cast<std::size_t>(i)] * v * v.adjoint();
  }
  return MixedState(HilbertSpace::qubits(2), rho);
}

BellDiagonal werner_weights(double p) {
  const double q = (1.0 - p) / 3.0;
  return {p, q, q, q};
}

BellDecomposition bell_decompose(const MixedState& state) {
  if (!(state.space() == HilbertSpace::qubits(2))) {
    throw std::invalid_argument("bell_decompose needs a two-qubit state");
  }
  CMatrix basis(4, 4);
  for (int i = 0; i < 4; ++i) basis.col(i) = bell_vector(static_cast<BellLabel>(i));
  CMatrix in_bell = basis.adjoint() * state.matrix() * basis;
  BellDecomposition out;
  out.weights = {in_bell(0, 0).real(), in_bell(1, 1).real(), in_bell(2, 2).real(),
                 in_bell(3, 3).real()};
  in_bell.diagonal().setZero();
  out.residual = in_bell.norm();
  return out;
}

double espp(const PureState& state, std::span<const std::size_t> party_a) {
  const auto c = schmidt_coefficients(state.normalized(), party_a);
  const double largest = c.front() * c.front();
  return std::clamp(2.0 * (1.0 - largest), 0.0, 1.0);
}

double espp(const MixedState& state, std::span<const std::size_t> party_a) {
  const MixedState rho = state.normalized();
  if (std::abs(rho.purity() - 1.0) > kPositivityTol) {
    throw std::invalid_argument("ESPP is defined for pure states only");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho.matrix());
  const Eigen::Index top = solver.eigenvalues().size() - 1;
  return espp(PureState(rho.space(), solver.eigenvectors().col(top)), party_a);
}

double average_espp(const std::vector<std::pair<double, PureState>>& ensemble,
                    std::span<const std::size_t> party_a) {
  if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
  double total_p = 0.0;
  double total = 0.0;
  for (const auto& [p, psi] : ensemble) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative ensemble probability");
    total_p += p;
    if (p > 0.0) total += p * espp(psi, party_a);
  }
  if (std::abs(total_p - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
  return total;
}

double negativity(const MixedState& state, std::span<const std::size_t> party) {
  const MixedState rho = state.normalized();
  const CMatrix pt = partial_transpose(rho, party);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (pt + pt.adjoint()), Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    neg += std::min(solver.eigenvalues()(i), 0.0);
  }
  return -2.0 * neg;
}

double linear_entropy(const MixedState& state) {
  const auto d = static_cast<double>(state.space().dimension());
  return d / (d - 1.0) * (1.0 - state.purity());
}

double fidelity(const PureState& reference, const PureState& state) {
  require_same_space(reference.space(), state.space());
  return std::norm(reference.amplitudes().dot(state.amplitudes())) /
         (reference.norm_squared() * state.norm_squared());
}

double fidelity(const PureState& reference, const MixedState& state) {
  require_same_space(reference.space(), state.space());
  const CVector& r = reference.amplitudes();
  const Complex v = r.dot(state.matrix() * r);
  return v.real() / (reference.norm_squared() * state.trace());
}

double uhlmann_fidelity(const MixedState& rho, const MixedState& sigma) {
  require_same_space(rho.space(), sigma.space());
  const CMatrix a = rho.normalized().matrix();
  const CMatrix b = sigma.normalized().matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> ea(0.5 * (a + a.adjoint()));
  Eigen::SelfAdjointEigenSolver<CMatrix> eb(0.5 * (b + b.adjoint()));
  auto rank = [](const Eigen::VectorXd& ev) {
    return (ev.array() > 1e-13 * ev.maxCoeff()).count();
  };
  // Work on the support of the lower-rank state so that numerically zero
  // eigenvalues do not leak in through the square roots.
  const bool a_first = rank(ea.eigenvalues()) <= rank(eb.eigenvalues());
  const auto& support = a_first ? ea : eb;
  const CMatrix& other = a_first ? b : a;
  const Eigen::VectorXd& ev = support.eigenvalues();
  const double cut = 1e-13 * ev.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut) keep.push_back(i);
  }
  CMatrix v(other.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    v.col(static_cast<Eigen::Index>(j)) =
        support.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
  }
  const CMatrix inner = v.adjoint() * other * v;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (inner + inner.adjoint()),
                                                Eigen::EigenvaluesOnly);
  const double tr = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::min(1.0, tr * tr);
}

}  // namespace cqed
