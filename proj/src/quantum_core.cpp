#include "cqed/quantum_core.hpp"

#include <algorithm>
#include <numeric>

namespace cqed {

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> indices) {
  std::vector<std::size_t> out(indices.begin(), indices.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t target_dimension(const HilbertSpace& space, std::span<const std::size_t> targets) {
  std::size_t dim = 1;
  for (auto t : targets) dim *= space.factor(t).dim;
  return dim;
}

// Left-multiplies every column of `data` by `op` acting on `targets`.
CMatrix apply_rows(const HilbertSpace& space, std::span<const std::size_t> targets,
                   const CMatrix& op, const CMatrix& data) {
  space.check_indices(targets);
  const std::size_t dim_t = target_dimension(space, targets);
  if (static_cast<std::size_t>(op.rows()) != dim_t ||
      static_cast<std::size_t>(op.cols()) != dim_t) {
    throw std::invalid_argument("operator dimension does not match target factors");
  }
  const auto target_off = space.offsets(targets);
  const auto rest = space.complement(targets);
  const auto rest_off = space.offsets(rest);

  CMatrix out = CMatrix::Zero(data.rows(), data.cols());
  CMatrix gathered(dim_t, data.cols());
  for (auto base : rest_off) {
    for (std::size_t t = 0; t < dim_t; ++t) gathered.row(t) = data.row(base + target_off[t]);
    const CMatrix mapped = op * gathered;
    for (std::size_t t = 0; t < dim_t; ++t) out.row(base + target_off[t]) = mapped.row(t);
  }
  return out;
}

void require_unitary(const CMatrix& u) {
  if (u.rows() != u.cols()) throw std::invalid_argument("unitary must be square");
  const CMatrix id = CMatrix::Identity(u.rows(), u.cols());
  if (max_abs(u.adjoint() * u - id) > kPositivityTol) {
    throw std::invalid_argument("matrix is not unitary within tolerance");
  }
}

void require_projector(const CMatrix& p) {
  if (p.rows() != p.cols()) throw std::invalid_argument("projector must be square");
  if (max_abs(p * p - p) > kPositivityTol || max_abs(p - p.adjoint()) > kPositivityTol) {
    throw std::invalid_argument("projector is not an orthogonal idempotent");
  }
}

}  // namespace

Factor qubit_factor() { return Factor{FactorKind::kQubit, 2, 0}; }

Factor mode_factor(std::size_t n_max) { return mode_window(0, n_max); }

Factor mode_window(std::size_t n_min, std::size_t n_max) {
  if (n_max <= n_min) throw std::invalid_argument("mode window needs n_max > n_min");
  return Factor{FactorKind::kMode, n_max - n_min + 1, n_min};
}

HilbertSpace::HilbertSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
  for (const auto& f : factors_) {
    if (f.dim < 2) throw std::invalid_argument("every factor needs dimension >= 2");
    if (f.kind == FactorKind::kQubit && (f.dim != 2 || f.fock_offset != 0)) {
      throw std::invalid_argument("qubit factors have dimension 2");
    }
    dimension_ *= f.dim;
  }
}

HilbertSpace HilbertSpace::qubits(std::size_t count) {
  return HilbertSpace(std::vector<Factor>(count, qubit_factor()));
}

const Factor& HilbertSpace::factor(std::size_t index) const {
  if (index >= factors_.size()) throw std::out_of_range("factor index out of range");
  return factors_[index];
}

std::vector<std::size_t> HilbertSpace::strides() const {
  std::vector<std::size_t> s(factors_.size(), 1);
  for (std::size_t i = factors_.size(); i-- > 1;) s[i - 1] = s[i] * factors_[i].dim;
  return s;
}

std::vector<std::size_t> HilbertSpace::offsets(std::span<const std::size_t> indices) const {
  check_indices(indices);
  const auto s = strides();
  std::vector<std::size_t> out{0};
  for (auto idx : indices) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * factors_[idx].dim);
    for (auto base : out) {
      for (std::size_t d = 0; d < factors_[idx].dim; ++d) next.push_back(base + d * s[idx]);
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::size_t> HilbertSpace::complement(std::span<const std::size_t> indices) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (std::find(indices.begin(), indices.end(), i) == indices.end()) out.push_back(i);
  }
  return out;
}

HilbertSpace HilbertSpace::subspace(std::span<const std::size_t> indices) const {
  check_indices(indices);
  std::vector<Factor> f;
  for (auto i : indices) f.push_back(factors_[i]);
  return HilbertSpace(std::move(f));
}

HilbertSpace HilbertSpace::concat(const HilbertSpace& other) const {
  std::vector<Factor> f = factors_;
  f.insert(f.end(), other.factors_.begin(), other.factors_.end());
  return HilbertSpace(std::move(f));
}

void HilbertSpace::check_indices(std::span<const std::size_t> indices) const {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= factors_.size()) throw std::out_of_range("factor index out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (indices[i] == indices[j]) throw std::out_of_range("repeated factor index");
    }
  }
}

PureState::PureState(HilbertSpace space, CVector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != space_.dimension()) {
    throw std::invalid_argument("amplitude vector length does not match the space");
  }
}

PureState PureState::basis(HilbertSpace space, std::span<const std::size_t> digits) {
  if (digits.size() != space.size()) throw std::invalid_argument("one digit per factor required");
  const auto s = space.strides();
  std::size_t index = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] >= space.factor(i).dim) throw std::out_of_range("basis digit out of range");
    index += digits[i] * s[i];
  }
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(space.dimension()));
  amps(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(std::move(space), std::move(amps));
}

Complex PureState::amplitude(std::span<const std::size_t> digits) const {
  if (digits.size() != space_.size()) throw std::invalid_argument("one digit per factor required");
  const auto s = space_.strides();
  std::size_t index = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] >= space_.factor(i).dim) throw std::out_of_range("basis digit out of range");
    index += digits[i] * s[i];
  }
  return amplitudes_(static_cast<Eigen::Index>(index));
}

PureState PureState::normalized() const {
  const double n2 = norm_squared();
  if (n2 < kEmptyBranchTol) throw EmptyBranchError("cannot normalize an empty branch");
  return PureState(space_, amplitudes_ / std::sqrt(n2));
}

MixedState::MixedState(HilbertSpace space, CMatrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  const auto d = static_cast<Eigen::Index>(space_.dimension());
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw std::invalid_argument("density matrix shape does not match the space");
  }
  const double scale = std::max(1.0, max_abs(matrix_));
  if (max_abs(matrix_ - matrix_.adjoint()) > kPositivityTol * scale) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
}

MixedState MixedState::from_pure(const PureState& state) {
  const CVector& v = state.amplitudes();
  return MixedState(state.space(), v * v.adjoint());
}

MixedState MixedState::maximally_mixed(HilbertSpace space) {
  const auto d = static_cast<Eigen::Index>(space.dimension());
  CMatrix m = CMatrix::Identity(d, d) / static_cast<double>(d);
  return MixedState(std::move(space), std::move(m));
}

double MixedState::purity() const {
  const double tr = trace();
  return (matrix_ * matrix_).trace().real() / (tr * tr);
}

MixedState MixedState::normalized() const {
  const double tr = trace();
  if (tr < kEmptyBranchTol) throw EmptyBranchError("cannot normalize an empty branch");
  return MixedState(space_, matrix_ / tr);
}

bool MixedState::is_density_matrix() const {
  if (max_abs(matrix_ - matrix_.adjoint()) > kEqualityTol) return false;
  if (std::abs(trace() - 1.0) > kEqualityTol) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -kPositivityTol;
}

PureState tensor(const PureState& a, const PureState& b) {
  const CVector& x = a.amplitudes();
  const CVector& y = b.amplitudes();
  CVector out(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out.segment(i * y.size(), y.size()) = x(i) * y;
  return PureState(a.space().concat(b.space()), std::move(out));
}

MixedState tensor(const MixedState& a, const MixedState& b) {
  const CMatrix& x = a.matrix();
  const CMatrix& y = b.matrix();
  CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return MixedState(a.space().concat(b.space()), std::move(out));
}

PureState apply_local_operator(const PureState& state, std::span<const std::size_t> targets,
                               const CMatrix& op) {
  CMatrix out = apply_rows(state.space(), targets, op, state.amplitudes());
  return PureState(state.space(), out.col(0));
}

MixedState apply_local_operator(const MixedState& state, std::span<const std::size_t> targets,
                                const CMatrix& op) {
  const CMatrix left = apply_rows(state.space(), targets, op, state.matrix());
  CMatrix both = apply_rows(state.space(), targets, op, left.adjoint());
  // both = op (op rho)^dagger = op rho op^dagger up to rounding; symmetrize.
  CMatrix herm = 0.5 * (both + both.adjoint());
  return MixedState(state.space(), std::move(herm));
}

PureState apply_local_unitary(const PureState& state, std::span<const std::size_t> targets,
                              const CMatrix& u) {
  require_unitary(u);
  return apply_local_operator(state, targets, u);
}

MixedState apply_local_unitary(const MixedState& state, std::span<const std::size_t> targets,
                               const CMatrix& u) {
  require_unitary(u);
  return apply_local_operator(state, targets, u);
}

MixedState partial_trace(const MixedState& state, std::span<const std::size_t> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace needs at least one kept factor");
  state.space().check_indices(keep);
  const auto kept = sorted_unique(keep);
  const auto traced = state.space().complement(kept);
  const auto keep_off = state.space().offsets(kept);
  const auto trace_off = state.space().offsets(traced);
  const auto k = static_cast<Eigen::Index>(keep_off.size());
  const CMatrix& rho = state.matrix();
  CMatrix out = CMatrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      Complex acc = 0.0;
      for (auto t : trace_off) acc += rho(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  }
  return MixedState(state.space().subspace(kept), std::move(out));
}

MixedState reduced_state(const PureState& state, std::span<const std::size_t> keep) {
  if (keep.empty()) throw std::invalid_argument("reduced_state needs at least one kept factor");
  state.space().check_indices(keep);
  const auto kept = sorted_unique(keep);
  const auto traced = state.space().complement(kept);
  const auto keep_off = state.space().offsets(kept);
  const auto trace_off = state.space().offsets(traced);
  CMatrix amps(static_cast<Eigen::Index>(keep_off.size()),
               static_cast<Eigen::Index>(trace_off.size()));
  for (std::size_t i = 0; i < keep_off.size(); ++i) {
    for (std::size_t t = 0; t < trace_off.size(); ++t) {
      amps(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          state.amplitudes()(static_cast<Eigen::Index>(keep_off[i] + trace_off[t]));
    }
  }
  return MixedState(state.space().subspace(kept), amps * amps.adjoint());
}

CMatrix partial_transpose(const MixedState& state, std::span<const std::size_t> party) {
  const auto& space = state.space();
  if (party.empty() || party.size() >= space.size()) {
    throw std::invalid_argument("partial transpose needs a proper, non-empty party");
  }
  space.check_indices(party);
  const auto rest = space.complement(party);
  const auto p_off = space.offsets(party);
  const auto r_off = space.offsets(rest);
  const CMatrix& rho = state.matrix();
  CMatrix out(rho.rows(), rho.cols());
  for (auto a : p_off) {
    for (auto ap : p_off) {
      for (auto b : r_off) {
        for (auto bp : r_off) out(a + b, ap + bp) = rho(ap + b, a + bp);
      }
    }
  }
  return out;
}

MeasurementRecord<PureState> project(const PureState& state, std::span<const std::size_t> targets,
                                     const CMatrix& projector, bool renormalize,
                                     std::string outcome) {
  require_projector(projector);
  PureState post = apply_local_operator(state, targets, projector);
  const double before = state.norm_squared();
  const double p = before > 0.0 ? post.norm_squared() / before : 0.0;
  if (renormalize) {
    if (p < kEmptyBranchTol) throw EmptyBranchError("post-selected branch is empty");
    post = post.normalized();
  }
  return {std::move(outcome), p, std::move(post)};
}

MeasurementRecord<MixedState> project(const MixedState& state,
                                      std::span<const std::size_t> targets,
                                      const CMatrix& projector, bool renormalize,
                                      std::string outcome) {
  require_projector(projector);
  MixedState post = apply_local_operator(state, targets, projector);
  const double before = state.trace();
  const double p = before > 0.0 ? post.trace() / before : 0.0;
  if (renormalize) {
    if (p < kEmptyBranchTol) throw EmptyBranchError("post-selected branch is empty");
    post = post.normalized();
  }
  return {std::move(outcome), p, std::move(post)};
}

PureState condition_on(const PureState& state, std::span<const std::size_t> targets,
                       std::span<const std::size_t> digits) {
  const auto& space = state.space();
  space.check_indices(targets);
  if (digits.size() != targets.size()) throw std::invalid_argument("one digit per target");
  if (targets.size() == space.size()) throw std::invalid_argument("cannot condition on every factor");
  const auto s = space.strides();
  std::size_t fixed = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (digits[i] >= space.factor(targets[i]).dim) throw std::out_of_range("digit out of range");
    fixed += digits[i] * s[targets[i]];
  }
  const auto rest = space.complement(targets);
  const auto r_off = space.offsets(rest);
  CVector out(static_cast<Eigen::Index>(r_off.size()));
  for (std::size_t i = 0; i < r_off.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = state.amplitudes()(static_cast<Eigen::Index>(fixed + r_off[i]));
  }
  return PureState(space.subspace(rest), std::move(out));
}

std::vector<double> schmidt_coefficients(const PureState& state,
                                         std::span<const std::size_t> party_a) {
  const auto& space = state.space();
  if (party_a.empty() || party_a.size() >= space.size()) {
    throw std::invalid_argument("Schmidt decomposition needs a proper bipartition");
  }
  space.check_indices(party_a);
  const auto rest = space.complement(party_a);
  const auto a_off = space.offsets(party_a);
  const auto b_off = space.offsets(rest);
  CMatrix m(static_cast<Eigen::Index>(a_off.size()), static_cast<Eigen::Index>(b_off.size()));
  for (std::size_t i = 0; i < a_off.size(); ++i) {
    for (std::size_t j = 0; j < b_off.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          state.amplitudes()(static_cast<Eigen::Index>(a_off[i] + b_off[j]));
    }
  }
  Eigen::JacobiSVD<CMatrix> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

CMatrix pauli_x() {
  CMatrix x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  return x;
}

CMatrix rotation_x(double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  CMatrix r(2, 2);
  r << c, Complex(0.0, -s), Complex(0.0, -s), c;
  return r;
}

CMatrix rotation_y(double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  CMatrix r(2, 2);
  r << c, -s, s, c;
  return r;
}

CMatrix rotation_z(double angle) {
  CMatrix r = CMatrix::Zero(2, 2);
  r(0, 0) = std::polar(1.0, -angle / 2.0);
  r(1, 1) = std::polar(1.0, angle / 2.0);
  return r;
}

CMatrix basis_projector(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::out_of_range("projector index out of range");
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix p = CMatrix::Zero(d, d);
  p(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return p;
}

CMatrix ket_projector(const CVector& psi) { return psi * psi.adjoint(); }

}  // namespace cqed
