#pragma once

// Composite states over qubits and truncated Fock modes, plus the primitive
// operations every protocol in this library is assembled from.
//
// Basis conventions:
//   * factor order is fixed when a HilbertSpace is built; the first factor is
//     the most significant digit of the linear index;
//   * a qubit has basis (e, g) with e at local index 0;
//   * a mode spans Fock numbers fock_offset .. fock_offset + dim - 1.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqed {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kEqualityTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kEmptyBranchTol = 1e-14;

inline constexpr std::size_t kExcited = 0;
inline constexpr std::size_t kGround = 1;

enum class FactorKind { kQubit, kMode };

struct Factor {
  FactorKind kind = FactorKind::kQubit;
  std::size_t dim = 2;
  std::size_t fock_offset = 0;  // photon number at local index 0 (modes only)

  std::size_t max_photons() const { return fock_offset + dim - 1; }
  bool operator==(const Factor&) const = default;
};

Factor qubit_factor();
/// Fock mode spanning |0> .. |n_max>.
Factor mode_factor(std::size_t n_max);
/// Fock mode spanning |n_min> .. |n_max>. Exact as long as the dynamics never
/// pushes amplitude across either edge (see jc_dynamics.hpp).
Factor mode_window(std::size_t n_min, std::size_t n_max);

class HilbertSpace {
 public:
  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<Factor> factors);

  static HilbertSpace qubits(std::size_t count);

  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(std::size_t index) const;
  std::size_t size() const { return factors_.size(); }
  std::size_t dimension() const { return dimension_; }

  /// Linear-index stride of each factor.
  std::vector<std::size_t> strides() const;
  /// Linear offsets of every basis configuration of `indices` (first index
  /// most significant), all other factors held at local index 0.
  std::vector<std::size_t> offsets(std::span<const std::size_t> indices) const;
  /// Factor indices not in `indices`, ascending.
  std::vector<std::size_t> complement(std::span<const std::size_t> indices) const;
  /// Subspace made of the factors in `indices`, in that order.
  HilbertSpace subspace(std::span<const std::size_t> indices) const;
  HilbertSpace concat(const HilbertSpace& other) const;

  /// Throws std::out_of_range on a bad or repeated index.
  void check_indices(std::span<const std::size_t> indices) const;

  bool operator==(const HilbertSpace& other) const { return factors_ == other.factors_; }

 private:
  std::vector<Factor> factors_;
  std::size_t dimension_ = 1;
};

class PureState {
 public:
  PureState(HilbertSpace space, CVector amplitudes);

  /// Product basis state; `digits` holds one local index per factor.
  static PureState basis(HilbertSpace space, std::span<const std::size_t> digits);

  const HilbertSpace& space() const { return space_; }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::span<const std::size_t> digits) const;

  double norm_squared() const { return amplitudes_.squaredNorm(); }
  /// Throws EmptyBranchError when the norm squared is below kEmptyBranchTol.
  PureState normalized() const;

 private:
  HilbertSpace space_;
  CVector amplitudes_;
};

class MixedState {
 public:
  /// Requires a square matrix of the space's dimension, Hermitian within
  /// kPositivityTol. Trace and positivity are not enforced here; callers
  /// that need them use is_density_matrix().
  MixedState(HilbertSpace space, CMatrix matrix);

  static MixedState from_pure(const PureState& state);
  static MixedState maximally_mixed(HilbertSpace space);

  const HilbertSpace& space() const { return space_; }
  const CMatrix& matrix() const { return matrix_; }

  double trace() const { return matrix_.trace().real(); }
  /// Tr(rho^2) of the trace-normalized state.
  double purity() const;
  MixedState normalized() const;
  /// Hermitian, unit trace, eigenvalues >= -kPositivityTol.
  bool is_density_matrix() const;

 private:
  HilbertSpace space_;
  CMatrix matrix_;
};

class EmptyBranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class State>
struct MeasurementRecord {
  std::string outcome;
  double probability = 0.0;
  State post_state;
};

PureState tensor(const PureState& a, const PureState& b);
MixedState tensor(const MixedState& a, const MixedState& b);

/// Applies `op` to the factors in `targets` (first target most significant).
/// No unitarity check: used for filters, Kraus operators and |chi><k| resets.
PureState apply_local_operator(const PureState& state, std::span<const std::size_t> targets,
                               const CMatrix& op);
/// rho -> op rho op^dagger on `targets`.
MixedState apply_local_operator(const MixedState& state, std::span<const std::size_t> targets,
                                const CMatrix& op);

/// Throws std::invalid_argument when `u` is not unitary within kPositivityTol
/// or its dimension differs from the product of target dimensions.
PureState apply_local_unitary(const PureState& state, std::span<const std::size_t> targets,
                              const CMatrix& u);
MixedState apply_local_unitary(const MixedState& state, std::span<const std::size_t> targets,
                               const CMatrix& u);

/// Reduced state on `keep` (returned in ascending factor order).
MixedState partial_trace(const MixedState& state, std::span<const std::size_t> keep);
MixedState reduced_state(const PureState& state, std::span<const std::size_t> keep);

/// Transposes the factors in `party` and leaves the rest untouched.
CMatrix partial_transpose(const MixedState& state, std::span<const std::size_t> party);

/// Applies the projector on `targets`. The probability is relative to the
/// input norm (or trace). With `renormalize` the post state is normalized and
/// a probability below kEmptyBranchTol raises EmptyBranchError.
MeasurementRecord<PureState> project(const PureState& state, std::span<const std::size_t> targets,
                                     const CMatrix& projector, bool renormalize,
                                     std::string outcome = {});
MeasurementRecord<MixedState> project(const MixedState& state,
                                      std::span<const std::size_t> targets,
                                      const CMatrix& projector, bool renormalize,
                                      std::string outcome = {});

/// <digits|_targets |psi>, a (generally unnormalized) state on the remaining
/// factors.
PureState condition_on(const PureState& state, std::span<const std::size_t> targets,
                       std::span<const std::size_t> digits);

/// Descending Schmidt coefficients for the split `party_a` | rest.
std::vector<double> schmidt_coefficients(const PureState& state,
                                         std::span<const std::size_t> party_a);

// Single-qubit gates in the (e, g) basis.
CMatrix pauli_x();
CMatrix rotation_x(double angle);
CMatrix rotation_y(double angle);
/// diag(exp(-i angle/2), exp(i angle/2)).
CMatrix rotation_z(double angle);

/// |index><index| on a factor of dimension `dim`.
CMatrix basis_projector(std::size_t dim, std::size_t index);
/// |psi><psi| for a normalized local vector.
CMatrix ket_projector(const CVector& psi);

}  // namespace cqed
