#pragma once

// Entanglement and mixedness functionals.

#include "cqed/quantum_core.hpp"

#include <array>
#include <utility>

namespace cqed {

enum class BellLabel { kPhiPlus, kPhiMinus, kPsiPlus, kPsiMinus };

/// Phi+- = (|ee> +- |gg>)/sqrt2, Psi+- = (|eg> +- |ge>)/sqrt2.
CVector bell_vector(BellLabel label);
PureState bell_state(BellLabel label);

struct BellDiagonal {
  double a_plus = 1.0;   // Phi+
  double a_minus = 0.0;  // Phi-
  double b_plus = 0.0;   // Psi+
  double b_minus = 0.0;  // Psi-

  std::array<double, 4> weights() const { return {a_plus, a_minus, b_plus, b_minus}; }
  double sum() const { return a_plus + a_minus + b_plus + b_minus; }
  /// Throws std::invalid_argument on negative weights or a sum away from 1.
  void validate() const;
  /// Same weights divided by their sum.
  BellDiagonal normalized() const;
  MixedState to_state() const;

  bool operator==(const BellDiagonal&) const = default;
};

BellDiagonal werner_weights(double p);

struct BellDecomposition {
  BellDiagonal weights;
  double residual = 0.0;  // Frobenius norm of the off-Bell-diagonal part
};

/// Requires a two-qubit state.
BellDecomposition bell_decompose(const MixedState& state);

/// Probability of converting the pure state to a maximally entangled pair of
/// qubits by LOCC: min(1, 2 (1 - largest squared Schmidt coefficient)). For a
/// Schmidt rank of at most two this is twice the smallest squared coefficient.
double espp(const PureState& state, std::span<const std::size_t> party_a);
/// Accepts only rank-one density matrices (purity within 1e-10 of 1).
double espp(const MixedState& state, std::span<const std::size_t> party_a);

/// Probability-weighted ESPP. Probabilities must sum to 1 within 1e-9.
double average_espp(const std::vector<std::pair<double, PureState>>& ensemble,
                    std::span<const std::size_t> party_a);

/// 2 |sum of negative partial-transpose eigenvalues| of the normalized state.
double negativity(const MixedState& state, std::span<const std::size_t> party);

/// d/(d-1) (1 - Tr rho^2); for two qubits (4/3)(1 - Tr rho^2).
double linear_entropy(const MixedState& state);

double fidelity(const PureState& reference, const PureState& state);
double fidelity(const PureState& reference, const MixedState& state);
/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double uhlmann_fidelity(const MixedState& rho, const MixedState& sigma);

}  // namespace cqed
