#pragma once

// Resonant Jaynes-Cummings evolution of one qubit and one Fock mode in the
// interaction picture. The propagator couples |e,n> and |g,n+1> with Rabi
// angle lambda_t * sqrt(n+1) and keeps the -i phases exactly.

#include "cqed/quantum_core.hpp"

#include <numbers>

namespace cqed {

inline constexpr double kDefaultLambdaTMax = 100.0 * std::numbers::pi;

class FeasibilityBoundError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct JCParams {
  double lambda_t = 0.0;
  std::size_t n_max = 1;
  std::size_t n_min = 0;
  double lambda_t_max = kDefaultLambdaTMax;  // set to infinity to lift the bound
};

/// Unitary on qubit (x) mode, local index q * m + k with m = n_max - n_min + 1
/// and photon number n_min + k. Pairs that would leave the window (|e,n_max>
/// and, for n_min > 0, |g,n_min>) are left invariant, so the matrix is exactly
/// unitary and exact whenever no amplitude reaches those states.
///
/// Throws FeasibilityBoundError when lambda_t > lambda_t_max and
/// std::invalid_argument for negative lambda_t or an empty window.
CMatrix jc_propagator(const JCParams& params);

/// Applies the propagator to the (atom, mode) factor pair. Throws
/// std::invalid_argument when the factor kinds do not match.
PureState passage(const PureState& state, std::size_t atom, std::size_t mode, double lambda_t,
                  double lambda_t_max = kDefaultLambdaTMax);
MixedState passage(const MixedState& state, std::size_t atom, std::size_t mode, double lambda_t,
                   double lambda_t_max = kDefaultLambdaTMax);

/// Expectation of sum_atoms sigma+ sigma- + sum_modes n.
double mean_excitation(const PureState& state);

}  // namespace cqed
