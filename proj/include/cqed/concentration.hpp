#pragma once

// Entanglement concentration from a non-maximally entangled atomic pair
// alpha|ee> + beta|gg> onto two cavity modes, with post-selection on the
// atomic states.

#include "cqed/jc_dynamics.hpp"
#include "cqed/measures.hpp"

#include <array>
#include <optional>
#include <string>

namespace cqed {

struct InputPair {
  double alpha = 0.0;

  /// Throws std::invalid_argument unless 0 <= alpha <= 1.
  explicit InputPair(double a);
  double beta() const;
};

struct ConcentrationOutcome {
  std::string branch;  // ee, eg, ge, gg
  PureState state;     // two-mode state, normalized unless the branch is empty
  double probability = 0.0;
  double espp = 0.0;
};

/// Branch probability of ee: alpha^2 cos^4(sqrt2 lt) + beta^2 sin^4(lt).
double symmetric_success_probability(double alpha, double lambda_t);
/// alpha cos^2(sqrt2 lt) - beta sin^2(lt); zero when the ee branch is a Bell state.
double symmetric_condition_residual(double alpha, double lambda_t);

/// Both cavities start in |1>, both atoms pass their cavity for lambda_t and
/// are measured in the (e, g) basis. Branch states come from exact evolution.
/// Requires alpha < beta.
std::array<ConcentrationOutcome, 4> symmetric_branches(const InputPair& pair, double lambda_t);

struct TimeSearchResult {
  double lambda_t_star = 0.0;
  double p_max = 0.0;
  double condition_residual = 0.0;
  std::optional<int> k;
  bool feasible = false;
  double branch_espp = 0.0;  // ESPP of the ee branch at lambda_t_star
};

/// Maximizes the ee-branch probability over lambda_t in [0, bound] subject to
/// |condition residual| <= epsilon. Grid step pi/400 with bisection and
/// golden-section refinement; ties go to the smallest lambda_t. When nothing is
/// feasible, `feasible` is false, p_max is 0 and the smallest residual found is
/// reported together with its lambda_t.
TimeSearchResult optimal_time(const InputPair& pair, double bound, double epsilon = 1e-3);

enum class KResidual {
  kSquared,  // |sin^2(k pi/sqrt2) - alpha/beta|
  kAbsSine,  // ||sin(k pi/sqrt2)| - sqrt(alpha/beta)|
};

/// Smallest k in [0, k_max] whose residual is within epsilon; lambda_t = k pi/sqrt2.
TimeSearchResult k_condition_search(const InputPair& pair, int k_max, double epsilon,
                                    KResidual form = KResidual::kSquared);

struct GaussianAlpha {
  double alpha_bar = 0.0;
  double sigma = 0.0;
};

/// Mean ee-branch probability over a Gaussian in alpha clipped to
/// [0, 1/sqrt2], by Gauss-Legendre quadrature. Requires quadrature_points >= 16.
double gaussian_average_success(const GaussianAlpha& g, double lambda_t,
                                int quadrature_points = 64);

/// Grid argmax of the ee-branch probability over lambda_t in [0, bound].
double best_success_lambda_t(double alpha, double bound, int steps);

struct AsymmetricResult {
  double lambda_t = 0.0;
  PureState bell_state;  // two-mode state after both atoms are found in g
  double probability = 0.0;
  double espp = 0.0;
};

/// Vacuum cavities, lambda_t = arcsin(sqrt(beta/alpha)). Requires alpha > beta.
AsymmetricResult asymmetric_run(const InputPair& pair);

/// Maps a two-mode state supported on {0,1} photons per mode onto two fresh
/// ground-state atoms with a lambda_t = pi/2 passage per mode. Throws
/// std::invalid_argument on support outside that subspace (tolerance 1e-10).
PureState retrieve_entanglement(const PureState& two_mode);

}  // namespace cqed
