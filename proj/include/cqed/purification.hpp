#pragma once

// Purification of Bell-diagonal pairs with cavity filters: the idealized
// n-photon filter round, its recurrence, the GHZ-like extension, Werner and
// MEMS inputs, the single-photon variant, probe-atom photon detection and the
// exact finite-n round run through the oracle.
//
// Qubit layout of a round: pair (1,2) and pair (3,4); atoms 1 and 3 pass
// cavity a, atoms 2 and 4 pass cavity b. State factor i holds qubit i+1.

#include "cqed/jc_dynamics.hpp"
#include "cqed/measures.hpp"

#include <string>
#include <utility>

namespace cqed {

struct RoundOutcome {
  MixedState post_state;
  double field_projection_probability = 0.0;
  std::string measurement_branch;  // "", "plus" or "minus"
  double cumulative_probability = 0.0;
};

/// Idealized filter on a 4-qubit state: on each cavity pair (1,3) and (2,4)
/// keeps span{eg, ge} and swaps e and g, which is what the photon-number
/// projection onto |nn> does when sqrt(n) ~ sqrt(n+1). Throws EmptyBranchError
/// when nothing survives.
RoundOutcome ideal_filter(const MixedState& four_qubit);
RoundOutcome ideal_filter_round(const BellDiagonal& left, const BellDiagonal& right);

/// Measures qubits 1 and 2 in the {|+>, |->} basis and keeps qubits 3,4.
/// Equal outcomes give the plus branch, different outcomes the minus branch.
/// Probabilities are relative to the input trace; cumulative probabilities
/// multiply in `previous`.
std::pair<RoundOutcome, RoundOutcome> measure_pair_pm(const MixedState& four_qubit,
                                                      double previous = 1.0);
std::pair<RoundOutcome, RoundOutcome> measure_pair_pm(const RoundOutcome& filtered);

/// Rz(pi) on the first qubit of a two-qubit state; maps the minus branch onto
/// the plus branch.
MixedState flip_minus_branch(const MixedState& two_qubit);

/// Bell-diagonal map of filter + plus-branch measurement, trace-normalized:
/// Phi+ ~ l+r+ + l-r-, Phi- ~ l+r- + l-r+, same for the Psi weights.
/// `probability` is the field-projection survival probability.
struct BellRound {
  BellDiagonal weights;
  double probability = 0.0;
};
BellRound bell_round(const BellDiagonal& left, const BellDiagonal& right);

struct IterateResult {
  BellDiagonal weights;
  double probability = 0.0;         // (P^q + (1-P)^q) / 2^q
  double staged_probability = 0.0;  // product of the q-1 filter survivals
};

/// q-th member of the recurrence that pumps (P, 0, 1-P, 0) with fresh copies.
IterateResult iterate_ideal(double p, int q);

struct GhzResult {
  PureState state;                 // (|egee> + |gegg>)/sqrt2
  double probability = 0.0;        // P^4 / (2 [P^2 + (1-P)^2]^2)
  MixedState literal_state;        // Rz(pi) on qubit 1 and a filter on (1,2)
  double literal_probability = 0.0;
};
GhzResult ghz_extend(double p);

MixedState werner_state(double p);

/// Round 1: filter two Werner copies. Round 2: Ry(pi/2) on both qubits of
/// two round-1 copies (exchanging Phi- and Psi+), then filter again.
/// Requires 1/2 < P <= 1.
MixedState werner_round(double p, int round);
BellDiagonal werner_round_weights(double p, int round);
/// Round-1 output filtered again without the rotations.
BellDiagonal werner_naive_two_copies(double p);
/// Werner input paired with its round-1 output, no rotations.
BellDiagonal werner_naive_pumped(double p);

MixedState mems_state(double g);
/// Closed-form purified MEMS: diagonal (1/2, 0, 0, 1/2), off-diagonal
/// 5/6 - 2/(3 sqrt(1+3g^2)).
MixedState mems_purify(double g);
/// The filter and plus-branch measurement applied to two MEMS copies.
MixedState mems_purify_filtered(double g);

struct SimplifiedParams {
  int m1 = 0;
  int m2 = 0;
  SimplifiedParams(int a, int b);
  double theta1() const;  // pi sqrt2 (m1 + 1/2)
  double theta2() const;  // (pi/sqrt2)(m2 + 1/2)
};

struct SimplifiedResult {
  MixedState state;
  PureState phi_prime;
  PureState psi_prime;
  double bell_fidelity = 0.0;      // |<Phi-|Phi'>|^2
  double subspace_fidelity = 0.0;  // same overlap with Phi' restricted to {ee, gg}
};

/// Single-photon variant with the effective maps
/// |eg> -> cos t1 cos t2 |eg> - i(-1)^m2 sin t1 |ge>, |ge> -> sin t2 |eg>.
SimplifiedResult simplified_round(const SimplifiedParams& params, double p);

/// 2x2 map on span{eg, ge} of cavity-pair (1,3) from exact JC evolution with
/// single-photon cavities, projected back onto one photon. Column j is the
/// image of basis state j (0 = eg, 1 = ge).
CMatrix simplified_effective_map(const SimplifiedParams& params);

struct SimplifiedChoice {
  SimplifiedParams params{0, 0};
  double cos_residual = 0.0;       // max(|cos t1|, |cos t2|)
  double leakage_residual = 0.0;   // |sin(sqrt3 t2)|
};

/// Exhaustive scan over 0 <= m1, m2 <= search_depth minimizing the cosine
/// residual, optionally with |sin(sqrt3 t2)| <= leakage_threshold.
SimplifiedChoice choose_simplified_params(int search_depth, double leakage_threshold = -1.0);

struct ProbeResult {
  double lambda_t = 0.0;
  double excited_probability = 0.0;
  double ground_probability = 0.0;
  PureState post_excited;  // cavity state after the atom is found in e (empty if impossible)
  PureState post_ground;
};

/// lt'' = k pi/sqrt2 with the smallest k >= 1 such that |cos(lt'')| <= threshold.
/// Throws std::domain_error when none exists below `bound`.
double probe_time(double threshold, double bound);
/// Cavity state over photon numbers 0..2 (dimension 3).
ProbeResult probe_photon_detect(const CVector& cavity, double threshold = 0.05,
                                double bound = kDefaultLambdaTMax);

struct ExactRoundResult {
  RoundOutcome round;          // 4-qubit state after |nn> projection
  double fidelity_to_ideal = 0.0;
};

/// One filter round with exact JC passages at sqrt(n) lt = pi/2 and windowed
/// cavities starting in |n>, computed by the oracle. Requires n >= 2.
ExactRoundResult exact_round(std::size_t n, const BellDiagonal& left, const BellDiagonal& right);

}  // namespace cqed
