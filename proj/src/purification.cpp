#include "cqed/purification.hpp"

#include "cqed/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace cqed {

namespace {

constexpr double kPi = std::numbers::pi;

// Projects a cavity pair onto span{eg, ge} and swaps e and g.
MixedState pair_filter(const MixedState& rho, std::size_t first, std::size_t second) {
  CMatrix keep = CMatrix::Zero(4, 4);
  keep(1, 1) = 1.0;
  keep(2, 2) = 1.0;
  CMatrix xx = CMatrix::Zero(4, 4);
  xx(0, 3) = xx(3, 0) = xx(1, 2) = xx(2, 1) = 1.0;
  const std::array<std::size_t, 2> t{first, second};
  const auto rec = project(rho, t, keep, false);
  return apply_local_unitary(rec.post_state, t, xx);
}

CMatrix pm_projector(bool same) {
  const double r = 1.0 / std::numbers::sqrt2;
  CVector plus(2), minus(2);
  plus << r, r;
  minus << r, -r;
  auto kron = [](const CVector& a, const CVector& b) {
    CVector v(4);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) v(2 * i + j) = a(i) * b(j);
    }
    return v;
  };
  if (same) return ket_projector(kron(plus, plus)) + ket_projector(kron(minus, minus));
  return ket_projector(kron(plus, minus)) + ket_projector(kron(minus, plus));
}

RoundOutcome pm_branch(const MixedState& rho, bool same, double previous) {
  const std::array<std::size_t, 2> t{0, 1};
  const std::array<std::size_t, 2> keep{2, 3};
  const auto rec = project(rho, t, pm_projector(same), false);
  MixedState reduced = partial_trace(rec.post_state, keep);
  if (rec.probability >= kEmptyBranchTol) reduced = reduced.normalized();
  return RoundOutcome{reduced, rec.probability, same ? "plus" : "minus",
                      previous * rec.probability};
}

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("P must lie in [0, 1]");
}

void require_werner(double p) {
  if (!(p > 0.5 && p <= 1.0)) throw std::invalid_argument("Werner purification needs 1/2 < P <= 1");
}

MixedState rotate_both_y(const MixedState& two_qubit) {
  const CMatrix ry = rotation_y(kPi / 2.0);
  const std::array<std::size_t, 1> q0{0};
  const std::array<std::size_t, 1> q1{1};
  return apply_local_unitary(apply_local_unitary(two_qubit, q0, ry), q1, ry);
}

MixedState filter_plus(const MixedState& left, const MixedState& right) {
  const RoundOutcome filtered = ideal_filter(tensor(left, right));
  return measure_pair_pm(filtered).first.post_state;
}

}  // namespace

RoundOutcome ideal_filter(const MixedState& four_qubit) {
  if (!(four_qubit.space() == HilbertSpace::qubits(4))) {
    throw std::invalid_argument("ideal_filter needs a 4-qubit state");
  }
  const double before = four_qubit.trace();
  const MixedState out = pair_filter(pair_filter(four_qubit, 0, 2), 1, 3);
  const double p = out.trace() / before;
  if (p < kEmptyBranchTol) throw EmptyBranchError("no component survives the field projection");
  return RoundOutcome{out.normalized(), p, "", p};
}

RoundOutcome ideal_filter_round(const BellDiagonal& left, const BellDiagonal& right) {
  left.validate();
  right.validate();
  return ideal_filter(tensor(left.to_state(), right.to_state()));
}

std::pair<RoundOutcome, RoundOutcome> measure_pair_pm(const MixedState& four_qubit,
                                                      double previous) {
  if (!(four_qubit.space() == HilbertSpace::qubits(4))) {
    throw std::invalid_argument("measure_pair_pm needs a 4-qubit state");
  }
  return {pm_branch(four_qubit, true, previous), pm_branch(four_qubit, false, previous)};
}

std::pair<RoundOutcome, RoundOutcome> measure_pair_pm(const RoundOutcome& filtered) {
  auto out = measure_pair_pm(filtered.post_state, filtered.cumulative_probability);
  out.first.field_projection_probability = filtered.field_projection_probability;
  out.second.field_projection_probability = filtered.field_projection_probability;
  return out;
}

MixedState flip_minus_branch(const MixedState& two_qubit) {
  const std::array<std::size_t, 1> q0{0};
  return apply_local_unitary(two_qubit, q0, rotation_z(kPi));
}

BellRound bell_round(const BellDiagonal& l, const BellDiagonal& r) {
  l.validate();
  r.validate();
  BellDiagonal w{l.a_plus * r.a_plus + l.a_minus * r.a_minus,
                 l.a_plus * r.a_minus + l.a_minus * r.a_plus,
                 l.b_plus * r.b_plus + l.b_minus * r.b_minus,
                 l.b_plus * r.b_minus + l.b_minus * r.b_plus};
  const double survival = w.sum() / 2.0;
  if (survival < kEmptyBranchTol) throw EmptyBranchError("no component survives the field projection");
  return {w.normalized(), survival};
}

IterateResult iterate_ideal(double p, int q) {
  require_probability(p);
  if (q < 1) throw std::invalid_argument("q must be at least 1");
  const double a = std::pow(p, q);
  const double b = std::pow(1.0 - p, q);
  const double s = a + b;
  IterateResult out;
  out.weights = {a / s, 0.0, b / s, 0.0};
  out.probability = s / std::pow(2.0, q);
  out.staged_probability = s / std::pow(2.0, q - 1);
  return out;
}

GhzResult ghz_extend(double p) {
  require_probability(p);
  const double n = p * p + (1.0 - p) * (1.0 - p);
  const BellDiagonal in{p, 0.0, 1.0 - p, 0.0};
  const MixedState rho1 = ideal_filter_round(in, in).post_state;

  const HilbertSpace space = HilbertSpace::qubits(4);
  CVector ghz = CVector::Zero(16);
  ghz(0b0100) = 1.0 / std::numbers::sqrt2;  // e g e e
  ghz(0b1011) = 1.0 / std::numbers::sqrt2;  // g e g g

  const std::array<std::size_t, 1> q0{0};
  const MixedState rotated = apply_local_unitary(rho1, q0, rotation_z(kPi));
  const MixedState filtered = pair_filter(rotated, 0, 1);
  const double literal_p = filtered.trace();

  return GhzResult{PureState(space, ghz), std::pow(p, 4) / (2.0 * n * n),
                   literal_p >= kEmptyBranchTol ? filtered.normalized() : filtered, literal_p};
}

MixedState werner_state(double p) {
  require_probability(p);
  return werner_weights(p).to_state();
}

MixedState werner_round(double p, int round) {
  require_werner(p);
  if (round != 1 && round != 2) throw std::invalid_argument("round must be 1 or 2");
  const MixedState w = werner_state(p);
  const MixedState r1 = filter_plus(w, w);
  if (round == 1) return r1;
  const MixedState rotated = rotate_both_y(r1);
  return filter_plus(rotated, rotated);
}

BellDiagonal werner_round_weights(double p, int round) {
  return bell_decompose(werner_round(p, round)).weights;
}

BellDiagonal werner_naive_two_copies(double p) {
  const MixedState r1 = werner_round(p, 1);
  return bell_decompose(filter_plus(r1, r1)).weights;
}

BellDiagonal werner_naive_pumped(double p) {
  const MixedState r1 = werner_round(p, 1);
  return bell_decompose(filter_plus(werner_state(p), r1)).weights;
}

MixedState mems_state(double g) {
  if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("g must lie in [0, 1]");
  const double s = std::sqrt(1.0 + 3.0 * g * g);
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = (1.0 + s) / 6.0;
  m(1, 1) = (2.0 - s) / 3.0;
  m(0, 3) = m(3, 0) = g / 2.0;
  return MixedState(HilbertSpace::qubits(2), m);
}

MixedState mems_purify(double g) {
  if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("g must lie in [0, 1]");
  const double s = std::sqrt(1.0 + 3.0 * g * g);
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = 0.5;
  m(0, 3) = m(3, 0) = 5.0 / 6.0 - 2.0 / (3.0 * s);
  return MixedState(HilbertSpace::qubits(2), m);
}

MixedState mems_purify_filtered(double g) {
  const MixedState m = mems_state(g);
  return filter_plus(m, m);
}

SimplifiedParams::SimplifiedParams(int a, int b) : m1(a), m2(b) {
  if (a < 0 || b < 0) throw std::invalid_argument("m1 and m2 must be non-negative");
}

double SimplifiedParams::theta1() const { return kPi * std::numbers::sqrt2 * (m1 + 0.5); }
double SimplifiedParams::theta2() const { return kPi / std::numbers::sqrt2 * (m2 + 0.5); }

SimplifiedResult simplified_round(const SimplifiedParams& params, double p) {
  require_probability(p);
  const double c1 = std::cos(params.theta1());
  const double s1 = std::sin(params.theta1());
  const double c2 = std::cos(params.theta2());
  const double s2 = std::sin(params.theta2());
  const Complex phase(0.0, -(params.m2 % 2 == 0 ? 1.0 : -1.0));  // -i(-1)^m2
  const HilbertSpace space = HilbertSpace::qubits(2);

  CVector phi = CVector::Zero(4);
  phi(0) = -s1 * s1;
  phi(1) = phi(2) = phase * c1 * c2 * s1;
  phi(3) = s2 * s2 + (c1 * c2) * (c1 * c2);
  CVector psi = CVector::Zero(4);
  psi(1) = psi(2) = phase * s1 * s2;
  psi(3) = c1 * std::sin(2.0 * params.theta2());

  const double n_phi = phi.squaredNorm();
  const double n_psi = psi.squaredNorm();
  const PureState phi_prime = PureState(space, phi).normalized();
  const PureState psi_prime = PureState(space, psi).normalized();
  const double wa = p * p * n_phi;
  const double wb = (1.0 - p) * (1.0 - p) * n_psi;
  const CMatrix rho = (wa * phi_prime.amplitudes() * phi_prime.amplitudes().adjoint() +
                       wb * psi_prime.amplitudes() * psi_prime.amplitudes().adjoint()) /
                      (wa + wb);

  CVector sub = CVector::Zero(4);
  sub(0) = phi(0);
  sub(3) = phi(3);
  const PureState phi_minus = bell_state(BellLabel::kPhiMinus);
  return SimplifiedResult{MixedState(space, rho), phi_prime, psi_prime,
                          fidelity(phi_minus, phi_prime),
                          fidelity(phi_minus, PureState(space, sub))};
}

CMatrix simplified_effective_map(const SimplifiedParams& params) {
  const HilbertSpace space({qubit_factor(), qubit_factor(), mode_factor(3)});
  const double lt1 = (params.m1 + 0.5) * kPi;
  const double lt2 = (params.m2 + 0.5) * kPi / std::numbers::sqrt2;
  const double inf = std::numeric_limits<double>::infinity();
  CMatrix map(2, 2);
  const std::array<std::array<std::size_t, 3>, 2> inputs{
      {{kExcited, kGround, 1}, {kGround, kExcited, 1}}};
  const std::array<std::size_t, 1> mode{2};
  const std::array<std::size_t, 1> one{1};
  for (int j = 0; j < 2; ++j) {
    PureState psi = PureState::basis(space, inputs[static_cast<std::size_t>(j)]);
    psi = passage(psi, 0, 2, lt1, inf);
    psi = passage(psi, 1, 2, lt2, inf);
    const PureState atoms = condition_on(psi, mode, one);
    map(0, j) = atoms.amplitudes()(1);  // eg
    map(1, j) = atoms.amplitudes()(2);  // ge
  }
  return map;
}

SimplifiedChoice choose_simplified_params(int search_depth, double leakage_threshold) {
  if (search_depth < 1) throw std::invalid_argument("search_depth must be at least 1");
  bool found = false;
  SimplifiedChoice best;
  for (int m1 = 0; m1 <= search_depth; ++m1) {
    for (int m2 = 0; m2 <= search_depth; ++m2) {
      const SimplifiedParams sp(m1, m2);
      const double res = std::max(std::abs(std::cos(sp.theta1())), std::abs(std::cos(sp.theta2())));
      const double leak = std::abs(std::sin(std::sqrt(3.0) * sp.theta2()));
      if (leakage_threshold >= 0.0 && leak > leakage_threshold) continue;
      if (!found || res < best.cos_residual) {
        best = SimplifiedChoice{sp, res, leak};
        found = true;
      }
    }
  }
  if (!found) throw std::domain_error("no (m1, m2) within the search depth meets the leakage threshold");
  return best;
}

double probe_time(double threshold, double bound) {
  for (int k = 1;; ++k) {
    const double lt = k * kPi / std::numbers::sqrt2;
    if (lt > bound) break;
    if (std::abs(std::cos(lt)) <= threshold) return lt;
  }
  throw std::domain_error("no probe interaction time below the bound meets the threshold");
}

ProbeResult probe_photon_detect(const CVector& cavity, double threshold, double bound) {
  if (cavity.size() != 3) throw std::invalid_argument("probe input must span 0..2 photons");
  const double norm = cavity.squaredNorm();
  if (norm < kEmptyBranchTol) throw std::invalid_argument("probe input has zero norm");
  const double lt = probe_time(threshold, bound);
  const HilbertSpace space({qubit_factor(), mode_factor(2)});
  CVector amps = CVector::Zero(6);
  amps.segment(static_cast<Eigen::Index>(kGround) * 3, 3) = cavity / std::sqrt(norm);
  PureState psi = passage(PureState(space, amps), 0, 1, lt, bound);
  const std::array<std::size_t, 1> atom{0};
  const std::array<std::size_t, 1> e{kExcited};
  const std::array<std::size_t, 1> g{kGround};
  PureState up = condition_on(psi, atom, e);
  PureState down = condition_on(psi, atom, g);
  ProbeResult out{lt, up.norm_squared(), down.norm_squared(), up, down};
  if (out.excited_probability >= kEmptyBranchTol) out.post_excited = up.normalized();
  if (out.ground_probability >= kEmptyBranchTol) out.post_ground = down.normalized();
  return out;
}

ExactRoundResult exact_round(std::size_t n, const BellDiagonal& left, const BellDiagonal& right) {
  if (n < 2) throw std::invalid_argument("exact_round needs n >= 2");
  left.validate();
  right.validate();
  using namespace oracle;
  Protocol p;
  p.system.atoms = 4;
  p.system.modes.assign(2, ModeDecl{n - 2, n + 2, true});
  const double lt = kPi / (2.0 * std::sqrt(static_cast<double>(n)));
  p.steps = {
      {PrepareBell{0, 1, left.weights()}},
      {PrepareBell{2, 3, right.weights()}},
      {PrepareCavity{0, n}},
      {PrepareCavity{1, n}},
      {Interact{0, 0, lt}},
      {Interact{2, 0, lt}},
      {Interact{1, 1, lt}},
      {Interact{3, 1, lt}},
      {MeasureCavity{0, n}},
      {MeasureCavity{1, n}},
      {TraceOut{{Ref{true, 0}, Ref{true, 1}}}},
  };
  const RunResult r = run(p);
  RoundOutcome round{r.final_state, r.joint_probability, "", r.joint_probability};
  const RoundOutcome ideal = ideal_filter_round(left, right);
  return ExactRoundResult{round, uhlmann_fidelity(r.final_state, ideal.post_state)};
}

}  // namespace cqed
