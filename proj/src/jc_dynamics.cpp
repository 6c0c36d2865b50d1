#include "cqed/jc_dynamics.hpp"

#include <array>
#include <cmath>

namespace cqed {

namespace {

CMatrix embedded_propagator(const HilbertSpace& space, std::size_t atom, std::size_t mode,
                            double lambda_t, double lambda_t_max) {
  const Factor& a = space.factor(atom);
  const Factor& f = space.factor(mode);
  if (a.kind != FactorKind::kQubit) throw std::invalid_argument("passage atom is not a qubit");
  if (f.kind != FactorKind::kMode) throw std::invalid_argument("passage mode is not a Fock mode");
  return jc_propagator(JCParams{lambda_t, f.max_photons(), f.fock_offset, lambda_t_max});
}

}  // namespace

CMatrix jc_propagator(const JCParams& p) {
  if (!(p.lambda_t >= 0.0)) throw std::invalid_argument("lambda_t must be non-negative");
  if (p.n_max <= p.n_min) throw std::invalid_argument("Fock window needs n_max > n_min");
  if (p.lambda_t > p.lambda_t_max) {
    throw FeasibilityBoundError("lambda_t exceeds the feasibility bound");
  }
  const auto m = static_cast<Eigen::Index>(p.n_max - p.n_min + 1);
  CMatrix u = CMatrix::Identity(2 * m, 2 * m);
  const Eigen::Index e = static_cast<Eigen::Index>(kExcited) * m;
  const Eigen::Index g = static_cast<Eigen::Index>(kGround) * m;
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    const double n = static_cast<double>(p.n_min) + static_cast<double>(k);
    const double angle = p.lambda_t * std::sqrt(n + 1.0);
    const double c = std::cos(angle);
    const Complex s(0.0, -std::sin(angle));
    u(e + k, e + k) = c;
    u(g + k + 1, g + k + 1) = c;
    u(e + k, g + k + 1) = s;
    u(g + k + 1, e + k) = s;
  }
  return u;
}

PureState passage(const PureState& state, std::size_t atom, std::size_t mode, double lambda_t,
                  double lambda_t_max) {
  const std::array<std::size_t, 2> targets{atom, mode};
  state.space().check_indices(targets);
  return apply_local_operator(
      state, targets, embedded_propagator(state.space(), atom, mode, lambda_t, lambda_t_max));
}

MixedState passage(const MixedState& state, std::size_t atom, std::size_t mode, double lambda_t,
                   double lambda_t_max) {
  const std::array<std::size_t, 2> targets{atom, mode};
  state.space().check_indices(targets);
  return apply_local_operator(
      state, targets, embedded_propagator(state.space(), atom, mode, lambda_t, lambda_t_max));
}

double mean_excitation(const PureState& state) {
  const auto& space = state.space();
  double total = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Factor& f = space.factor(i);
    const std::array<std::size_t, 1> target{i};
    const auto off = space.offsets(target);
    const auto rest = space.complement(target);
    const auto rest_off = space.offsets(rest);
    for (std::size_t d = 0; d < f.dim; ++d) {
      double weight = 0.0;
      for (auto base : rest_off) weight += std::norm(state.amplitudes()(static_cast<Eigen::Index>(base + off[d])));
      const double level = f.kind == FactorKind::kQubit
                               ? (d == kExcited ? 1.0 : 0.0)
                               : static_cast<double>(f.fock_offset + d);
      total += level * weight;
    }
  }
  return total / state.norm_squared();
}

}  // namespace cqed
