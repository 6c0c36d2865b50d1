#include "cqed/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cqed {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGridStep = kPi / 400.0;

template <class F>
double bisect(F&& f, double lo, double hi, int iterations = 80) {
  // f(lo) and f(hi) have opposite signs (or one is zero).
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm <= 0.0) == (flo <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Boundary of {g <= 0} between `out` (g > 0) and `in` (g <= 0); returns a
// point that is still inside.
template <class G>
double inner_edge(G&& g, double out, double in, int iterations = 80) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (out + in);
    if (g(mid) <= 0.0) {
      in = mid;
    } else {
      out = mid;
    }
  }
  return in;
}

template <class F>
double golden_min(F&& f, double lo, double hi, int iterations = 100) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iterations && hi - lo > 1e-15; ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

HilbertSpace two_atoms_two_modes(std::size_t n_min, std::size_t n_max) {
  return HilbertSpace({qubit_factor(), qubit_factor(), mode_window(n_min, n_max),
                       mode_window(n_min, n_max)});
}

std::size_t space_index(const HilbertSpace& space, std::initializer_list<std::size_t> digits) {
  const auto s = space.strides();
  std::size_t idx = 0;
  std::size_t i = 0;
  for (auto d : digits) idx += d * s[i++];
  return idx;
}

const char* kBranchLabels[4] = {"ee", "eg", "ge", "gg"};

}  // namespace

InputPair::InputPair(double a) : alpha(a) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}

double InputPair::beta() const { return std::sqrt(std::max(0.0, 1.0 - alpha * alpha)); }

double symmetric_success_probability(double alpha, double lambda_t) {
  const double beta2 = 1.0 - alpha * alpha;
  const double c = std::cos(std::numbers::sqrt2 * lambda_t);
  const double s = std::sin(lambda_t);
  return alpha * alpha * c * c * c * c + beta2 * s * s * s * s;
}

double symmetric_condition_residual(double alpha, double lambda_t) {
  const double beta = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  const double c = std::cos(std::numbers::sqrt2 * lambda_t);
  const double s = std::sin(lambda_t);
  return alpha * c * c - beta * s * s;
}

std::array<ConcentrationOutcome, 4> symmetric_branches(const InputPair& pair, double lambda_t) {
  if (!(pair.alpha < pair.beta())) {
    throw std::invalid_argument("symmetric scheme requires alpha < beta");
  }
  const HilbertSpace space = two_atoms_two_modes(0, 2);
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(space.dimension()));
  amps(static_cast<Eigen::Index>(space_index(space, {kExcited, kExcited, 1, 1}))) = pair.alpha;
  amps(static_cast<Eigen::Index>(space_index(space, {kGround, kGround, 1, 1}))) = pair.beta();
  PureState psi(space, amps);
  psi = passage(psi, 0, 2, lambda_t, std::numeric_limits<double>::infinity());
  psi = passage(psi, 1, 3, lambda_t, std::numeric_limits<double>::infinity());

  std::array<ConcentrationOutcome, 4> out{
      ConcentrationOutcome{"", psi, 0.0, 0.0}, ConcentrationOutcome{"", psi, 0.0, 0.0},
      ConcentrationOutcome{"", psi, 0.0, 0.0}, ConcentrationOutcome{"", psi, 0.0, 0.0}};
  const std::array<std::size_t, 2> atoms{0, 1};
  const std::array<std::size_t, 1> mode_a{0};
  for (std::size_t b = 0; b < 4; ++b) {
    const std::array<std::size_t, 2> digits{b / 2, b % 2};
    PureState branch = condition_on(psi, atoms, digits);
    auto& o = out[b];
    o.branch = kBranchLabels[b];
    o.probability = branch.norm_squared();
    if (o.probability >= kEmptyBranchTol) {
      o.state = branch.normalized();
      o.espp = espp(o.state, mode_a);
    } else {
      o.state = branch;
      o.espp = 0.0;
    }
  }
  return out;
}

TimeSearchResult optimal_time(const InputPair& pair, double bound, double epsilon) {
  if (!(bound > 0.0)) throw std::invalid_argument("bound must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  const double alpha = pair.alpha;
  auto f = [alpha](double x) { return symmetric_condition_residual(alpha, x); };
  auto absf = [&](double x) { return std::abs(f(x)); };
  auto excess = [&](double x) { return absf(x) - epsilon; };
  auto neg_p = [alpha](double x) { return -symmetric_success_probability(alpha, x); };

  TimeSearchResult best;
  double best_residual = std::numeric_limits<double>::infinity();
  double best_residual_x = 0.0;
  bool found = false;

  auto consider = [&](double x) {
    const double p = symmetric_success_probability(alpha, x);
    if (!found || p > best.p_max) {
      best.p_max = p;
      best.lambda_t_star = x;
      best.condition_residual = f(x);
      found = true;
    }
  };

  const auto cells = static_cast<long>(std::ceil(bound / kGridStep));
  for (long i = 0; i < cells; ++i) {
    const double a = static_cast<double>(i) * kGridStep;
    const double b = std::min(bound, static_cast<double>(i + 1) * kGridStep);
    if (!(b > a)) continue;
    double center;
    if (f(a) * f(b) <= 0.0) {
      center = bisect(f, a, b);
    } else {
      center = golden_min(absf, a, b);
    }
    for (double x : {a, center, b}) {
      if (absf(x) < best_residual) {
        best_residual = absf(x);
        best_residual_x = x;
      }
    }
    if (excess(center) > 0.0) continue;
    const double lo = excess(a) <= 0.0 ? a : inner_edge(excess, a, center);
    const double hi = excess(b) <= 0.0 ? b : inner_edge(excess, b, center);
    for (double x : {lo, hi, center}) consider(x);
    if (hi > lo) {
      const double x = golden_min(neg_p, lo, hi);
      if (excess(x) <= 0.0) consider(x);
    }
  }

  if (!found) {
    best.feasible = false;
    best.p_max = 0.0;
    best.lambda_t_star = best_residual_x;
    best.condition_residual = f(best_residual_x);
    return best;
  }
  best.feasible = true;
  if (pair.alpha < pair.beta()) {
    best.branch_espp = symmetric_branches(pair, best.lambda_t_star)[0].espp;
  }
  return best;
}

TimeSearchResult k_condition_search(const InputPair& pair, int k_max, double epsilon,
                                    KResidual form) {
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  const double alpha = pair.alpha;
  const double beta = pair.beta();
  if (!(beta > 0.0)) throw std::invalid_argument("k search needs beta > 0");
  const double ratio = alpha / beta;
  auto residual = [&](int k) {
    const double s = std::sin(static_cast<double>(k) * kPi / std::numbers::sqrt2);
    return form == KResidual::kSquared ? std::abs(s * s - ratio)
                                       : std::abs(std::abs(s) - std::sqrt(ratio));
  };
  TimeSearchResult out;
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k <= k_max; ++k) {
    const double r = residual(k);
    if (r <= epsilon) {
      best_k = k;
      best = r;
      out.feasible = true;
      break;
    }
    if (r < best) {
      best = r;
      best_k = k;
    }
  }
  out.k = best_k;
  out.lambda_t_star = static_cast<double>(best_k) * kPi / std::numbers::sqrt2;
  out.condition_residual = best;
  if (out.feasible) {
    out.p_max = symmetric_success_probability(alpha, out.lambda_t_star);
    if (alpha < beta) out.branch_espp = symmetric_branches(pair, out.lambda_t_star)[0].espp;
  }
  return out;
}

double gaussian_average_success(const GaussianAlpha& g, double lambda_t, int quadrature_points) {
  if (quadrature_points < 16) throw std::invalid_argument("need at least 16 quadrature points");
  if (!(g.sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  const double top = 1.0 / std::numbers::sqrt2;
  if (g.sigma == 0.0) {
    return symmetric_success_probability(std::clamp(g.alpha_bar, 0.0, top), lambda_t);
  }
  const double lo = std::max(0.0, g.alpha_bar - 8.0 * g.sigma);
  const double hi = std::min(top, g.alpha_bar + 8.0 * g.sigma);
  if (!(hi > lo)) throw std::invalid_argument("Gaussian has no mass on [0, 1/sqrt2]");

  // Gauss-Legendre nodes by Newton iteration on P_n.
  const int n = quadrature_points;
  double num = 0.0;
  double den = 0.0;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(kPi * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const double a = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x;
    const double z = (a - g.alpha_bar) / g.sigma;
    const double density = std::exp(-0.5 * z * z);
    num += w * density * symmetric_success_probability(a, lambda_t);
    den += w * density;
  }
  return num / den;
}

double best_success_lambda_t(double alpha, double bound, int steps) {
  if (steps < 1 || !(bound > 0.0)) throw std::invalid_argument("bad lambda_t grid");
  double best_x = 0.0;
  double best_p = -1.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = bound * static_cast<double>(i) / steps;
    const double p = symmetric_success_probability(alpha, x);
    if (p > best_p) {
      best_p = p;
      best_x = x;
    }
  }
  return best_x;
}

AsymmetricResult asymmetric_run(const InputPair& pair) {
  const double beta = pair.beta();
  if (!(pair.alpha > beta)) throw std::invalid_argument("asymmetric scheme requires alpha > beta");
  AsymmetricResult out{std::asin(std::sqrt(beta / pair.alpha)),
                       PureState(HilbertSpace::qubits(1), CVector::Zero(2)), 0.0, 0.0};
  const HilbertSpace space = two_atoms_two_modes(0, 1);
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(space.dimension()));
  amps(static_cast<Eigen::Index>(space_index(space, {kExcited, kExcited, 0, 0}))) = pair.alpha;
  amps(static_cast<Eigen::Index>(space_index(space, {kGround, kGround, 0, 0}))) = beta;
  PureState psi(space, amps);
  psi = passage(psi, 0, 2, out.lambda_t);
  psi = passage(psi, 1, 3, out.lambda_t);
  const std::array<std::size_t, 2> atoms{0, 1};
  const std::array<std::size_t, 2> gg{kGround, kGround};
  PureState branch = condition_on(psi, atoms, gg);
  out.probability = branch.norm_squared();
  if (out.probability < kEmptyBranchTol) {
    out.bell_state = branch;
    return out;
  }
  out.bell_state = branch.normalized();
  const std::array<std::size_t, 1> mode_a{0};
  out.espp = espp(out.bell_state, mode_a);
  return out;
}

PureState retrieve_entanglement(const PureState& two_mode) {
  const auto& in_space = two_mode.space();
  if (in_space.size() != 2 || in_space.factor(0).kind != FactorKind::kMode ||
      in_space.factor(1).kind != FactorKind::kMode) {
    throw std::invalid_argument("retrieve_entanglement needs a two-mode state");
  }
  const HilbertSpace space = two_atoms_two_modes(0, 1);
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(space.dimension()));
  const Factor& fa = in_space.factor(0);
  const Factor& fb = in_space.factor(1);
  for (std::size_t i = 0; i < fa.dim; ++i) {
    for (std::size_t j = 0; j < fb.dim; ++j) {
      const std::array<std::size_t, 2> d{i, j};
      const Complex c = two_mode.amplitude(d);
      const std::size_t na = fa.fock_offset + i;
      const std::size_t nb = fb.fock_offset + j;
      if (na > 1 || nb > 1) {
        if (std::abs(c) > 1e-10) {
          throw std::invalid_argument("state has support outside {0,1} photons per mode");
        }
        continue;
      }
      amps(static_cast<Eigen::Index>(space_index(space, {kGround, kGround, na, nb}))) = c;
    }
  }
  PureState psi(space, amps);
  psi = passage(psi, 0, 2, kPi / 2.0);
  psi = passage(psi, 1, 3, kPi / 2.0);
  const std::array<std::size_t, 2> modes{2, 3};
  const std::array<std::size_t, 2> vacuum{0, 0};
  return condition_on(psi, modes, vacuum).normalized();
}

}  // namespace cqed
