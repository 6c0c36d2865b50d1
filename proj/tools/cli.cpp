#include "cli.hpp"

#include "expression.hpp"

#include "cqed/concentration.hpp"
#include "cqed/oracle.hpp"
#include "cqed/purification.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <variant>

namespace cqed::cli {

namespace {

using nlohmann::json;
using Cell = std::variant<double, long long, std::string>;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json meta = json::object();
};

struct Common {
  std::string out_path;
  std::string format = "csv";
  double lt_max = kDefaultLambdaTMax;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double number(const std::string& text, const std::string& what) {
  try {
    const double v = evaluate(text);
    if (!std::isfinite(v)) throw std::invalid_argument("not finite");
    return v;
  } catch (const std::invalid_argument&) {
    throw UsageError("malformed value '" + text + "' for " + what);
  }
}

/// "lo:hi:n" (n evenly spaced points, both ends included) or a comma list.
std::vector<double> grid(const std::string& list, const std::string& what) {
  const std::string s = trim(list);
  if (s.empty()) throw UsageError(what + " is empty");
  std::vector<std::string> parts;
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3) throw UsageError(what + " range must be lo:hi:n");
    const double lo = number(parts[0], what);
    const double hi = number(parts[1], what);
    const double n = number(parts[2], what);
    if (n < 1 || n != std::floor(n)) throw UsageError(what + " point count must be a positive integer");
    const auto count = static_cast<long>(n);
    for (long i = 0; i < count; ++i) {
      out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw UsageError(what + " has an empty entry");
    out.push_back(number(item, what));
  }
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

std::vector<long> int_list(const std::string& list, const std::string& what) {
  std::vector<long> out;
  for (double v : grid(list, what)) {
    if (v != std::floor(v)) throw UsageError(what + " entries must be integers");
    out.push_back(static_cast<long>(v));
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void emit(const std::string& text, const Common& c, std::ostream& out) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f) throw UsageError("cannot write output file '" + c.out_path + "'");
  f << text;
  if (!f) throw UsageError("failed writing output file '" + c.out_path + "'");
}

void write_table(const Table& t, const Common& c, std::ostream& out) {
  std::ostringstream os;
  if (c.format == "csv") {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) {
                os << format_double(v);
              } else {
                os << v;
              }
            },
            row[i]);
      }
      os << '\n';
    }
  } else {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::visit([&](const auto& v) { obj[t.columns[i]] = v; }, row[i]);
      }
      rows.push_back(std::move(obj));
    }
    json doc = {{"meta", t.meta}, {"rows", std::move(rows)}};
    os << doc.dump(2) << '\n';
  }
  emit(os.str(), c, out);
}

void add_common(CLI::App* cmd, Common& c, bool with_lt_max) {
  cmd->add_option("--out", c.out_path, "Output file (default: stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  if (with_lt_max) cmd->add_option("--lt-max", c.lt_max, "Feasibility bound on lambda t");
}

json common_meta(const std::string& command, const Common& c) {
  return {{"command", command}, {"format", c.format}, {"lt_max", c.lt_max}};
}

Table concentrate_figure(const std::string* alpha_list, const std::string& bounds_list,
                         double epsilon, const Common& c, bool& all_infeasible) {
  std::vector<double> alphas;
  if (alpha_list == nullptr) {
    for (int i = 0; i < 101; ++i) alphas.push_back(i / 101.0 / std::numbers::sqrt2);
  } else {
    alphas = grid(*alpha_list, "--alpha-grid");
  }
  const auto bounds = grid(bounds_list, "--bounds");
  for (double b : bounds) {
    if (!(b > 0.0)) throw UsageError("--bounds entries must be positive");
    if (b > c.lt_max) throw UsageError("bound " + format_double(b) + " exceeds --lt-max");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw UsageError("--alpha-grid entries must lie in [0, 1]");
  }
  if (!(epsilon >= 0.0)) throw UsageError("--epsilon must be non-negative");
  Table t;
  t.columns = {"alpha", "bound", "E_S", "P_max", "lambda_t_star", "residual", "feasible",
               "branch_espp"};
  all_infeasible = true;
  for (double a : alphas) {
    for (double b : bounds) {
      const auto r = optimal_time(InputPair(a), b, epsilon);
      all_infeasible = all_infeasible && !r.feasible;
      t.rows.push_back({a, b, 2.0 * a * a, r.p_max, r.lambda_t_star, r.condition_residual,
                        static_cast<long long>(r.feasible), r.branch_espp});
    }
  }
  t.meta = common_meta("concentrate-figure", c);
  t.meta["alpha_grid"] = alphas;
  t.meta["bounds"] = bounds;
  t.meta["epsilon"] = epsilon;
  return t;
}

Table trig_circle(long k_max, const Common& c) {
  if (k_max < 0) throw UsageError("--k-max must be non-negative");
  Table t;
  t.columns = {"k", "angle", "cos", "sin"};
  for (long k = 0; k <= k_max; ++k) {
    const double theta = static_cast<double>(k) * std::numbers::pi / std::numbers::sqrt2;
    t.rows.push_back({static_cast<long long>(k), std::fmod(theta, 2.0 * std::numbers::pi),
                      std::cos(theta), std::sin(theta)});
  }
  t.meta = common_meta("trig-circle", c);
  t.meta["k_max"] = k_max;
  return t;
}

Table purify_surface(const std::string& p_list, long q_max, const Common& c) {
  const auto ps = grid(p_list, "--p-grid");
  if (q_max < 1) throw UsageError("--q-max must be at least 1");
  for (double p : ps) {
    if (!(p > 0.0 && p <= 1.0)) throw UsageError("--p-grid entries must lie in (0, 1]");
  }
  Table t;
  t.columns = {"P", "q", "A_plus", "purity", "probability", "staged_probability"};
  for (double p : ps) {
    for (long q = 1; q <= q_max; ++q) {
      const auto r = iterate_ideal(p, static_cast<int>(q));
      const double a = r.weights.a_plus;
      const double b = r.weights.b_plus;
      t.rows.push_back({p, static_cast<long long>(q), a, a * a + b * b, r.probability,
                        r.staged_probability});
    }
  }
  t.meta = common_meta("purify-surface", c);
  t.meta["p_grid"] = ps;
  t.meta["q_max"] = q_max;
  return t;
}

Table werner(const std::string& p_list, const Common& c) {
  const auto ps = grid(p_list, "--p-grid");
  for (double p : ps) {
    if (!(p > 0.5 && p <= 1.0)) throw UsageError("--p-grid entries must lie in (1/2, 1]");
  }
  const std::array<std::size_t, 1> first{0};
  Table t;
  t.columns = {"P", "round", "A_plus", "A_minus", "B_plus", "B_minus", "negativity",
               "infidelity"};
  auto row = [&](double p, const std::string& label, const BellDiagonal& w) {
    const double en = negativity(w.to_state(), first);
    t.rows.push_back({p, label, w.a_plus, w.a_minus, w.b_plus, w.b_minus, en, 1.0 - w.a_plus});
  };
  for (double p : ps) {
    row(p, "0", werner_weights(p));
    row(p, "1", werner_round_weights(p, 1));
    row(p, "2", werner_round_weights(p, 2));
    row(p, "naive-two-copy", werner_naive_two_copies(p));
    row(p, "naive-pumped", werner_naive_pumped(p));
  }
  t.meta = common_meta("werner", c);
  t.meta["p_grid"] = ps;
  return t;
}

Table mems_curve(const std::string& g_list, const Common& c) {
  const auto gs = grid(g_list, "--g-grid");
  for (double g : gs) {
    if (!(g >= 0.0 && g <= 1.0)) throw UsageError("--g-grid entries must lie in [0, 1]");
  }
  const std::array<std::size_t, 1> first{0};
  Table t;
  t.columns = {"g", "E_N_in", "S_l_in", "E_N_out", "S_l_out", "E_N_filtered", "S_l_filtered"};
  for (double g : gs) {
    const MixedState in = mems_state(g);
    const MixedState out = mems_purify(g);
    const MixedState filt = mems_purify_filtered(g);
    t.rows.push_back({g, negativity(in, first), linear_entropy(in), negativity(out, first),
                      linear_entropy(out), negativity(filt, first), linear_entropy(filt)});
  }
  t.meta = common_meta("mems-curve", c);
  t.meta["g_grid"] = gs;
  return t;
}

Table simplified(long depth, double leakage, const Common& c) {
  if (depth < 1) throw UsageError("--m-depth must be at least 1");
  Table t;
  t.columns = {"m1", "m2", "theta1", "theta2", "cos_residual", "leakage", "infidelity",
               "subspace_infidelity"};
  for (long m1 = 0; m1 <= depth; ++m1) {
    for (long m2 = 0; m2 <= depth; ++m2) {
      const SimplifiedParams sp(static_cast<int>(m1), static_cast<int>(m2));
      const auto r = simplified_round(sp, 1.0);
      t.rows.push_back({static_cast<long long>(m1), static_cast<long long>(m2), sp.theta1(),
                        sp.theta2(),
                        std::max(std::abs(std::cos(sp.theta1())), std::abs(std::cos(sp.theta2()))),
                        std::abs(std::sin(std::sqrt(3.0) * sp.theta2())), 1.0 - r.bell_fidelity,
                        1.0 - r.subspace_fidelity});
    }
  }
  t.meta = common_meta("simplified", c);
  t.meta["m_depth"] = depth;
  const auto best = choose_simplified_params(static_cast<int>(depth));
  t.meta["best"] = {{"m1", best.params.m1}, {"m2", best.params.m2},
                    {"cos_residual", best.cos_residual}};
  if (leakage >= 0.0) {
    t.meta["leakage_threshold"] = leakage;
    try {
      const auto lb = choose_simplified_params(static_cast<int>(depth), leakage);
      t.meta["best_constrained"] = {{"m1", lb.params.m1}, {"m2", lb.params.m2},
                                    {"cos_residual", lb.cos_residual},
                                    {"leakage", lb.leakage_residual}};
    } catch (const std::domain_error&) {
      t.meta["best_constrained"] = nullptr;
    }
  }
  return t;
}

Table exact_rounds(const std::string& n_list, const std::string& p_list, const Common& c) {
  const auto ns = int_list(n_list, "--n");
  const auto ps = grid(p_list, "--p-grid");
  for (long n : ns) {
    if (n < 2) throw UsageError("--n entries must be at least 2");
  }
  for (double p : ps) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("--p-grid entries must lie in [0, 1]");
  }
  const std::array<std::size_t, 1> first{0};
  Table t;
  t.columns = {"n", "P", "fidelity_to_ideal", "field_probability", "E_N_plus", "E_N_ideal"};
  for (long n : ns) {
    for (double p : ps) {
      const BellDiagonal in{p, 0.0, 1.0 - p, 0.0};
      const auto r = exact_round(static_cast<std::size_t>(n), in, in);
      const auto branches = measure_pair_pm(r.round);
      const auto ideal = measure_pair_pm(ideal_filter_round(in, in));
      t.rows.push_back({static_cast<long long>(n), p, r.fidelity_to_ideal,
                        r.round.field_projection_probability,
                        negativity(branches.first.post_state, first),
                        negativity(ideal.first.post_state, first)});
    }
  }
  t.meta = common_meta("exact-round", c);
  t.meta["n"] = ns;
  t.meta["p_grid"] = ps;
  return t;
}

std::string basis_label(const HilbertSpace& space, std::size_t index) {
  const auto strides = space.strides();
  std::string out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Factor& f = space.factor(i);
    const std::size_t d = (index / strides[i]) % f.dim;
    if (i) out += ',';
    out += f.kind == FactorKind::kQubit ? (d == kExcited ? "e" : "g")
                                        : std::to_string(f.fock_offset + d);
  }
  return out;
}

int oracle_command(const std::string& path, bool expand, bool lt_max_given, const Common& c,
                   std::ostream& out, std::ostream& err) {
  if (c.format != "json") throw UsageError("oracle output is JSON only");
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read script '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  if (expand) text = expand_symbolic(text);

  oracle::Protocol protocol;
  try {
    protocol = oracle::parse_script(text, lt_max_given ? std::optional<double>(c.lt_max)
                                                       : std::nullopt);
  } catch (const oracle::ParseError& e) {
    err << path << ": " << e.what() << '\n';
    return kExitUsage;
  }
  std::optional<oracle::RunResult> result;
  try {
    result = oracle::run(protocol);
  } catch (const EmptyBranchError& e) {
    err << path << ": " << e.what() << '\n';
    return kExitEmptyBranch;
  }
  const oracle::RunResult& r = *result;

  json steps = json::array();
  for (const auto& log : r.log) {
    json s = {{"step", log.step + 1},
              {"line", protocol.steps[log.step].line},
              {"text", log.description},
              {"measurement", log.is_measurement}};
    if (log.is_measurement) s["probability"] = log.probability;
    steps.push_back(std::move(s));
  }
  const MixedState& rho = r.final_state;
  const auto& space = rho.space();
  json factors = json::array();
  for (const auto& ref : r.factors) factors.push_back(oracle::ref_label(ref));
  json pops = json::array();
  for (Eigen::Index i = 0; i < rho.matrix().rows(); ++i) {
    const double p = rho.matrix()(i, i).real();
    if (p > 1e-12) {
      pops.push_back({{"basis", basis_label(space, static_cast<std::size_t>(i))}, {"p", p}});
    }
  }
  json final_state = {{"factors", factors},
                      {"dimension", space.dimension()},
                      {"components", r.components.size()},
                      {"purity", rho.purity()},
                      {"populations", pops}};
  if (space.size() == 2) {
    const std::array<std::size_t, 1> first{0};
    final_state["negativity"] = negativity(rho, first);
    if (std::abs(rho.purity() - 1.0) <= kPositivityTol) final_state["espp"] = espp(rho, first);
    if (space == HilbertSpace::qubits(2)) {
      const auto d = bell_decompose(rho);
      final_state["bell_weights"] = {{"phi_plus", d.weights.a_plus},
                                     {"phi_minus", d.weights.a_minus},
                                     {"psi_plus", d.weights.b_plus},
                                     {"psi_minus", d.weights.b_minus},
                                     {"residual", d.residual}};
    }
  }
  json doc = {{"script", path},
              {"lt_max", protocol.system.lambda_t_max},
              {"joint_probability", r.joint_probability},
              {"steps", steps},
              {"final_state", final_state}};
  emit(doc.dump(2) + "\n", c, out);
  return kExitOk;
}

// Appends `--key value` for every config entry whose flag is not on the
// command line. Returns the arguments without --config.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;
  std::ifstream f(config_path);
  if (!f) throw UsageError("cannot read config file '" + config_path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(config_path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const bool present = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (present) continue;
    if (key == "expand-symbolic") {
      if (value == "true" || value == "1") rest.push_back(flag);
      continue;
    }
    rest.push_back(flag);
    rest.push_back(value);
  }
  return rest;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cavity-QED entanglement concentration and purification toolkit", "cqed"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  std::string alpha_grid, bounds = "pi,5*pi,20*pi", p_grid, g_grid = "0:1:11", n_list;
  double epsilon = 1e-3, leakage = -1.0;
  long q_max = 10, k_max = 50, m_depth = 8;
  std::string script;
  bool expand = false;

  auto* conc = app.add_subcommand("concentrate-figure", "P_max versus E_S for each lambda t bound");
  auto* alpha_opt = conc->add_option("--alpha-grid", alpha_grid, "alpha values: lo:hi:n or a comma list");
  conc->add_option("--bounds", bounds, "lambda t bounds, comma list (expressions allowed)");
  conc->add_option("--epsilon", epsilon, "tolerance on the Bell condition residual");
  add_common(conc, common, true);

  auto* trig = app.add_subcommand("trig-circle", "points k pi/sqrt2 on the unit circle");
  trig->add_option("--k-max", k_max, "largest k");
  add_common(trig, common, false);

  auto* surface = app.add_subcommand("purify-surface", "iterated purification surface");
  std::string surface_p = "0.1:1:10";
  surface->add_option("--p-grid", surface_p, "P values");
  surface->add_option("--q-max", q_max, "largest iteration count");
  add_common(surface, common, false);

  auto* wer = app.add_subcommand("werner", "two-round Werner purification");
  std::string werner_p = "0.55:1:10";
  wer->add_option("--p-grid", werner_p, "P values in (1/2, 1]");
  add_common(wer, common, false);

  auto* mems = app.add_subcommand("mems-curve", "MEMS input versus purified output");
  mems->add_option("--g-grid", g_grid, "g values in [0, 1]");
  add_common(mems, common, false);

  auto* simp = app.add_subcommand("simplified", "single-photon purification scan over (m1, m2)");
  simp->add_option("--m-depth", m_depth, "largest m1 and m2");
  simp->add_option("--leakage", leakage, "threshold on |sin(sqrt3 theta2)| for the constrained choice");
  add_common(simp, common, false);

  auto* exact = app.add_subcommand("exact-round", "finite-n filter round against the ideal map");
  std::string exact_n = "10,50,100,200", exact_p = "0.75";
  exact->add_option("--n", exact_n, "photon numbers");
  exact->add_option("--p-grid", exact_p, "P values of the (P, 0, 1-P, 0) inputs");
  add_common(exact, common, false);

  auto* orc = app.add_subcommand("oracle", "run a .qps protocol script");
  orc->add_option("script", script, "protocol script")->required();
  orc->add_flag("--expand-symbolic", expand, "evaluate expressions such as 2*sqrt(2)*pi");
  common.format = "csv";
  orc->add_option("--out", common.out_path, "Output file (default: stdout)");
  std::string oracle_format = "json";
  orc->add_option("--format", oracle_format, "json");
  auto* orc_lt = orc->add_option("--lt-max", common.lt_max, "feasibility bound on lambda t");

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (!(common.lt_max > 0.0)) throw UsageError("--lt-max must be positive");
    if (*conc) {
      bool all_infeasible = false;
      write_table(concentrate_figure(alpha_opt->count() > 0 ? &alpha_grid : nullptr, bounds, epsilon, common, all_infeasible), common, out);
      if (all_infeasible) {
        err << "error: no feasible interaction time for any grid point\n";
        return kExitInfeasible;
      }
    } else if (*trig) {
      write_table(trig_circle(k_max, common), common, out);
    } else if (*surface) {
      write_table(purify_surface(surface_p, q_max, common), common, out);
    } else if (*wer) {
      write_table(werner(werner_p, common), common, out);
    } else if (*mems) {
      write_table(mems_curve(g_grid, common), common, out);
    } else if (*simp) {
      write_table(simplified(m_depth, leakage, common), common, out);
    } else if (*exact) {
      write_table(exact_rounds(exact_n, exact_p, common), common, out);
    } else if (*orc) {
      common.format = oracle_format;
      return oracle_command(script, expand, orc_lt->count() > 0, common, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const EmptyBranchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitEmptyBranch;
  } catch (const FeasibilityBoundError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace cqed::cli
