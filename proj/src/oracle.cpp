#include "cqed/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>

namespace cqed::oracle {

namespace {

struct Token {
  std::string text;
  std::size_t column = 0;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#') {
      ++i;
    }
    out.push_back({std::string(line.substr(start, i - start)), start + 1});
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string complex_text(Complex c) {
  if (c.imag() == 0.0) return fmt(c.real());
  return fmt(c.real()) + ":" + fmt(c.imag());
}

std::string atom_text(std::size_t i) { return std::to_string(i + 1); }
std::string mode_text(std::size_t i) { return std::string(1, static_cast<char>('a' + i)); }

const char* basis_text(Basis b) {
  switch (b) {
    case Basis::kZ: return "z";
    case Basis::kX: return "x";
    case Basis::kPm: return "pm";
  }
  return "z";
}

const char* outcome_text(Basis b, bool first) {
  if (b == Basis::kZ) return first ? "e" : "g";
  return first ? "plus" : "minus";
}

std::string step_text(const StepKind& kind) {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PreparePair>) {
          os << "prepare-pair " << atom_text(s.atom_a) << ' ' << atom_text(s.atom_b) << " alpha "
             << fmt(s.alpha);
        } else if constexpr (std::is_same_v<T, PrepareAtoms>) {
          os << "prepare-atoms";
          for (auto a : s.atoms) os << ' ' << atom_text(a);
          os << " amplitudes";
          for (auto c : s.amplitudes) os << ' ' << complex_text(c);
        } else if constexpr (std::is_same_v<T, PrepareBell>) {
          os << "prepare-bell " << atom_text(s.atom_a) << ' ' << atom_text(s.atom_b) << " weights";
          for (double w : s.weights) os << ' ' << fmt(w);
        } else if constexpr (std::is_same_v<T, PrepareCavity>) {
          os << "prepare-cavity " << mode_text(s.mode) << " fock " << s.photons;
        } else if constexpr (std::is_same_v<T, Interact>) {
          os << "interact " << atom_text(s.atom) << ' ' << mode_text(s.mode) << " lt "
             << fmt(s.lambda_t);
        } else if constexpr (std::is_same_v<T, Rotate>) {
          const char* axis = s.axis == Axis::kX ? "x" : (s.axis == Axis::kY ? "y" : "z");
          os << "rotate-" << axis << ' ' << atom_text(s.atom) << " angle " << fmt(s.angle);
        } else if constexpr (std::is_same_v<T, MeasureAtom>) {
          os << "measure-atom " << atom_text(s.atom) << " basis " << basis_text(s.basis)
             << " outcome " << outcome_text(s.basis, s.first_outcome);
        } else if constexpr (std::is_same_v<T, MeasureCavity>) {
          os << "measure-cavity " << mode_text(s.mode) << " fock " << s.photons;
        } else if constexpr (std::is_same_v<T, TraceOut>) {
          os << "trace-out";
          for (const auto& r : s.refs) os << ' ' << ref_label(r);
        }
      },
      kind);
  return os.str();
}

// Tracks which factors are still present and the reachable photon range of
// every mode while a protocol is checked.
class Checker {
 public:
  explicit Checker(const SystemDecl& sys)
      : sys_(sys), atom_gone_(sys.atoms, false), mode_gone_(sys.modes.size(), false) {
    for (const auto& m : sys.modes) range_.push_back({m.n_min, m.n_min});
  }

  // Each check returns an error message, empty when fine, and `arg` names the
  // offending argument position (0-based among the step's values).
  std::string check(const StepKind& kind, std::size_t& arg) {
    arg = 0;
    return std::visit([&](const auto& s) { return check_step(s, arg); }, kind);
  }

 private:
  std::string atom_ok(std::size_t atom) const {
    if (atom >= sys_.atoms) return "atom index " + atom_text(atom) + " out of range";
    if (atom_gone_[atom]) return "atom " + atom_text(atom) + " was traced out";
    return {};
  }
  std::string mode_ok(std::size_t mode) const {
    if (mode >= sys_.modes.size()) return "cavity " + mode_text(mode) + " out of range";
    if (mode_gone_[mode]) return "cavity " + mode_text(mode) + " was traced out";
    return {};
  }
  std::string photons_ok(std::size_t mode, std::size_t n) const {
    const auto& m = sys_.modes[mode];
    if (n < m.n_min || n > m.n_max) return "photon number outside the cavity's truncation";
    return {};
  }
  std::string pair_ok(std::size_t a, std::size_t b, std::size_t& arg) const {
    if (auto e = atom_ok(a); !e.empty()) return arg = 0, e;
    if (auto e = atom_ok(b); !e.empty()) return arg = 1, e;
    if (a == b) return arg = 1, std::string("the two atoms must differ");
    return {};
  }

  std::string check_step(const PreparePair& s, std::size_t& arg) {
    if (auto e = pair_ok(s.atom_a, s.atom_b, arg); !e.empty()) return e;
    arg = 2;
    if (!(s.alpha >= 0.0 && s.alpha <= 1.0)) return "alpha must lie in [0, 1]";
    return {};
  }
  std::string check_step(const PrepareAtoms& s, std::size_t& arg) {
    if (s.atoms.empty()) return "prepare-atoms needs at least one atom";
    for (std::size_t i = 0; i < s.atoms.size(); ++i) {
      arg = i;
      if (auto e = atom_ok(s.atoms[i]); !e.empty()) return e;
      for (std::size_t j = 0; j < i; ++j) {
        if (s.atoms[j] == s.atoms[i]) return "repeated atom";
      }
    }
    arg = s.atoms.size();
    if (s.atoms.size() > 16 || s.amplitudes.size() != (std::size_t{1} << s.atoms.size())) {
      return "expected 2^(number of atoms) amplitudes";
    }
    double norm = 0.0;
    for (auto c : s.amplitudes) norm += std::norm(c);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-9) return "amplitudes must be normalized";
    return {};
  }
  std::string check_step(const PrepareBell& s, std::size_t& arg) {
    if (auto e = pair_ok(s.atom_a, s.atom_b, arg); !e.empty()) return e;
    arg = 2;
    double sum = 0.0;
    for (double w : s.weights) {
      if (!(w >= 0.0)) return "Bell weights must be non-negative";
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10) return "Bell weights must sum to 1";
    return {};
  }
  std::string check_step(const PrepareCavity& s, std::size_t& arg) {
    if (auto e = mode_ok(s.mode); !e.empty()) return e;
    arg = 1;
    if (auto e = photons_ok(s.mode, s.photons); !e.empty()) return e;
    range_[s.mode] = {s.photons, s.photons};
    return {};
  }
  std::string check_step(const Interact& s, std::size_t& arg) {
    if (auto e = atom_ok(s.atom); !e.empty()) return e;
    arg = 1;
    if (auto e = mode_ok(s.mode); !e.empty()) return e;
    arg = 2;
    if (!(s.lambda_t >= 0.0) || !std::isfinite(s.lambda_t)) return "lt must be a finite value >= 0";
    if (s.lambda_t > sys_.lambda_t_max) return "lt exceeds the feasibility bound (see lt-max)";
    arg = 1;
    const auto& m = sys_.modes[s.mode];
    auto& r = range_[s.mode];
    if (r[1] + 1 > m.n_max) return "truncation too small: photons may reach " + std::to_string(r[1] + 1);
    if (m.n_min > 0 && r[0] < m.n_min + 1) {
      return "window too narrow: photons may drop to " + std::to_string(r[0] - 1);
    }
    r = {r[0] == 0 ? 0 : r[0] - 1, r[1] + 1};
    return {};
  }
  std::string check_step(const Rotate& s, std::size_t& arg) {
    if (auto e = atom_ok(s.atom); !e.empty()) return e;
    arg = 1;
    if (!std::isfinite(s.angle)) return "angle must be finite";
    return {};
  }
  std::string check_step(const MeasureAtom& s, std::size_t&) { return atom_ok(s.atom); }
  std::string check_step(const MeasureCavity& s, std::size_t& arg) {
    if (auto e = mode_ok(s.mode); !e.empty()) return e;
    arg = 1;
    if (auto e = photons_ok(s.mode, s.photons); !e.empty()) return e;
    range_[s.mode] = {s.photons, s.photons};
    return {};
  }
  std::string check_step(const TraceOut& s, std::size_t& arg) {
    if (s.refs.empty()) return "trace-out needs at least one factor";
    std::size_t remaining = 0;
    for (bool g : atom_gone_) remaining += g ? 0 : 1;
    for (bool g : mode_gone_) remaining += g ? 0 : 1;
    for (std::size_t i = 0; i < s.refs.size(); ++i) {
      arg = i;
      const Ref& r = s.refs[i];
      if (auto e = r.is_mode ? mode_ok(r.index) : atom_ok(r.index); !e.empty()) return e;
      for (std::size_t j = 0; j < i; ++j) {
        if (s.refs[j] == r) return "repeated factor";
      }
    }
    if (s.refs.size() >= remaining) return "cannot trace out every remaining factor";
    for (const Ref& r : s.refs) (r.is_mode ? mode_gone_ : atom_gone_)[r.index] = true;
    return {};
  }

  const SystemDecl& sys_;
  std::vector<bool> atom_gone_;
  std::vector<bool> mode_gone_;
  std::vector<std::array<std::size_t, 2>> range_;
};

class Parser {
 public:
  Parser(std::string_view text, std::optional<double> lt_max) : text_(text), lt_max_(lt_max) {}

  Protocol parse() {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_atoms = false;
    std::unique_ptr<Checker> checker;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      ++line_no;
      line_ = line_no;
      toks_ = tokenize(text_.substr(pos, end - pos));
      pos = end + 1;
      if (toks_.empty()) continue;
      const std::string& kw = toks_[0].text;
      if (kw == "atoms" || kw == "cavities" || kw == "lt-max") {
        if (checker) fail(0, "system declarations must precede every step");
        if (kw == "atoms") {
          if (have_atoms) fail(0, "atoms declared twice");
          expect_count(2);
          p_.system.atoms = count(1);
          if (p_.system.atoms == 0) fail(1, "need at least one atom");
          have_atoms = true;
        } else if (kw == "cavities") {
          parse_cavities();
        } else {
          expect_count(2);
          p_.system.lambda_t_max = real(1);
          p_.system.explicit_lt_max = true;
          if (!(p_.system.lambda_t_max > 0.0)) fail(1, "lt-max must be positive");
        }
        continue;
      }
      if (!have_atoms) fail(0, "script must start with an `atoms` declaration");
      if (!checker) apply_override();
      if (!checker) checker = std::make_unique<Checker>(p_.system);
      Step step{parse_step(), line_no};
      std::size_t arg = 0;
      const std::string err = checker->check(step.kind, arg);
      if (!err.empty()) fail(value_token(arg), err);
      p_.steps.push_back(std::move(step));
    }
    if (!have_atoms) throw ParseError(line_no, 1, "missing `atoms` declaration");
    apply_override();
    return std::move(p_);
  }

 private:
  void apply_override() {
    if (!lt_max_) return;
    if (!(*lt_max_ > 0.0)) throw ParseError(0, 1, "lt-max must be positive");
    p_.system.lambda_t_max = *lt_max_;
    p_.system.explicit_lt_max = true;
  }

  [[noreturn]] void fail(std::size_t tok, const std::string& msg) const {
    const std::size_t col = tok < toks_.size() ? toks_[tok].column
                                               : (toks_.empty() ? 1 : toks_.back().column);
    throw ParseError(line_, col, msg);
  }

  void expect_count(std::size_t n) const {
    if (toks_.size() < n) fail(toks_.size(), "missing argument");
    if (toks_.size() > n) fail(n, "unexpected token '" + toks_[n].text + "'");
  }

  void expect_word(std::size_t i, const char* word) const {
    if (i >= toks_.size()) fail(i, std::string("expected '") + word + "'");
    if (toks_[i].text != word) {
      fail(i, std::string("expected '") + word + "', found '" + toks_[i].text + "'");
    }
  }

  std::size_t count(std::size_t i) const {
    if (i >= toks_.size()) fail(i, "missing integer");
    const std::string& t = toks_[i].text;
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail(i, "malformed integer '" + t + "'");
    return v;
  }

  double real(std::size_t i) const {
    if (i >= toks_.size()) fail(i, "missing number");
    const std::string& t = toks_[i].text;
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
      fail(i, "malformed number '" + t + "'");
    }
    return v;
  }

  Complex complex_value(std::size_t i) const {
    if (i >= toks_.size()) fail(i, "missing amplitude");
    const std::string& t = toks_[i].text;
    const auto colon = t.find(':');
    if (colon == std::string::npos) return real(i);
    Parser sub = *this;
    sub.toks_ = {{t.substr(0, colon), toks_[i].column},
                 {t.substr(colon + 1), toks_[i].column + colon + 1}};
    return {sub.real(0), sub.real(1)};
  }

  std::size_t atom(std::size_t i) const {
    const std::size_t v = count(i);
    if (v == 0) fail(i, "atoms are numbered from 1");
    return v - 1;
  }

  std::size_t mode(std::size_t i) const {
    if (i >= toks_.size()) fail(i, "missing cavity label");
    const std::string& t = toks_[i].text;
    if (t.size() != 1 || t[0] < 'a' || t[0] > 'z') fail(i, "malformed cavity label '" + t + "'");
    return static_cast<std::size_t>(t[0] - 'a');
  }

  void parse_cavities() {
    if (toks_.size() < 4) fail(toks_.size(), "missing argument");
    const std::size_t m = count(1);
    ModeDecl decl;
    if (toks_[2].text == "truncation") {
      expect_count(4);
      decl.n_max = count(3);
      if (decl.n_max < 1) fail(3, "truncation must be at least 1");
    } else if (toks_[2].text == "window") {
      expect_count(5);
      decl.n_min = count(3);
      decl.n_max = count(4);
      decl.windowed = true;
      if (decl.n_max <= decl.n_min) fail(4, "window needs n_max > n_min");
    } else {
      fail(2, "expected 'truncation' or 'window'");
    }
    if (p_.system.modes.size() + m > 26) fail(1, "at most 26 cavities");
    p_.system.modes.insert(p_.system.modes.end(), m, decl);
  }

  // Maps a value-argument index used by the checker onto a token index.
  std::size_t value_token(std::size_t arg) const { return arg_tokens_.empty() ? 0 : arg_tokens_[std::min(arg, arg_tokens_.size() - 1)]; }

  StepKind parse_step() {
    const std::string& kw = toks_[0].text;
    arg_tokens_.clear();
    if (kw == "prepare-pair") {
      expect_count(5);
      expect_word(3, "alpha");
      arg_tokens_ = {1, 2, 4};
      return PreparePair{atom(1), atom(2), real(4)};
    }
    if (kw == "prepare-atoms") {
      std::size_t i = 1;
      PrepareAtoms s;
      while (i < toks_.size() && toks_[i].text != "amplitudes") {
        arg_tokens_.push_back(i);
        s.atoms.push_back(atom(i++));
      }
      expect_word(i, "amplitudes");
      arg_tokens_.push_back(i + 1);
      for (++i; i < toks_.size(); ++i) s.amplitudes.push_back(complex_value(i));
      return s;
    }
    if (kw == "prepare-bell") {
      expect_count(8);
      expect_word(3, "weights");
      arg_tokens_ = {1, 2, 4};
      return PrepareBell{atom(1), atom(2), {real(4), real(5), real(6), real(7)}};
    }
    if (kw == "prepare-cavity" || kw == "measure-cavity") {
      expect_count(4);
      expect_word(2, "fock");
      arg_tokens_ = {1, 3};
      if (kw == "prepare-cavity") return PrepareCavity{mode(1), count(3)};
      return MeasureCavity{mode(1), count(3)};
    }
    if (kw == "interact") {
      expect_count(5);
      expect_word(3, "lt");
      arg_tokens_ = {1, 2, 4};
      return Interact{atom(1), mode(2), real(4)};
    }
    if (kw == "rotate-x" || kw == "rotate-y" || kw == "rotate-z") {
      expect_count(4);
      expect_word(2, "angle");
      arg_tokens_ = {1, 3};
      const Axis axis = kw[7] == 'x' ? Axis::kX : (kw[7] == 'y' ? Axis::kY : Axis::kZ);
      return Rotate{axis, atom(1), real(3)};
    }
    if (kw == "measure-atom") {
      expect_count(6);
      expect_word(2, "basis");
      expect_word(4, "outcome");
      arg_tokens_ = {1};
      MeasureAtom s;
      s.atom = atom(1);
      const std::string& b = toks_[3].text;
      if (b == "z") {
        s.basis = Basis::kZ;
      } else if (b == "x") {
        s.basis = Basis::kX;
      } else if (b == "pm") {
        s.basis = Basis::kPm;
      } else {
        fail(3, "unknown basis '" + b + "' (z, x or pm)");
      }
      const std::string& o = toks_[5].text;
      if (s.basis == Basis::kZ && (o == "e" || o == "g")) {
        s.first_outcome = o == "e";
      } else if (s.basis != Basis::kZ && (o == "plus" || o == "minus")) {
        s.first_outcome = o == "plus";
      } else {
        fail(5, "outcome '" + o + "' is not valid for basis " + b);
      }
      return s;
    }
    if (kw == "trace-out") {
      TraceOut s;
      if (toks_.size() < 2) fail(1, "trace-out needs at least one factor");
      for (std::size_t i = 1; i < toks_.size(); ++i) {
        arg_tokens_.push_back(i);
        const std::string& t = toks_[i].text;
        if (!t.empty() && t[0] >= 'a' && t[0] <= 'z') {
          s.refs.push_back({true, mode(i)});
        } else {
          s.refs.push_back({false, atom(i)});
        }
      }
      return s;
    }
    fail(0, "unknown keyword '" + kw + "'");
  }

  std::string_view text_;
  std::optional<double> lt_max_;
  std::size_t line_ = 0;
  std::vector<Token> toks_;
  std::vector<std::size_t> arg_tokens_;
  Protocol p_;
};

CVector plus_minus(bool plus) {
  CVector v(2);
  v << 1.0, plus ? 1.0 : -1.0;
  return v / std::numbers::sqrt2;
}

}  // namespace

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

std::string ref_label(const Ref& ref) {
  return ref.is_mode ? mode_text(ref.index) : atom_text(ref.index);
}

std::string describe(const Step& step) { return step_text(step.kind); }

Protocol parse_script(std::string_view text, std::optional<double> lambda_t_max) {
  return Parser(text, lambda_t_max).parse();
}

void validate(const Protocol& protocol) {
  const auto& sys = protocol.system;
  if (sys.atoms == 0) throw ParseError(0, 1, "need at least one atom");
  if (sys.modes.size() > 26) throw ParseError(0, 1, "at most 26 cavities");
  for (const auto& m : sys.modes) {
    if (m.n_max <= m.n_min) throw ParseError(0, 1, "cavity window needs n_max > n_min");
  }
  Checker checker(sys);
  for (std::size_t i = 0; i < protocol.steps.size(); ++i) {
    const Step& s = protocol.steps[i];
    std::size_t arg = 0;
    const std::string err = checker.check(s.kind, arg);
    if (!err.empty()) throw ParseError(s.line != 0 ? s.line : i + 1, 1, err);
  }
}

std::string print_script(const Protocol& p) {
  std::ostringstream os;
  os << "atoms " << p.system.atoms << '\n';
  const auto& modes = p.system.modes;
  for (std::size_t i = 0; i < modes.size();) {
    std::size_t j = i;
    while (j < modes.size() && modes[j] == modes[i]) ++j;
    os << "cavities " << (j - i);
    if (modes[i].windowed) {
      os << " window " << modes[i].n_min << ' ' << modes[i].n_max << '\n';
    } else {
      os << " truncation " << modes[i].n_max << '\n';
    }
    i = j;
  }
  if (p.system.explicit_lt_max) os << "lt-max " << fmt(p.system.lambda_t_max) << '\n';
  for (const auto& s : p.steps) os << step_text(s.kind) << '\n';
  return os.str();
}

RunResult run(const Protocol& protocol) {
  validate(protocol);
  const auto& sys = protocol.system;

  std::vector<Factor> factors(sys.atoms, qubit_factor());
  std::vector<Ref> refs;
  for (std::size_t i = 0; i < sys.atoms; ++i) refs.push_back({false, i});
  for (std::size_t i = 0; i < sys.modes.size(); ++i) {
    factors.push_back(mode_window(sys.modes[i].n_min, sys.modes[i].n_max));
    refs.push_back({true, i});
  }
  HilbertSpace space(factors);
  std::vector<std::size_t> digits(sys.atoms, kGround);
  digits.resize(factors.size(), 0);
  std::vector<PureState> comps{PureState::basis(space, digits)};

  auto position = [&](const Ref& r) {
    const auto it = std::find(refs.begin(), refs.end(), r);
    return static_cast<std::size_t>(it - refs.begin());
  };
  auto atom_pos = [&](std::size_t a) { return position({false, a}); };
  auto mode_pos = [&](std::size_t m) { return position({true, m}); };

  auto weight = [](const std::vector<PureState>& cs) {
    double w = 0.0;
    for (const auto& c : cs) w += c.norm_squared();
    return w;
  };

  constexpr double kDropTol = 1e-30;

  // Replaces the targets' state by each of the given local vectors:
  // psi -> sum over k and chi of (|chi><k| (x) 1) psi, one component each.
  auto reset = [&](const std::vector<std::size_t>& targets, const std::vector<CVector>& chis) {
    std::size_t dim = 1;
    for (auto t : targets) dim *= space.factor(t).dim;
    std::vector<PureState> next;
    for (const auto& c : comps) {
      for (const auto& chi : chis) {
        for (std::size_t k = 0; k < dim; ++k) {
          CMatrix op = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
          op.col(static_cast<Eigen::Index>(k)) = chi;
          PureState out = apply_local_operator(c, targets, op);
          if (out.norm_squared() > kDropTol) next.push_back(std::move(out));
        }
      }
    }
    comps = std::move(next);
  };

  RunResult result{MixedState(HilbertSpace::qubits(1), CMatrix::Zero(2, 2)), {}, {}, 1.0, {}};

  for (std::size_t si = 0; si < protocol.steps.size(); ++si) {
    const Step& step = protocol.steps[si];
    StepLog entry{si, step_text(step.kind), false, 1.0};

    auto measure = [&](std::size_t target, const CMatrix& projector) {
      const double before = weight(comps);
      std::vector<PureState> next;
      const std::array<std::size_t, 1> t{target};
      for (const auto& c : comps) {
        auto rec = project(c, t, projector, false);
        if (rec.post_state.norm_squared() > kDropTol) next.push_back(std::move(rec.post_state));
      }
      const double after = weight(next);
      const double p = after / before;
      entry.is_measurement = true;
      entry.probability = p;
      if (p < kEmptyBranchTol) {
        std::string where = step.line != 0 ? " (line " + std::to_string(step.line) + ")" : "";
        throw EmptyBranchError("empty post-selection branch at step " + std::to_string(si + 1) +
                               where + ": " + entry.description);
      }
      const double scale = 1.0 / std::sqrt(after);
      comps.clear();
      for (auto& c : next) comps.emplace_back(c.space(), c.amplitudes() * scale);
    };

    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, PreparePair>) {
            CVector chi = CVector::Zero(4);
            chi(0) = s.alpha;
            chi(3) = std::sqrt(std::max(0.0, 1.0 - s.alpha * s.alpha));
            reset({atom_pos(s.atom_a), atom_pos(s.atom_b)}, {chi});
          } else if constexpr (std::is_same_v<T, PrepareAtoms>) {
            std::vector<std::size_t> targets;
            for (auto a : s.atoms) targets.push_back(atom_pos(a));
            CVector chi(static_cast<Eigen::Index>(s.amplitudes.size()));
            for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
              chi(static_cast<Eigen::Index>(i)) = s.amplitudes[i];
            }
            reset(targets, {chi});
          } else if constexpr (std::is_same_v<T, PrepareBell>) {
            std::vector<CVector> chis;
            const double r = 1.0 / std::numbers::sqrt2;
            const std::array<std::array<double, 4>, 4> bell{
                {{r, 0, 0, r}, {r, 0, 0, -r}, {0, r, r, 0}, {0, r, -r, 0}}};
            for (std::size_t i = 0; i < 4; ++i) {
              if (s.weights[i] <= 0.0) continue;
              CVector chi(4);
              for (std::size_t j = 0; j < 4; ++j) {
                chi(static_cast<Eigen::Index>(j)) = std::sqrt(s.weights[i]) * bell[i][j];
              }
              chis.push_back(chi);
            }
            reset({atom_pos(s.atom_a), atom_pos(s.atom_b)}, chis);
          } else if constexpr (std::is_same_v<T, PrepareCavity>) {
            const std::size_t pos = mode_pos(s.mode);
            const Factor& f = space.factor(pos);
            CVector chi = CVector::Zero(static_cast<Eigen::Index>(f.dim));
            chi(static_cast<Eigen::Index>(s.photons - f.fock_offset)) = 1.0;
            reset({pos}, {chi});
          } else if constexpr (std::is_same_v<T, Interact>) {
            const std::size_t a = atom_pos(s.atom);
            const std::size_t m = mode_pos(s.mode);
            for (auto& c : comps) c = passage(c, a, m, s.lambda_t, sys.lambda_t_max);
          } else if constexpr (std::is_same_v<T, Rotate>) {
            const CMatrix u = s.axis == Axis::kX   ? rotation_x(s.angle)
                              : s.axis == Axis::kY ? rotation_y(s.angle)
                                                   : rotation_z(s.angle);
            const std::array<std::size_t, 1> t{atom_pos(s.atom)};
            for (auto& c : comps) c = apply_local_unitary(c, t, u);
          } else if constexpr (std::is_same_v<T, MeasureAtom>) {
            const CMatrix proj = s.basis == Basis::kZ
                                     ? basis_projector(2, s.first_outcome ? kExcited : kGround)
                                     : ket_projector(plus_minus(s.first_outcome));
            measure(atom_pos(s.atom), proj);
          } else if constexpr (std::is_same_v<T, MeasureCavity>) {
            const std::size_t pos = mode_pos(s.mode);
            const Factor& f = space.factor(pos);
            measure(pos, basis_projector(f.dim, s.photons - f.fock_offset));
          } else if constexpr (std::is_same_v<T, TraceOut>) {
            std::vector<std::size_t> traced;
            for (const auto& r : s.refs) traced.push_back(position(r));
            std::sort(traced.begin(), traced.end());
            std::vector<std::size_t> dims;
            std::size_t total = 1;
            for (auto t : traced) {
              dims.push_back(space.factor(t).dim);
              total *= dims.back();
            }
            std::vector<PureState> next;
            std::vector<std::size_t> d(traced.size(), 0);
            for (const auto& c : comps) {
              for (std::size_t k = 0; k < total; ++k) {
                std::size_t rem = k;
                for (std::size_t i = traced.size(); i-- > 0;) {
                  d[i] = rem % dims[i];
                  rem /= dims[i];
                }
                PureState out = condition_on(c, traced, d);
                if (out.norm_squared() > kDropTol) next.push_back(std::move(out));
              }
            }
            std::vector<Ref> kept_refs;
            const auto kept = space.complement(traced);
            for (auto k : kept) kept_refs.push_back(refs[k]);
            refs = std::move(kept_refs);
            space = space.subspace(kept);
            comps = std::move(next);
          }
        },
        step.kind);
    result.joint_probability *= entry.probability;
    result.log.push_back(std::move(entry));
  }

  const auto dim = static_cast<Eigen::Index>(space.dimension());
  CMatrix rho = CMatrix::Zero(dim, dim);
  for (const auto& c : comps) rho.noalias() += c.amplitudes() * c.amplitudes().adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  result.final_state = MixedState(space, rho);
  result.components = std::move(comps);
  result.factors = std::move(refs);
  return result;
}

}  // namespace cqed::oracle
