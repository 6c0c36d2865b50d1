#include "expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace cqed::cli {

namespace {

class Evaluator {
 public:
  explicit Evaluator(std::string_view s) : s_(s) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return v;
  }

 private:
  [[noreturn]] void fail(const char* what) const {
    throw std::invalid_argument(std::string(what) + " in expression '" + std::string(s_) + "'");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) {
        v += term();
      } else if (eat('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }
  double term() {
    double v = power();
    for (;;) {
      if (eat('*')) {
        v *= power();
      } else if (eat('/')) {
        v /= power();
      } else {
        return v;
      }
    }
  }
  double power() {
    const double base = unary();
    if (eat('^')) return std::pow(base, power());
    return base;
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }
  double primary() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string_view name = s_.substr(start, pos_ - start);
      if (name == "pi") return std::numbers::pi;
      double (*fn)(double) = nullptr;
      if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
      if (name == "sin") fn = [](double x) { return std::sin(x); };
      if (name == "cos") fn = [](double x) { return std::cos(x); };
      if (name == "asin") fn = [](double x) { return std::asin(x); };
      if (fn == nullptr) fail("unknown name");
      if (!eat('(')) fail("expected '('");
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return fn(v);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool plain_number(std::string_view t) {
  if (!t.empty() && t[0] == '+') t.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  return ec == std::errc() && ptr == t.data() + t.size();
}

std::string expand_token(std::string_view t) {
  if (plain_number(t)) return std::string(t);
  try {
    const double v = evaluate(t);
    if (!std::isfinite(v)) return std::string(t);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  } catch (const std::invalid_argument&) {
    return std::string(t);
  }
}

}  // namespace

double evaluate(std::string_view text) { return Evaluator(text).parse(); }

std::string expand_symbolic(std::string_view script) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= script.size()) {
    std::size_t end = script.find('\n', pos);
    const bool last = end == std::string_view::npos;
    if (last) end = script.size();
    std::string_view line = script.substr(pos, end - pos);
    const std::size_t hash = line.find('#');
    const std::string_view comment = hash == std::string_view::npos ? "" : line.substr(hash);
    line = line.substr(0, hash == std::string_view::npos ? line.size() : hash);

    std::size_t i = 0;
    bool first = true;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
        out += line[i++];
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      const std::string_view tok = line.substr(i, j - i);
      if (first) {
        out += tok;
        first = false;
      } else if (const auto colon = tok.find(':'); colon != std::string_view::npos) {
        out += expand_token(tok.substr(0, colon));
        out += ':';
        out += expand_token(tok.substr(colon + 1));
      } else {
        out += expand_token(tok);
      }
      i = j;
    }
    out += comment;
    if (last) break;
    out += '\n';
    pos = end + 1;
  }
  return out;
}

}  // namespace cqed::cli
