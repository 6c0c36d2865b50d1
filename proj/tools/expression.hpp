#pragma once

#include <string>
#include <string_view>

namespace cqed::cli {

/// Evaluates numbers, pi, + - * / ^, parentheses and sqrt/sin/cos/asin.
/// Throws std::invalid_argument on malformed input.
double evaluate(std::string_view text);

/// Replaces every script token that is an expression but not a plain number
/// (e.g. 2*sqrt(2)*pi) by its value printed with 17 significant digits.
/// Comments, keywords and labels are left as they are.
std::string expand_symbolic(std::string_view script);

}  // namespace cqed::cli
