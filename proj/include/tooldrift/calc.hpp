#pragma once

// Arithmetic formula evaluation backing the Calculate tool.
// Grammar: + - * / with parentheses, unary sign, decimal literals and the
// functions round(x[, digits]), abs(x), min(a, b, ...), max(a, b, ...).

#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tooldrift {

namespace detail {

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  std::optional<double> run() {
    auto v = expr();
    skip_ws();
    if (!v || pos_ != text_.size()) return std::nullopt;
    if (!std::isfinite(*v)) return std::nullopt;
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<double> expr() {
    auto lhs = term();
    while (lhs) {
      if (accept('+')) {
        auto rhs = term();
        if (!rhs) return std::nullopt;
        *lhs += *rhs;
      } else if (accept('-')) {
        auto rhs = term();
        if (!rhs) return std::nullopt;
        *lhs -= *rhs;
      } else {
        break;
      }
    }
    return lhs;
  }

  std::optional<double> term() {
    auto lhs = factor();
    while (lhs) {
      if (accept('*')) {
        auto rhs = factor();
        if (!rhs) return std::nullopt;
        *lhs *= *rhs;
      } else if (accept('/')) {
        auto rhs = factor();
        if (!rhs || *rhs == 0.0) return std::nullopt;
        *lhs /= *rhs;
      } else {
        break;
      }
    }
    return lhs;
  }

  std::optional<double> factor() {
    if (accept('-')) {
      auto v = factor();
      if (v) *v = -*v;
      return v;
    }
    if (accept('+')) return factor();
    if (accept('(')) {
      auto v = expr();
      if (!v || !accept(')')) return std::nullopt;
      return v;
    }
    skip_ws();
    if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) return call();
    return number();
  }

  std::optional<double> number() {
    skip_ws();
    double v = 0;
    auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc() || p == text_.data() + pos_) return std::nullopt;
    pos_ = static_cast<std::size_t>(p - text_.data());
    return v;
  }

  std::optional<double> call() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (!accept('(')) return std::nullopt;
    std::vector<double> args;
    if (!accept(')')) {
      do {
        auto v = expr();
        if (!v) return std::nullopt;
        args.push_back(*v);
      } while (accept(','));
      if (!accept(')')) return std::nullopt;
    }
    if (name == "abs" && args.size() == 1) return std::fabs(args[0]);
    if (name == "round" && (args.size() == 1 || args.size() == 2)) {
      double digits = args.size() == 2 ? args[1] : 0.0;
      if (digits != std::floor(digits) || digits < 0 || digits > 12) return std::nullopt;
      double scale = std::pow(10.0, digits);
      return std::round(args[0] * scale) / scale;
    }
    if ((name == "min" || name == "max") && !args.empty()) {
      double best = args[0];
      for (double a : args) best = name == "min" ? std::fmin(best, a) : std::fmax(best, a);
      return best;
    }
    return std::nullopt;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::optional<double> evaluate_formula(std::string_view formula) {
  return detail::FormulaParser(formula).run();
}

/// Shortest decimal text that round-trips `value`; negative zero prints as "0".
inline std::string format_number(double value) {
  if (value == 0.0) value = 0.0;
  std::array<char, 64> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), p);
}

}  // namespace tooldrift
