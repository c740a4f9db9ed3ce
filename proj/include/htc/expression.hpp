#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace htc {

/// Compiled arithmetic expression in the variables t and x.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses,
/// numeric literals, the constants pi and e, one-argument functions
/// sin cos tan exp log sqrt abs sinh cosh tanh, and two-argument
/// functions pow min max. Parsing errors throw ConfigError naming the
/// offending position.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::string_view source);

  double operator()(double t, double x) const;

  const std::string& source() const noexcept { return source_; }
  /// True when the expression does not reference t or x.
  bool is_constant() const noexcept { return constant_; }

 private:
  enum class Op : unsigned char {
    push, var_t, var_x, add, sub, mul, div, pow, neg,
    sin, cos, tan, exp, log, sqrt, abs, sinh, cosh, tanh, min, max,
  };
  struct Instr {
    Op op;
    double value = 0.0;
  };

  friend class ExpressionParser;

  std::string source_;
  std::vector<Instr> program_;
  std::size_t max_depth_ = 0;
  bool constant_ = true;
};

}  // namespace htc
