#include "htc/expression.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <numbers>
#include <string>

#include "htc/error.hpp"

namespace htc {

class ExpressionParser {
 public:
  using Op = Expression::Op;

  ExpressionParser(std::string_view text, Expression& out) : text_(text), out_(out) {}

  void parse() {
    expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character");
    std::size_t depth = 0;
    for (const auto& ins : out_.program_) {
      depth += stack_delta(ins.op);
      out_.max_depth_ = std::max(out_.max_depth_, depth);
    }
  }

 private:
  static std::ptrdiff_t stack_delta(Op op) {
    switch (op) {
      case Op::push:
      case Op::var_t:
      case Op::var_x:
        return 1;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
      case Op::pow:
      case Op::min:
      case Op::max:
        return -1;
      default:
        return 0;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + std::string(text_) + "': " + msg + " at position " +
                      std::to_string(pos_));
  }

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

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void emit(Op op, double value = 0.0) { out_.program_.push_back({op, value}); }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Op::add);
      } else if (accept('-')) {
        term();
        emit(Op::sub);
      } else {
        return;
      }
    }
  }

  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Op::mul);
      } else if (accept('/')) {
        unary();
        emit(Op::div);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Op::neg);
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }

  void power() {
    primary();
    if (accept('^')) {
      unary();
      emit(Op::pow);
    }
  }

  void primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      identifier();
      return;
    }
    fail("unexpected character");
  }

  void number() {
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    emit(Op::push, value);
  }

  void identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name == "t") {
      out_.constant_ = false;
      return emit(Op::var_t);
    }
    if (name == "x") {
      out_.constant_ = false;
      return emit(Op::var_x);
    }
    if (name == "pi") return emit(Op::push, std::numbers::pi);
    if (name == "e") return emit(Op::push, std::numbers::e);

    struct Fn {
      std::string_view name;
      Op op;
      int arity;
    };
    static constexpr Fn functions[] = {
        {"sin", Op::sin, 1},   {"cos", Op::cos, 1},   {"tan", Op::tan, 1},
        {"exp", Op::exp, 1},   {"log", Op::log, 1},   {"sqrt", Op::sqrt, 1},
        {"abs", Op::abs, 1},   {"sinh", Op::sinh, 1}, {"cosh", Op::cosh, 1},
        {"tanh", Op::tanh, 1}, {"pow", Op::pow, 2},   {"min", Op::min, 2},
        {"max", Op::max, 2},
    };
    for (const auto& fn : functions) {
      if (fn.name != name) continue;
      expect('(');
      expr();
      for (int i = 1; i < fn.arity; ++i) {
        expect(',');
        expr();
      }
      expect(')');
      return emit(fn.op);
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression::Expression(std::string_view source) : source_(source) {
  ExpressionParser(source_, *this).parse();
}

double Expression::operator()(double t, double x) const {
  if (program_.empty()) return 0.0;
  // Expressions from configs are short; a fixed buffer avoids allocation.
  constexpr std::size_t kInline = 32;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(max_depth_);
    stack = heap.data();
  }
  std::size_t top = 0;
  for (const auto& ins : program_) {
    switch (ins.op) {
      case Op::push: stack[top++] = ins.value; break;
      case Op::var_t: stack[top++] = t; break;
      case Op::var_x: stack[top++] = x; break;
      case Op::add: --top; stack[top - 1] += stack[top]; break;
      case Op::sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::div: --top; stack[top - 1] /= stack[top]; break;
      case Op::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::min: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
      case Op::max: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
      case Op::neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
      case Op::tan: stack[top - 1] = std::tan(stack[top - 1]); break;
      case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::log: stack[top - 1] = std::log(stack[top - 1]); break;
      case Op::sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      case Op::abs: stack[top - 1] = std::abs(stack[top - 1]); break;
      case Op::sinh: stack[top - 1] = std::sinh(stack[top - 1]); break;
      case Op::cosh: stack[top - 1] = std::cosh(stack[top - 1]); break;
      case Op::tanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace htc
