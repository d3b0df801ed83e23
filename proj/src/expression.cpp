#include "agestruct/expression.hpp"

#include "agestruct/types.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace agestruct {

namespace {

constexpr std::size_t kMaxStack = 64;

const char* variable_name(Variable v) {
  switch (v) {
    case Variable::Density: return "u";
    case Variable::Gradient: return "p";
    case Variable::Age: return "a";
    case Variable::Position: return "x";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Parser {
 public:
  Parser(std::string_view text, VariableSet allowed) : text_(text), allowed_(allowed) {}

  std::vector<Expr::Instr> run() {
    parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(1, static_cast<int>(pos_) + 1, what);
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

  void emit(Expr::Op op) { out_.push_back({op}); }

  void parse_expr() {
    parse_term();
    for (;;) {
      if (accept('+')) {
        parse_term();
        emit(Expr::Op::Add);
      } else if (accept('-')) {
        parse_term();
        emit(Expr::Op::Sub);
      } else {
        return;
      }
    }
  }

  void parse_term() {
    parse_unary();
    for (;;) {
      if (accept('*')) {
        parse_unary();
        emit(Expr::Op::Mul);
      } else if (accept('/')) {
        parse_unary();
        emit(Expr::Op::Div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (accept('-')) {
      parse_unary();
      emit(Expr::Op::Neg);
    } else if (accept('+')) {
      parse_unary();
    } else {
      parse_power();
    }
  }

  void parse_power() {
    parse_primary();
    if (accept('^')) {
      parse_unary();
      emit(Expr::Op::Pow);
    }
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - rest.c_str());
      out_.push_back({Expr::Op::Const, v});
      return;
    }
    if (accept('(')) {
      parse_expr();
      if (!accept(')')) fail("expected ')'");
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name.size() == 1) {
        Variable v;
        switch (name[0]) {
          case 'u': v = Variable::Density; break;
          case 'p': v = Variable::Gradient; break;
          case 'a': v = Variable::Age; break;
          case 'x': v = Variable::Position; break;
          default: pos_ = start; fail("unknown variable '" + std::string(name) + "'");
        }
        if ((allowed_ & variable_bit(v)) == 0) {
          pos_ = start;
          fail("variable '" + std::string(name) + "' is not allowed here");
        }
        out_.push_back({Expr::Op::Var, 0.0, v});
        return;
      }
      Expr::Op fn;
      if (name == "exp") fn = Expr::Op::Exp;
      else if (name == "log") fn = Expr::Op::Log;
      else if (name == "sqrt") fn = Expr::Op::Sqrt;
      else if (name == "sin") fn = Expr::Op::Sin;
      else if (name == "cos") fn = Expr::Op::Cos;
      else {
        pos_ = start;
        fail("unknown function '" + std::string(name) + "'");
      }
      if (!accept('(')) fail("expected '(' after function name");
      parse_expr();
      if (!accept(')')) fail("expected ')'");
      emit(fn);
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  VariableSet allowed_;
  std::size_t pos_ = 0;
  std::vector<Expr::Instr> out_;
};

int arity(Expr::Op op) {
  switch (op) {
    case Expr::Op::Const:
    case Expr::Op::Var: return 0;
    case Expr::Op::Add:
    case Expr::Op::Sub:
    case Expr::Op::Mul:
    case Expr::Op::Div:
    case Expr::Op::Pow: return 2;
    default: return 1;
  }
}

}  // namespace

Expr::Expr() : Expr(std::vector<Instr>{{Op::Const, 0.0}}) {}

Expr::Expr(std::vector<Instr> program) : program_(std::move(program)) {
  // Stack depth check keeps eval() allocation free.
  std::size_t depth = 0, max_depth = 0;
  for (const Instr& in : program_) {
    if (in.op == Op::Var) used_ |= variable_bit(in.var);
    const int n = arity(in.op);
    depth = depth - static_cast<std::size_t>(n) + 1;
    max_depth = std::max(max_depth, depth);
  }
  if (max_depth > kMaxStack) throw ParseError(1, 1, "expression nests too deeply");
}

Expr Expr::constant(double c) {
  // Negative literals are stored the way the parser produces them.
  if (std::signbit(c)) return Expr(std::vector<Instr>{{Op::Const, -c}, {Op::Neg}});
  return Expr(std::vector<Instr>{{Op::Const, c}});
}

Expr Expr::parse(std::string_view text, VariableSet allowed) {
  return Expr(Parser(text, allowed).run());
}

double Expr::eval(const Arguments& args) const {
  std::array<double, kMaxStack> stack;
  std::size_t top = 0;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const: stack[top++] = in.value; break;
      case Op::Var:
        switch (in.var) {
          case Variable::Density: stack[top++] = args.u; break;
          case Variable::Gradient: stack[top++] = args.p; break;
          case Variable::Age: stack[top++] = args.a; break;
          case Variable::Position: stack[top++] = args.x; break;
        }
        break;
      case Op::Add: --top; stack[top - 1] += stack[top]; break;
      case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::Div: --top; stack[top - 1] /= stack[top]; break;
      case Op::Pow: {
        --top;
        const double e = stack[top];
        double& b = stack[top - 1];
        // Small integer exponents: repeated multiplication, exact for negative bases.
        if (e == std::floor(e) && std::abs(e) <= 8.0) {
          double r = 1.0;
          for (int i = 0; i < static_cast<int>(std::abs(e)); ++i) r *= b;
          b = e < 0 ? 1.0 / r : r;
        } else {
          b = std::pow(b, e);
        }
        break;
      }
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::Log: stack[top - 1] = std::log(stack[top - 1]); break;
      case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
    }
  }
  return stack[0];
}

std::string Expr::to_string() const {
  std::vector<std::string> stack;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const: stack.push_back(format_number(in.value)); break;
      case Op::Var: stack.emplace_back(variable_name(in.var)); break;
      case Op::Neg: stack.back() = "(-" + stack.back() + ")"; break;
      case Op::Exp: stack.back() = "exp(" + stack.back() + ")"; break;
      case Op::Log: stack.back() = "log(" + stack.back() + ")"; break;
      case Op::Sqrt: stack.back() = "sqrt(" + stack.back() + ")"; break;
      case Op::Sin: stack.back() = "sin(" + stack.back() + ")"; break;
      case Op::Cos: stack.back() = "cos(" + stack.back() + ")"; break;
      default: {
        std::string rhs = std::move(stack.back());
        stack.pop_back();
        const char sym = in.op == Op::Add   ? '+'
                         : in.op == Op::Sub ? '-'
                         : in.op == Op::Mul ? '*'
                         : in.op == Op::Div ? '/'
                                            : '^';
        stack.back() = "(" + stack.back() + sym + rhs + ")";
      }
    }
  }
  return stack.back();
}

}  // namespace agestruct
