#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace agestruct {

/// Variables a coefficient expression may reference.
enum class Variable : std::uint8_t { Density, Gradient, Age, Position };

/// Bit set of Variables.
using VariableSet = std::uint8_t;

constexpr VariableSet variable_bit(Variable v) { return static_cast<VariableSet>(1u << static_cast<unsigned>(v)); }

/// Point at which an expression is evaluated. Unused variables are ignored.
struct Arguments {
  double u = 0.0;  // density value
  double p = 0.0;  // spatial gradient of the density
  double a = 0.0;  // age
  double x = 0.0;  // position
};

/// A compiled closed-form coefficient expression.
///
/// Grammar (whitespace insignificant):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('-' | '+') unary | power
///     power   := primary ('^' unary)?
///     primary := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
///     VAR     := 'u' | 'p' | 'a' | 'x'
///     FUNC    := 'exp' | 'log' | 'sqrt' | 'sin' | 'cos'
///
/// The expression is stored as a postfix program; evaluation never throws and
/// returns a non-finite value where the underlying arithmetic does.
class Expr {
 public:
  enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt, Sin, Cos };

  struct Instr {
    Op op;
    double value = 0.0;
    Variable var = Variable::Density;

    bool operator==(const Instr&) const = default;
  };

  Expr();  // the constant 0
  static Expr constant(double c);

  /// Parses `text`; `allowed` restricts which variables may appear.
  /// Throws ParseError with a 1-based column (line 1) on failure.
  static Expr parse(std::string_view text, VariableSet allowed = 0xF);

  double eval(const Arguments& args) const;

  bool depends_on(Variable v) const { return (used_ & variable_bit(v)) != 0; }
  VariableSet variables() const { return used_; }

  /// Canonical text form; parse(to_string()) reproduces an equal Expr.
  std::string to_string() const;

  bool operator==(const Expr& other) const { return program_ == other.program_; }

 private:
  explicit Expr(std::vector<Instr> program);

  std::vector<Instr> program_;
  VariableSet used_ = 0;
};

}  // namespace agestruct
