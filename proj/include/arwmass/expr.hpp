#pragma once

// Scalar expressions: parsing, evaluation, symbolic differentiation and
// substitution. All metric data (f, psi, lambda, graph functions) is carried
// as Expression so curvature can use exact derivatives.
//
// Grammar (no implicit multiplication):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'pi' | identifier | identifier '(' expr ')' | '(' expr ')'
//
// Functions: exp log sin cos tan sqrt abs.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arwmass/error.hpp"

namespace arwmass::expr {

using Bindings = std::map<std::string, double, std::less<>>;

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what);

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(std::string name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// log of a non-positive number, sqrt of a negative number, division by zero,
/// non-integer power of a non-positive base.
class DomainError : public Error {
 public:
  using Error::Error;
};

enum class Kind { Number, Pi, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Function { Exp, Log, Sin, Cos, Tan, Sqrt, Abs };

std::string_view function_name(Function fn);

/// Immutable expression tree. Copies share structure.
class Expression {
 public:
  struct Node;

  Expression();  // the literal 0
  explicit Expression(double value);

  static Expression number(double value);
  static Expression pi();
  static Expression variable(std::string name);
  static Expression call(Function fn, Expression arg);

  Kind kind() const;
  double number_value() const;            // Kind::Number only
  const std::string& variable_name() const;  // Kind::Variable only
  Function function() const;              // Kind::Call only
  const Expression& lhs() const;          // unary operand or left operand
  const Expression& rhs() const;

  bool is_number() const { return kind() == Kind::Number; }
  bool is_number(double value) const;
  /// True when the subtree contains no variables.
  bool is_constant() const;
  bool depends_on(std::string_view var) const;
  std::set<std::string> free_variables() const;
  std::size_t size() const;

  double evaluate(const Bindings& bindings) const;
  std::string to_string() const;

  /// Structural identity (same shared node), not mathematical equality.
  bool same_node(const Expression& other) const { return node_ == other.node_; }
  const void* id() const { return node_.get(); }

 private:
  explicit Expression(std::shared_ptr<const Node> node);
  explicit Expression(std::nullptr_t) {}
  std::shared_ptr<const Node> node_;

  friend Expression make_unary(Kind, Expression);
  friend Expression make_binary(Kind, Expression, Expression);
  friend Expression raw_unary(Kind, Expression);
  friend Expression raw_binary(Kind, Expression, Expression);
};

// Builders with constant folding and neutral-element elimination
// (x+0, x*1, x*0, x^1, x^0, x/1, 0/x).
Expression operator-(Expression a);
Expression operator+(Expression a, Expression b);
Expression operator-(Expression a, Expression b);
Expression operator*(Expression a, Expression b);
Expression operator/(Expression a, Expression b);
Expression pow(Expression base, Expression exponent);
Expression exp(Expression a);
Expression log(Expression a);
Expression sin(Expression a);
Expression cos(Expression a);
Expression tan(Expression a);
Expression sqrt(Expression a);
Expression abs(Expression a);

/// Parses `source`; throws ParseError with a byte offset on malformed input.
Expression parse(std::string_view source);

/// Exact symbolic derivative of the given order (order >= 1).
Expression differentiate(const Expression& e, std::string_view var, int order = 1);

/// Replaces every occurrence of `var` by `replacement`.
Expression substitute(const Expression& e, std::string_view var, const Expression& replacement);

/// Replaces variables by numeric values and folds constants.
Expression bind(const Expression& e, const Bindings& values);

/// Flattened evaluator with variables resolved to slots at construction.
/// Produces bit-identical results to Expression::evaluate.
class CompiledExpression {
 public:
  CompiledExpression() = default;
  CompiledExpression(const Expression& e, std::span<const std::string> slots);

  double operator()(std::span<const double> values) const;
  bool is_constant() const { return constant_; }

 private:
  struct Instr {
    Kind kind;
    Function fn;
    int slot;
    double value;
  };
  std::vector<Instr> code_;
  std::size_t max_stack_ = 0;
  bool constant_ = true;
};

}  // namespace arwmass::expr
