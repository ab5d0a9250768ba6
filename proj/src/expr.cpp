#include "arwmass/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <utility>

namespace arwmass::expr {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
    : Error("parse error at offset " + std::to_string(offset) + ": " + what +
            (expected.empty() ? std::string() : " (expected " + join(expected) + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

UnboundVariable::UnboundVariable(std::string name)
    : Error("unbound variable '" + name + "'"), name_(std::move(name)) {}

std::string_view function_name(Function fn) {
  switch (fn) {
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Tan: return "tan";
    case Function::Sqrt: return "sqrt";
    case Function::Abs: return "abs";
  }
  return "?";
}

struct Expression::Node {
  Kind kind = Kind::Number;
  double value = 0.0;
  std::string name;
  Function fn = Function::Exp;
  Expression a{nullptr};
  Expression b{nullptr};
  std::vector<std::string> vars;  // sorted, unique
  std::size_t size = 1;
};

// ---------------------------------------------------------------------------
// Scalar kernels shared by the tree walker and the compiled evaluator.

namespace {

double apply_function(Function fn, double x) {
  switch (fn) {
    case Function::Exp: return std::exp(x);
    case Function::Log:
      if (!(x > 0.0)) throw DomainError("log of non-positive value " + std::to_string(x));
      return std::log(x);
    case Function::Sin: return std::sin(x);
    case Function::Cos: return std::cos(x);
    case Function::Tan: return std::tan(x);
    case Function::Sqrt:
      if (x < 0.0) throw DomainError("sqrt of negative value " + std::to_string(x));
      return std::sqrt(x);
    case Function::Abs: return std::fabs(x);
  }
  return 0.0;
}

double apply_pow(double base, double exponent) {
  if (exponent == std::nearbyint(exponent) && std::fabs(exponent) < 9.0e15) {
    if (base == 0.0 && exponent < 0.0) throw DomainError("zero raised to a negative power");
    return std::pow(base, exponent);
  }
  if (base > 0.0) return std::pow(base, exponent);
  if (base == 0.0 && exponent > 0.0) return 0.0;
  throw DomainError("non-integer power of non-positive base " + std::to_string(base));
}

double apply_binary(Kind kind, double x, double y) {
  switch (kind) {
    case Kind::Add: return x + y;
    case Kind::Sub: return x - y;
    case Kind::Mul: return x * y;
    case Kind::Div:
      if (y == 0.0) throw DomainError("division by zero");
      return x / y;
    case Kind::Pow: return apply_pow(x, y);
    default: return 0.0;
  }
}

std::shared_ptr<Expression::Node> new_node(Kind kind) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  return n;
}

std::vector<std::string> merge_vars(const std::vector<std::string>& x, const std::vector<std::string>& y) {
  std::vector<std::string> out;
  out.reserve(x.size() + y.size());
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

Expression::Expression() : Expression(0.0) {}

Expression::Expression(double value) {
  auto n = new_node(Kind::Number);
  n->value = value;
  node_ = std::move(n);
}

Expression::Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expression Expression::number(double value) { return Expression(value); }

Expression Expression::pi() { return Expression(std::shared_ptr<const Node>(new_node(Kind::Pi))); }

Expression Expression::variable(std::string name) {
  auto n = new_node(Kind::Variable);
  n->vars = {name};
  n->name = std::move(name);
  return Expression(std::shared_ptr<const Node>(std::move(n)));
}

Expression raw_unary(Kind kind, Expression a) {
  auto n = new_node(kind);
  n->vars = a.node_->vars;
  n->size = a.node_->size + 1;
  n->a = std::move(a);
  return Expression(std::shared_ptr<const Expression::Node>(std::move(n)));
}

Expression raw_binary(Kind kind, Expression a, Expression b) {
  auto n = new_node(kind);
  n->vars = merge_vars(a.node_->vars, b.node_->vars);
  n->size = a.node_->size + b.node_->size + 1;
  n->a = std::move(a);
  n->b = std::move(b);
  return Expression(std::shared_ptr<const Expression::Node>(std::move(n)));
}

namespace {

bool numeric_leaf(const Expression& e) { return e.kind() == Kind::Number || e.kind() == Kind::Pi; }

double leaf_value(const Expression& e) {
  return e.kind() == Kind::Pi ? std::numbers::pi : e.number_value();
}

}  // namespace

Expression Expression::call(Function fn, Expression arg) {
  auto n = new_node(Kind::Call);
  n->fn = fn;
  n->vars = arg.node_->vars;
  n->size = arg.node_->size + 1;
  n->a = std::move(arg);
  return Expression(std::shared_ptr<const Node>(std::move(n)));
}

Expression make_unary(Kind kind, Expression a) {
  if (numeric_leaf(a)) return Expression(-leaf_value(a));
  return raw_unary(kind, std::move(a));
}

Expression make_binary(Kind kind, Expression a, Expression b) {
  if (numeric_leaf(a) && numeric_leaf(b)) {
    try {
      const double r = apply_binary(kind, leaf_value(a), leaf_value(b));
      if (std::isfinite(r)) return Expression(r);
    } catch (const DomainError&) {
    }
    return raw_binary(kind, std::move(a), std::move(b));
  }
  switch (kind) {
    case Kind::Add:
      if (a.is_number(0.0)) return b;
      if (b.is_number(0.0)) return a;
      break;
    case Kind::Sub:
      if (b.is_number(0.0)) return a;
      if (a.is_number(0.0)) return make_unary(Kind::Neg, std::move(b));
      break;
    case Kind::Mul:
      if (a.is_number(0.0) || b.is_number(0.0)) return Expression(0.0);
      if (a.is_number(1.0)) return b;
      if (b.is_number(1.0)) return a;
      break;
    case Kind::Div:
      if (b.is_number(1.0)) return a;
      if (a.is_number(0.0) && !b.is_number(0.0)) return Expression(0.0);
      break;
    case Kind::Pow:
      if (b.is_number(1.0)) return a;
      if (b.is_number(0.0)) return Expression(1.0);
      break;
    default:
      break;
  }
  return raw_binary(kind, std::move(a), std::move(b));
}

namespace {

Expression make_call(Function fn, Expression a) {
  if (numeric_leaf(a)) {
    try {
      const double r = apply_function(fn, leaf_value(a));
      if (std::isfinite(r)) return Expression(r);
    } catch (const DomainError&) {
    }
  }
  return Expression::call(fn, std::move(a));
}

}  // namespace

Expression operator-(Expression a) { return make_unary(Kind::Neg, std::move(a)); }
Expression operator+(Expression a, Expression b) { return make_binary(Kind::Add, std::move(a), std::move(b)); }
Expression operator-(Expression a, Expression b) { return make_binary(Kind::Sub, std::move(a), std::move(b)); }
Expression operator*(Expression a, Expression b) { return make_binary(Kind::Mul, std::move(a), std::move(b)); }
Expression operator/(Expression a, Expression b) { return make_binary(Kind::Div, std::move(a), std::move(b)); }
Expression pow(Expression base, Expression exponent) {
  return make_binary(Kind::Pow, std::move(base), std::move(exponent));
}
Expression exp(Expression a) { return make_call(Function::Exp, std::move(a)); }
Expression log(Expression a) { return make_call(Function::Log, std::move(a)); }
Expression sin(Expression a) { return make_call(Function::Sin, std::move(a)); }
Expression cos(Expression a) { return make_call(Function::Cos, std::move(a)); }
Expression tan(Expression a) { return make_call(Function::Tan, std::move(a)); }
Expression sqrt(Expression a) { return make_call(Function::Sqrt, std::move(a)); }
Expression abs(Expression a) { return make_call(Function::Abs, std::move(a)); }

// ---------------------------------------------------------------------------
// Accessors

Kind Expression::kind() const { return node_->kind; }
double Expression::number_value() const { return node_->value; }
const std::string& Expression::variable_name() const { return node_->name; }
Function Expression::function() const { return node_->fn; }
const Expression& Expression::lhs() const { return node_->a; }
const Expression& Expression::rhs() const { return node_->b; }
bool Expression::is_number(double value) const { return node_->kind == Kind::Number && node_->value == value; }
bool Expression::is_constant() const { return node_->vars.empty(); }
std::size_t Expression::size() const { return node_->size; }

bool Expression::depends_on(std::string_view var) const {
  return std::binary_search(node_->vars.begin(), node_->vars.end(), var,
                            [](const auto& x, const auto& y) { return std::string_view(x) < std::string_view(y); });
}

std::set<std::string> Expression::free_variables() const { return {node_->vars.begin(), node_->vars.end()}; }

// ---------------------------------------------------------------------------
// Evaluation

double Expression::evaluate(const Bindings& bindings) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Pi: return std::numbers::pi;
    case Kind::Variable: {
      auto it = bindings.find(n.name);
      if (it == bindings.end()) throw UnboundVariable(n.name);
      return it->second;
    }
    case Kind::Neg: return -n.a.evaluate(bindings);
    case Kind::Call: return apply_function(n.fn, n.a.evaluate(bindings));
    default: {
      const double x = n.a.evaluate(bindings);
      const double y = n.b.evaluate(bindings);
      return apply_binary(n.kind, x, y);
    }
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expression& e) {
  switch (e.kind()) {
    case Kind::Add:
    case Kind::Sub: return kPrecAdd;
    case Kind::Mul:
    case Kind::Div: return kPrecMul;
    case Kind::Neg: return kPrecUnary;
    case Kind::Pow: return kPrecPow;
    case Kind::Number: return std::signbit(e.number_value()) ? kPrecUnary : kPrecAtom;
    default: return kPrecAtom;
  }
}

void format_number(double v, std::string& out) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void print(const Expression& e, std::string& out);

void print_child(const Expression& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    print(child, out);
    out += ')';
  } else {
    print(child, out);
  }
}

void print(const Expression& e, std::string& out) {
  switch (e.kind()) {
    case Kind::Number: format_number(e.number_value(), out); return;
    case Kind::Pi: out += "pi"; return;
    case Kind::Variable: out += e.variable_name(); return;
    case Kind::Neg:
      out += '-';
      print_child(e.lhs(), kPrecUnary, out);
      return;
    case Kind::Call:
      out += function_name(e.function());
      out += '(';
      print(e.lhs(), out);
      out += ')';
      return;
    case Kind::Pow:
      print_child(e.lhs(), kPrecAtom, out);
      out += '^';
      print_child(e.rhs(), kPrecUnary, out);
      return;
    default: {
      const int p = precedence(e);
      const char* op = e.kind() == Kind::Add ? " + " : e.kind() == Kind::Sub ? " - " : e.kind() == Kind::Mul ? " * " : " / ";
      print_child(e.lhs(), p, out);
      out += op;
      print_child(e.rhs(), p + 1, out);
      return;
    }
  }
}

}  // namespace

std::string Expression::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expression parse_all() {
    skip_ws();
    if (pos_ == src_.size()) fail({"expression"}, "empty input");
    Expression e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail({"operator", "end of input"}, "trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& what) const {
    throw ParseError(pos_, std::move(expected), what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  Expression parse_expr() {
    Expression lhs = parse_term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        lhs = raw_binary(Kind::Add, lhs, parse_term());
      } else if (peek('-')) {
        ++pos_;
        lhs = raw_binary(Kind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expression parse_term() {
    Expression lhs = parse_unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        lhs = raw_binary(Kind::Mul, lhs, parse_unary());
      } else if (peek('/')) {
        ++pos_;
        lhs = raw_binary(Kind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expression parse_unary() {
    if (peek('-')) {
      ++pos_;
      return raw_unary(Kind::Neg, parse_unary());
    }
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_primary();
    if (peek('^')) {
      ++pos_;
      return raw_binary(Kind::Pow, base, parse_unary());
    }
    return base;
  }

  static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  Expression parse_primary() {
    skip_ws();
    if (pos_ == src_.size()) fail({"expression"}, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expression inner = parse_expr();
      if (!peek(')')) fail({")"}, "unbalanced parenthesis");
      ++pos_;
      return inner;
    }
    if (digit(c) || c == '.') return parse_number();
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      const std::string name(src_.substr(start, pos_ - start));
      if (peek('(')) {
        static const std::pair<std::string_view, Function> table[] = {
            {"exp", Function::Exp}, {"log", Function::Log},   {"sin", Function::Sin}, {"cos", Function::Cos},
            {"tan", Function::Tan}, {"sqrt", Function::Sqrt}, {"abs", Function::Abs}};
        const auto* it = std::find_if(std::begin(table), std::end(table), [&](const auto& p) { return p.first == name; });
        if (it == std::end(table)) {
          pos_ = start;
          fail({"exp", "log", "sin", "cos", "tan", "sqrt", "abs"}, "unknown function '" + name + "'");
        }
        ++pos_;
        Expression arg = parse_expr();
        if (!peek(')')) fail({")"}, "unbalanced parenthesis");
        ++pos_;
        return Expression::call(it->second, std::move(arg));
      }
      if (name == "pi") return Expression::pi();
      return Expression::variable(name);
    }
    fail({"expression"}, std::string("unexpected character '") + c + "'");
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      fail({"number"}, "malformed number");
    }
    return Expression(value);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse(std::string_view source) { return Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Differentiation and substitution. Both memoize on node identity so shared
// subtrees stay shared in the result.

namespace {

using Memo = std::unordered_map<const void*, Expression>;

Expression derive(const Expression& e, std::string_view v, Memo& memo);

Expression derive_uncached(const Expression& e, std::string_view v, Memo& memo) {
  if (!e.depends_on(v)) return Expression(0.0);
  switch (e.kind()) {
    case Kind::Number:
    case Kind::Pi: return Expression(0.0);
    case Kind::Variable: return Expression(e.variable_name() == v ? 1.0 : 0.0);
    case Kind::Neg: return -derive(e.lhs(), v, memo);
    case Kind::Add: return derive(e.lhs(), v, memo) + derive(e.rhs(), v, memo);
    case Kind::Sub: return derive(e.lhs(), v, memo) - derive(e.rhs(), v, memo);
    case Kind::Mul: {
      const Expression& a = e.lhs();
      const Expression& b = e.rhs();
      return derive(a, v, memo) * b + a * derive(b, v, memo);
    }
    case Kind::Div: {
      const Expression& a = e.lhs();
      const Expression& b = e.rhs();
      return derive(a, v, memo) / b - a * derive(b, v, memo) / pow(b, Expression(2.0));
    }
    case Kind::Pow: {
      const Expression& a = e.lhs();
      const Expression& b = e.rhs();
      if (!b.depends_on(v)) {
        return b * pow(a, b - Expression(1.0)) * derive(a, v, memo);
      }
      if (!a.depends_on(v)) {
        return e * log(a) * derive(b, v, memo);
      }
      return e * (derive(b, v, memo) * log(a) + b * derive(a, v, memo) / a);
    }
    case Kind::Call: {
      const Expression& a = e.lhs();
      const Expression da = derive(a, v, memo);
      switch (e.function()) {
        case Function::Exp: return e * da;
        case Function::Log: return da / a;
        case Function::Sin: return cos(a) * da;
        case Function::Cos: return -(sin(a) * da);
        case Function::Tan: return da / pow(cos(a), Expression(2.0));
        case Function::Sqrt: return da / (Expression(2.0) * e);
        case Function::Abs: return da * a / e;
      }
    }
  }
  return Expression(0.0);
}


Expression derive(const Expression& e, std::string_view v, Memo& memo) {
  if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
  Expression d = derive_uncached(e, v, memo);
  memo.emplace(e.id(), d);
  return d;
}

Expression replace(const Expression& e, std::string_view var, const Expression& with, Memo& memo) {
  if (!e.depends_on(var)) return e;
  if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
  Expression out;
  switch (e.kind()) {
    case Kind::Variable: out = with; break;
    case Kind::Neg: out = -replace(e.lhs(), var, with, memo); break;
    case Kind::Call: out = make_call(e.function(), replace(e.lhs(), var, with, memo)); break;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div:
    case Kind::Pow:
      out = make_binary(e.kind(), replace(e.lhs(), var, with, memo), replace(e.rhs(), var, with, memo));
      break;
    default: out = e; break;
  }
  memo.emplace(e.id(), out);
  return out;
}

}  // namespace

Expression differentiate(const Expression& e, std::string_view var, int order) {
  if (order < 1) throw InvalidArgument("differentiation order must be >= 1");
  Expression out = e;
  for (int k = 0; k < order; ++k) {
    Memo memo;
    out = derive(out, var, memo);
  }
  return out;
}

Expression substitute(const Expression& e, std::string_view var, const Expression& replacement) {
  Memo memo;
  return replace(e, var, replacement, memo);
}

Expression bind(const Expression& e, const Bindings& values) {
  Expression out = e;
  for (const auto& [name, value] : values) out = substitute(out, name, Expression(value));
  return out;
}

// ---------------------------------------------------------------------------
// Compiled evaluation: one register per distinct node, in topological order.

namespace {

struct Compiler {
  std::span<const std::string> slots;
  std::unordered_map<const void*, int> reg;
  std::vector<std::pair<Expression, int>> order;  // node, slot for variables

  int visit(const Expression& e) {
    if (auto it = reg.find(e.id()); it != reg.end()) return it->second;
    switch (e.kind()) {
      case Kind::Neg:
      case Kind::Call: visit(e.lhs()); break;
      case Kind::Add:
      case Kind::Sub:
      case Kind::Mul:
      case Kind::Div:
      case Kind::Pow:
        visit(e.lhs());
        visit(e.rhs());
        break;
      default: break;
    }
    int slot = -1;
    if (e.kind() == Kind::Variable) {
      auto it = std::find(slots.begin(), slots.end(), e.variable_name());
      if (it == slots.end()) throw UnboundVariable(e.variable_name());
      slot = static_cast<int>(it - slots.begin());
    }
    const int r = static_cast<int>(order.size());
    order.emplace_back(e, slot);
    reg.emplace(e.id(), r);
    return r;
  }
};

}  // namespace

CompiledExpression::CompiledExpression(const Expression& e, std::span<const std::string> slots) {
  Compiler c{slots, {}, {}};
  c.visit(e);
  code_.reserve(c.order.size());
  for (const auto& [node, slot] : c.order) {
    Instr in{node.kind(), Function::Exp, slot, 0.0};
    switch (node.kind()) {
      case Kind::Number: in.value = node.number_value(); break;
      case Kind::Pi: in.value = std::numbers::pi; break;
      case Kind::Variable: constant_ = false; break;
      case Kind::Call:
        in.fn = node.function();
        in.slot = c.reg.at(node.lhs().id());
        break;
      case Kind::Neg: in.slot = c.reg.at(node.lhs().id()); break;
      default:
        in.slot = c.reg.at(node.lhs().id());
        in.value = static_cast<double>(c.reg.at(node.rhs().id()));
        break;
    }
    code_.push_back(in);
  }
  max_stack_ = code_.size();
}

double CompiledExpression::operator()(std::span<const double> values) const {
  if (code_.empty()) return 0.0;
  constexpr std::size_t kInline = 64;
  double inline_regs[kInline];
  std::vector<double> heap_regs;
  double* r = inline_regs;
  if (max_stack_ > kInline) {
    heap_regs.resize(max_stack_);
    r = heap_regs.data();
  }
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    switch (in.kind) {
      case Kind::Number:
      case Kind::Pi: r[i] = in.value; break;
      case Kind::Variable: r[i] = values[static_cast<std::size_t>(in.slot)]; break;
      case Kind::Neg: r[i] = -r[in.slot]; break;
      case Kind::Call: r[i] = apply_function(in.fn, r[in.slot]); break;
      default: r[i] = apply_binary(in.kind, r[in.slot], r[static_cast<int>(in.value)]); break;
    }
  }
  return r[code_.size() - 1];
}

}  // namespace arwmass::expr
