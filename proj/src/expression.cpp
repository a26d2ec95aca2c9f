#include "magspec/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "magspec/errors.hpp"

namespace magspec {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Abs, Sign, Min, Max, SelectLe };

struct Expression::Node {
  Op op = Op::Const;
  double value = 0.0;
  int axis = 0;
  // SelectLe: (c0 <= c1) ? c2 : c3
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(int axis) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Var;
  n->axis = axis;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

NodePtr make(Op op, std::vector<NodePtr> args) {
  // light algebraic folding keeps derivative trees small
  if (op == Op::Add) {
    if (is_const(args[0], 0.0)) return args[1];
    if (is_const(args[1], 0.0)) return args[0];
  } else if (op == Op::Sub) {
    if (is_const(args[1], 0.0)) return args[0];
  } else if (op == Op::Mul) {
    if (is_const(args[0], 0.0) || is_const(args[1], 0.0)) return make_const(0.0);
    if (is_const(args[0], 1.0)) return args[1];
    if (is_const(args[1], 1.0)) return args[0];
  } else if (op == Op::Div) {
    if (is_const(args[0], 0.0)) return make_const(0.0);
    if (is_const(args[1], 1.0)) return args[0];
  } else if (op == Op::Neg) {
    if (args[0]->op == Op::Neg) return args[0]->args[0];
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

double eval(const Expression::Node& n, const Point& x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x[n.axis];
    case Op::Add: return eval(*n.args[0], x) + eval(*n.args[1], x);
    case Op::Sub: return eval(*n.args[0], x) - eval(*n.args[1], x);
    case Op::Mul: return eval(*n.args[0], x) * eval(*n.args[1], x);
    case Op::Div: return eval(*n.args[0], x) / eval(*n.args[1], x);
    case Op::Pow: {
      const double b = eval(*n.args[0], x);
      const Expression::Node& e = *n.args[1];
      if (e.op == Op::Const && e.value == 2.0) return b * b;
      return std::pow(b, eval(e, x));
    }
    case Op::Neg: return -eval(*n.args[0], x);
    case Op::Sin: return std::sin(eval(*n.args[0], x));
    case Op::Cos: return std::cos(eval(*n.args[0], x));
    case Op::Exp: return std::exp(eval(*n.args[0], x));
    case Op::Log: return std::log(eval(*n.args[0], x));
    case Op::Sqrt: return std::sqrt(eval(*n.args[0], x));
    case Op::Abs: return std::abs(eval(*n.args[0], x));
    case Op::Sign: {
      const double v = eval(*n.args[0], x);
      return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    }
    case Op::Min: return std::min(eval(*n.args[0], x), eval(*n.args[1], x));
    case Op::Max: return std::max(eval(*n.args[0], x), eval(*n.args[1], x));
    case Op::SelectLe:
      return eval(*n.args[0], x) <= eval(*n.args[1], x) ? eval(*n.args[2], x) : eval(*n.args[3], x);
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, int axis) {
  const auto& a = n->args;
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(n->axis == axis ? 1.0 : 0.0);
    case Op::Add: return make(Op::Add, {diff(a[0], axis), diff(a[1], axis)});
    case Op::Sub: return make(Op::Sub, {diff(a[0], axis), diff(a[1], axis)});
    case Op::Mul:
      return make(Op::Add, {make(Op::Mul, {diff(a[0], axis), a[1]}), make(Op::Mul, {a[0], diff(a[1], axis)})});
    case Op::Div: {
      // (f' g - f g') / g^2
      auto num = make(Op::Sub, {make(Op::Mul, {diff(a[0], axis), a[1]}), make(Op::Mul, {a[0], diff(a[1], axis)})});
      return make(Op::Div, {num, make(Op::Mul, {a[1], a[1]})});
    }
    case Op::Pow: {
      if (a[1]->op == Op::Const) {
        const double c = a[1]->value;
        if (c == 0.0) return make_const(0.0);
        auto lower = c == 2.0 ? a[0] : make(Op::Pow, {a[0], make_const(c - 1.0)});
        return make(Op::Mul, {make(Op::Mul, {make_const(c), lower}), diff(a[0], axis)});
      }
      // f^g (g' log f + g f'/f)
      auto t1 = make(Op::Mul, {diff(a[1], axis), make(Op::Log, {a[0]})});
      auto t2 = make(Op::Div, {make(Op::Mul, {a[1], diff(a[0], axis)}), a[0]});
      return make(Op::Mul, {n, make(Op::Add, {t1, t2})});
    }
    case Op::Neg: return make(Op::Neg, {diff(a[0], axis)});
    case Op::Sin: return make(Op::Mul, {make(Op::Cos, {a[0]}), diff(a[0], axis)});
    case Op::Cos: return make(Op::Neg, {make(Op::Mul, {make(Op::Sin, {a[0]}), diff(a[0], axis)})});
    case Op::Exp: return make(Op::Mul, {n, diff(a[0], axis)});
    case Op::Log: return make(Op::Div, {diff(a[0], axis), a[0]});
    case Op::Sqrt: return make(Op::Div, {diff(a[0], axis), make(Op::Mul, {make_const(2.0), n})});
    case Op::Abs: return make(Op::Mul, {make(Op::Sign, {a[0]}), diff(a[0], axis)});
    case Op::Sign: return make_const(0.0);
    case Op::Min: return make(Op::SelectLe, {a[0], a[1], diff(a[0], axis), diff(a[1], axis)});
    case Op::Max: return make(Op::SelectLe, {a[1], a[0], diff(a[0], axis), diff(a[1], axis)});
    case Op::SelectLe: return make(Op::SelectLe, {a[0], a[1], diff(a[2], axis), diff(a[3], axis)});
  }
  return make_const(0.0);
}

bool depends_on_vars(const Expression::Node& n) {
  if (n.op == Op::Var) return true;
  for (const auto& c : n.args)
    if (depends_on_vars(*c)) return true;
  return false;
}

void print(const Expression::Node& n, std::ostream& os) {
  auto bin = [&](const char* sym) {
    os << '(';
    print(*n.args[0], os);
    os << sym;
    print(*n.args[1], os);
    os << ')';
  };
  auto fn = [&](const char* name) {
    os << name << '(';
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) os << ',';
      print(*n.args[i], os);
    }
    os << ')';
  };
  switch (n.op) {
    case Op::Const: os << n.value; break;
    case Op::Var: os << 'x' << n.axis + 1; break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg: os << "(-"; print(*n.args[0], os); os << ')'; break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
    case Op::Exp: fn("exp"); break;
    case Op::Log: fn("log"); break;
    case Op::Sqrt: fn("sqrt"); break;
    case Op::Abs: fn("abs"); break;
    case Op::Sign: fn("sign"); break;
    case Op::Min: fn("min"); break;
    case Op::Max: fn("max"); break;
    case Op::SelectLe: fn("select_le"); break;
  }
}

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    std::ostringstream os;
    os << "expression '" << text_ << "': " << why << " at column " << pos_ + 1;
    throw ConfigError(os.str());
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

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, {lhs, term()});
      else if (accept('-')) lhs = make(Op::Sub, {lhs, term()});
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, {lhs, unary()});
      else if (accept('/')) lhs = make(Op::Div, {lhs, unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    return make_const(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3') {
      const int axis = name[1] - '1';
      if (axis >= dim_) fail("variable " + name + " exceeds the field dimension");
      return make_var(axis);
    }
    if (name == "pi") return make_const(std::numbers::pi);
    static const struct {
      const char* name;
      Op op;
      int arity;
    } kFunctions[] = {{"sin", Op::Sin, 1}, {"cos", Op::Cos, 1}, {"exp", Op::Exp, 1},  {"log", Op::Log, 1},
                      {"sqrt", Op::Sqrt, 1}, {"abs", Op::Abs, 1}, {"min", Op::Min, 2}, {"max", Op::Max, 2}};
    for (const auto& f : kFunctions) {
      if (name != f.name) continue;
      if (!accept('(')) fail("expected '(' after " + name);
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      if (!accept(')')) fail("expected ')' closing " + name);
      if (static_cast<int>(args.size()) != f.arity) fail("wrong number of arguments to " + name);
      return make(f.op, std::move(args));
    }
    fail("unknown identifier '" + name + "'");
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : node_(make_const(0.0)) {}

Expression Expression::parse(std::string_view text, int dim) { return Expression(Parser(text, dim).parse()); }

Expression Expression::constant(double value) { return Expression(make_const(value)); }

Expression Expression::variable(int axis) { return Expression(make_var(axis)); }

double Expression::evaluate(const Point& x) const { return eval(*node_, x); }

Expression Expression::derivative(int axis) const { return Expression(diff(node_, axis)); }

bool Expression::is_constant() const { return !depends_on_vars(*node_); }

std::string Expression::to_string() const {
  std::ostringstream os;
  os.precision(17);
  print(*node_, os);
  return os.str();
}

Expression operator+(const Expression& a, const Expression& b) { return Expression(make(Op::Add, {a.node_, b.node_})); }
Expression operator-(const Expression& a, const Expression& b) { return Expression(make(Op::Sub, {a.node_, b.node_})); }
Expression operator*(const Expression& a, const Expression& b) { return Expression(make(Op::Mul, {a.node_, b.node_})); }
Expression operator-(const Expression& a) { return Expression(make(Op::Neg, {a.node_})); }

}  // namespace magspec
