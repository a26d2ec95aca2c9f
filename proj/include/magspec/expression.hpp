#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "magspec/grid.hpp"

namespace magspec {

/// Scalar expression over x1..x3 parsed from the field-config grammar:
/// + - * / ^, unary minus, numbers, pi, and sin cos exp log sqrt abs min max.
/// Immutable; copies share the tree.
class Expression {
 public:
  struct Node;

  Expression();  // the constant 0
  static Expression parse(std::string_view text, int dim);
  static Expression constant(double value);
  static Expression variable(int axis);

  double evaluate(const Point& x) const;

  /// Symbolic partial derivative with respect to x^{axis+1}.
  Expression derivative(int axis) const;

  bool is_constant() const;
  std::string to_string() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);

 private:
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace magspec
