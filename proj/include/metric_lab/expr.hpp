#pragma once

#include <memory>
#include <span>
#include <string>

namespace metric_lab {

/// Field formula over point coordinates x0, x1, x2.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | x0 | x1 | x2 | pi | e | '(' expr ')'
///            | (exp | log | abs | ind) '(' expr ')'
///
/// ind(e) is 1 where e >= 0 and 0 elsewhere, so ind(a*x0 + b*x1 - c) is the
/// indicator of a half-space.
class Expression {
 public:
  struct Node;

  /// Throws ConfigError naming the offending position.
  static Expression parse(const std::string& text);

  double evaluate(std::span<const double> coords) const;
  /// Largest coordinate index used plus one.
  std::size_t arity() const { return arity_; }
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::size_t arity_ = 0;
  std::string text_;
};

}  // namespace metric_lab
