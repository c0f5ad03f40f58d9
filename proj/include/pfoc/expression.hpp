#pragma once

#include <memory>
#include <string>

namespace pfoc {

/**
 * Closed-form field expression over x, y, t with numbers, pi, + - * / ^,
 * parentheses and sin, cos, exp, tanh. Parsed once, evaluated many times.
 */
class Expression {
 public:
  struct Node;

  /// Throws ConfigError with the column of the first offending character.
  explicit Expression(const std::string& text);
  ~Expression();
  Expression(const Expression&);
  Expression& operator=(const Expression&);
  Expression(Expression&&) noexcept;
  Expression& operator=(Expression&&) noexcept;

  double operator()(double x, double y = 0.0, double t = 0.0) const;
  const std::string& text() const { return text_; }
  bool uses_time() const { return uses_time_; }

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  bool uses_time_ = false;
};

}  // namespace pfoc
