#pragma once

// Arithmetic expressions in x and y: + - * / ^, parentheses, unary minus,
// the constants pi and e, and sin cos tan sinh cosh tanh exp log sqrt abs.

#include <functional>
#include <memory>
#include <string>

namespace fluxreg {

class Expression {
 public:
  /// Throws ConfigError with the offending position.
  static Expression parse(const std::string& text);

  double operator()(double x, double y) const { return eval_(x, y); }
  const std::string& text() const { return text_; }

 private:
  Expression(std::function<double(double, double)> eval, std::string text)
      : eval_(std::move(eval)), text_(std::move(text)) {}
  std::function<double(double, double)> eval_;
  std::string text_;
};

}  // namespace fluxreg
