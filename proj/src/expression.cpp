#include "fluxreg/expression.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <numbers>

#include "fluxreg/descriptor.hpp"
#include "fluxreg/error.hpp"

namespace fluxreg {

namespace {

using Node = std::function<double(double, double)>;

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Node run() {
    Node n = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ConfigError, "expression '" + text_ + "' at " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Node expr() {
    Node lhs = term();
    for (;;) {
      if (eat('+')) {
        Node rhs = term();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) + rhs(x, y); };
      } else if (eat('-')) {
        Node rhs = term();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) - rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (eat('*')) {
        Node rhs = unary();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) * rhs(x, y); };
      } else if (eat('/')) {
        Node rhs = unary();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) / rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  // Unary minus binds looser than ^, so -x^2 = -(x^2).
  Node unary() {
    if (eat('-')) {
      Node n = unary();
      return [n](double x, double y) { return -n(x, y); };
    }
    if (eat('+')) return unary();
    return power();
  }

  Node power() {
    Node base = primary();
    if (eat('^')) {
      Node exponent = unary();
      return [base, exponent](double x, double y) { return std::pow(base(x, y), exponent(x, y)); };
    }
    return base;
  }

  Node primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end");
    const char c = text_[pos_];
    if (eat('(')) {
      Node n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Node number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    try {
      v = parse_number(text_.substr(start, pos_ - start));
    } catch (const Error&) {
      fail("bad number");
    }
    return [v](double, double) { return v; };
  }

  Node word() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name == "x") return [](double x, double) { return x; };
    if (name == "y") return [](double, double y) { return y; };
    if (name == "pi") return [](double, double) { return std::numbers::pi; };
    if (name == "e") return [](double, double) { return std::numbers::e; };
    static const std::map<std::string, double (*)(double)> functions = {
        {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
        {"tan", [](double v) { return std::tan(v); }},   {"sinh", [](double v) { return std::sinh(v); }},
        {"cosh", [](double v) { return std::cosh(v); }}, {"tanh", [](double v) { return std::tanh(v); }},
        {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
        {"sqrt", [](double v) { return std::sqrt(v); }}, {"abs", [](double v) { return std::abs(v); }},
    };
    const auto it = functions.find(name);
    if (it == functions.end()) fail("unknown name '" + name + "'");
    if (!eat('(')) fail("expected '(' after " + name);
    Node arg = expr();
    if (!eat(')')) fail("expected ')'");
    const auto fn = it->second;
    return [fn, arg](double x, double y) { return fn(arg(x, y)); };
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser parser(text);
  return Expression(parser.run(), text);
}

}  // namespace fluxreg
