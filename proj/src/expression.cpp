#include "pfoc/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "pfoc/error.hpp"

namespace pfoc {

struct Expression::Node {
  enum class Op { Number, X, Y, T, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Tanh };
  Op op = Op::Number;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;

  double eval(double x, double y, double t) const {
    switch (op) {
      case Op::Number: return value;
      case Op::X: return x;
      case Op::Y: return y;
      case Op::T: return t;
      case Op::Neg: return -a->eval(x, y, t);
      case Op::Add: return a->eval(x, y, t) + b->eval(x, y, t);
      case Op::Sub: return a->eval(x, y, t) - b->eval(x, y, t);
      case Op::Mul: return a->eval(x, y, t) * b->eval(x, y, t);
      case Op::Div: return a->eval(x, y, t) / b->eval(x, y, t);
      case Op::Pow: return std::pow(a->eval(x, y, t), b->eval(x, y, t));
      case Op::Sin: return std::sin(a->eval(x, y, t));
      case Op::Cos: return std::cos(a->eval(x, y, t));
      case Op::Exp: return std::exp(a->eval(x, y, t));
      case Op::Tanh: return std::tanh(a->eval(x, y, t));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = value;
  return n;
}

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | '+' unary | power
// power  := atom ('^' unary)?
// atom   := number | name | name '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(const std::string& s, bool& uses_time) : s_(s), uses_time_(uses_time) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

 private:
  const std::string& s_;
  bool& uses_time_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression \"" + s_ + "\": " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept('+')) lhs = make(Op::Add, lhs, term());
      else if (accept('-')) lhs = make(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (true) {
      if (accept('*')) lhs = make(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make(Op::Number, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return make(Op::X);
      if (name == "y") return make(Op::Y);
      if (name == "t") {
        uses_time_ = true;
        return make(Op::T);
      }
      if (name == "pi") return make(Op::Number, nullptr, nullptr, std::numbers::pi);
      Op fn;
      if (name == "sin") fn = Op::Sin;
      else if (name == "cos") fn = Op::Cos;
      else if (name == "exp") fn = Op::Exp;
      else if (name == "tanh") fn = Op::Tanh;
      else {
        pos_ = start;
        fail("unknown name '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after " + name);
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(fn, arg);
    }
    fail("unexpected character");
  }
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text) {
  root_ = Parser(text_, uses_time_).parse();
}

Expression::~Expression() = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;

double Expression::operator()(double x, double y, double t) const { return root_->eval(x, y, t); }

}  // namespace pfoc
