#include "metric_lab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "metric_lab/errors.hpp"

namespace metric_lab {

struct Expression::Node {
  enum class Op { constant, coord, neg, add, sub, mul, div, pow, exp, log, abs, ind };
  Op op = Op::constant;
  double value = 0.0;
  std::size_t index = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

  std::size_t arity = 0;

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("formula \"" + s_ + "\": " + what + " at position " + std::to_string(pos_));
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
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = make(Node::Op::add, n, term());
      else if (accept('-')) n = make(Node::Op::sub, n, term());
      else return n;
    }
  }
  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) n = make(Node::Op::mul, n, unary());
      else if (accept('/')) n = make(Node::Op::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Node::Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto n = primary();
    if (accept('^')) return make(Node::Op::pow, n, unary());
    return n;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of formula");
    const char c = s_[pos_];
    if (accept('(')) {
      auto n = expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (res.ec != std::errc()) fail("bad number");
      pos_ = static_cast<std::size_t>(res.ptr - s_.data());
      auto n = std::make_shared<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x0" || name == "x1" || name == "x2") {
        auto n = std::make_shared<Node>();
        n->op = Node::Op::coord;
        n->index = static_cast<std::size_t>(name[1] - '0');
        arity = std::max(arity, n->index + 1);
        return n;
      }
      if (name == "pi" || name == "e") {
        auto n = std::make_shared<Node>();
        n->value = name == "pi" ? std::numbers::pi : std::numbers::e;
        return n;
      }
      Node::Op op;
      if (name == "exp") op = Node::Op::exp;
      else if (name == "log") op = Node::Op::log;
      else if (name == "abs") op = Node::Op::abs;
      else if (name == "ind") op = Node::Op::ind;
      else {
        pos_ = start;
        fail("unknown name '" + name + "'");
      }
      expect('(');
      auto arg = expr();
      expect(')');
      return make(op, arg);
    }
    fail("unexpected character");
  }
};

double eval(const Node& n, std::span<const double> x) {
  switch (n.op) {
    case Node::Op::constant: return n.value;
    case Node::Op::coord: return x[n.index];
    case Node::Op::neg: return -eval(*n.a, x);
    case Node::Op::add: return eval(*n.a, x) + eval(*n.b, x);
    case Node::Op::sub: return eval(*n.a, x) - eval(*n.b, x);
    case Node::Op::mul: return eval(*n.a, x) * eval(*n.b, x);
    case Node::Op::div: return eval(*n.a, x) / eval(*n.b, x);
    case Node::Op::pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
    case Node::Op::exp: return std::exp(eval(*n.a, x));
    case Node::Op::log: return std::log(eval(*n.a, x));
    case Node::Op::abs: return std::abs(eval(*n.a, x));
    case Node::Op::ind: return eval(*n.a, x) >= 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse();
  e.arity_ = p.arity;
  e.text_ = text;
  return e;
}

double Expression::evaluate(std::span<const double> coords) const {
  if (coords.size() < arity_) throw ArgumentError("formula uses more coordinates than the space has");
  return eval(*root_, coords);
}

}  // namespace metric_lab
