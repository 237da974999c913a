#include "plrecon/coefficients.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace plr {

struct CoeffExpr::Node {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Fun };
  Kind kind;
  double value = 0.0;     // Const
  int var = 0;            // Var: 0 -> x1, 1 -> x2
  std::string fun;        // Fun: exp/sin/cos/sqrt
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = CoeffExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr mk(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Parser {
  const std::string& s;
  size_t pos = 0;

  explicit Parser(const std::string& src) : s(src) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool eat(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      char c = peek();
      if (c == '+' || c == '-') {
        ++pos;
        NodePtr rhs = parse_term();
        lhs = mk(c == '+' ? Node::Kind::Add : Node::Kind::Sub, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      char c = peek();
      if (c == '*' || c == '/') {
        ++pos;
        NodePtr rhs = parse_factor();
        lhs = mk(c == '*' ? Node::Kind::Mul : Node::Kind::Div, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  // unary minus binds looser than ^: -x1^2 == -(x1^2)
  NodePtr parse_factor() {
    if (eat('-')) return mk(Node::Kind::Neg, parse_factor());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) {
      // right-associative; exponent may itself be -x etc.
      NodePtr e = parse_factor();
      return mk(Node::Kind::Pow, base, e);
    }
    return base;
  }

  NodePtr parse_atom() {
    char c = peek();
    if (c == '(') {
      ++pos;
      NodePtr e = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos);
      return e;
    }
    if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
    if (std::isalpha((unsigned char)c)) return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }

  NodePtr parse_number() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() &&
           (std::isdigit((unsigned char)s[pos]) || s[pos] == '.'))
      ++pos;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      size_t save = pos++;
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
      if (pos < s.size() && std::isdigit((unsigned char)s[pos])) {
        while (pos < s.size() && std::isdigit((unsigned char)s[pos])) ++pos;
      } else {
        pos = save;  // 'e' was not an exponent
      }
    }
    try {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Const;
      n->value = std::stod(s.substr(start, pos - start));
      return n;
    } catch (...) {
      throw ParseError("bad number", start);
    }
  }

  NodePtr parse_ident() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && (std::isalnum((unsigned char)s[pos]) || s[pos] == '_'))
      ++pos;
    std::string id = s.substr(start, pos - start);
    if (id == "x1" || id == "x2") {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Var;
      n->var = (id == "x1") ? 0 : 1;
      return n;
    }
    if (id == "exp" || id == "sin" || id == "cos" || id == "sqrt") {
      if (!eat('(')) throw ParseError("expected '(' after " + id, pos);
      NodePtr arg = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Fun;
      n->fun = id;
      n->a = arg;
      return n;
    }
    throw ParseError("unknown identifier '" + id + "'", start);
  }
};

double eval_node(const Node* n, double x1, double x2) {
  switch (n->kind) {
    case Node::Kind::Const: return n->value;
    case Node::Kind::Var:   return n->var == 0 ? x1 : x2;
    case Node::Kind::Add:   return eval_node(n->a.get(), x1, x2) + eval_node(n->b.get(), x1, x2);
    case Node::Kind::Sub:   return eval_node(n->a.get(), x1, x2) - eval_node(n->b.get(), x1, x2);
    case Node::Kind::Mul:   return eval_node(n->a.get(), x1, x2) * eval_node(n->b.get(), x1, x2);
    case Node::Kind::Div:   return eval_node(n->a.get(), x1, x2) / eval_node(n->b.get(), x1, x2);
    case Node::Kind::Pow:   return std::pow(eval_node(n->a.get(), x1, x2), eval_node(n->b.get(), x1, x2));
    case Node::Kind::Neg:   return -eval_node(n->a.get(), x1, x2);
    case Node::Kind::Fun: {
      double a = eval_node(n->a.get(), x1, x2);
      if (n->fun == "exp") return std::exp(a);
      if (n->fun == "sin") return std::sin(a);
      if (n->fun == "cos") return std::cos(a);
      return std::sqrt(a);
    }
  }
  return 0.0;
}

int precedence(Node::Kind k) {
  switch (k) {
    case Node::Kind::Add:
    case Node::Kind::Sub: return 1;
    case Node::Kind::Mul:
    case Node::Kind::Div: return 2;
    case Node::Kind::Neg: return 3;
    case Node::Kind::Pow: return 4;
    default: return 5;
  }
}

void print_node(const Node* n, std::string& out, int parent_prec) {
  int prec = precedence(n->kind);
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (n->kind) {
    case Node::Kind::Const: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", n->value);
      out += buf;
      break;
    }
    case Node::Kind::Var: out += (n->var == 0 ? "x1" : "x2"); break;
    case Node::Kind::Add:
      print_node(n->a.get(), out, prec);
      out += " + ";
      print_node(n->b.get(), out, prec + 1);
      break;
    case Node::Kind::Sub:
      print_node(n->a.get(), out, prec);
      out += " - ";
      print_node(n->b.get(), out, prec + 1);
      break;
    case Node::Kind::Mul:
      print_node(n->a.get(), out, prec);
      out += "*";
      print_node(n->b.get(), out, prec + 1);
      break;
    case Node::Kind::Div:
      print_node(n->a.get(), out, prec);
      out += "/";
      print_node(n->b.get(), out, prec + 1);
      break;
    case Node::Kind::Neg:
      out += "-";
      print_node(n->a.get(), out, prec);
      break;
    case Node::Kind::Pow:
      print_node(n->a.get(), out, prec + 1);
      out += "^";
      print_node(n->b.get(), out, prec);
      break;
    case Node::Kind::Fun:
      out += n->fun;
      out += '(';
      print_node(n->a.get(), out, 0);
      out += ')';
      break;
  }
  if (paren) out += ')';
}

bool equal_nodes(const Node* a, const Node* b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case Node::Kind::Const: return a->value == b->value;
    case Node::Kind::Var:   return a->var == b->var;
    case Node::Kind::Fun:
      return a->fun == b->fun && equal_nodes(a->a.get(), b->a.get());
    case Node::Kind::Neg:   return equal_nodes(a->a.get(), b->a.get());
    default:
      return equal_nodes(a->a.get(), b->a.get()) &&
             equal_nodes(a->b.get(), b->b.get());
  }
}

}  // namespace

CoeffExpr CoeffExpr::parse(const std::string& src) {
  Parser p(src);
  CoeffExpr e;
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size())
    throw ParseError("trailing input", p.pos);
  e.root_ = root;
  return e;
}

double CoeffExpr::eval(double x1, double x2) const {
  if (!root_) throw std::runtime_error("empty expression");
  return eval_node(root_.get(), x1, x2);
}

std::string CoeffExpr::print() const {
  if (!root_) return "";
  std::string out;
  print_node(root_.get(), out, 0);
  return out;
}

bool CoeffExpr::equals(const CoeffExpr& other) const {
  return equal_nodes(root_.get(), other.root_.get());
}

BoundsReport validate_bounds(const ProblemCoefficients& c, const Grid& g) {
  BoundsReport r;
  if (c.lambda <= 0.0 || c.m1 <= 0.0) {
    r.message = "bound constants lambda, m1 must be positive";
    return r;
  }
  struct Item {
    const CoeffExpr* e;
    const char* name;
    double lo, hi;
    double* mn;
    double* mx;
  };
  Item items[2] = {
      {&c.sigma, "sigma", c.lambda, 1.0 / c.lambda, &r.sigma_min, &r.sigma_max},
      {&c.gamma, "gamma", c.m1, 1.0 / c.m1, &r.gamma_min, &r.gamma_max},
  };
  for (const Item& it : items) {
    double mn = 0, mx = 0;
    bool first = true;
    for (int j = 0; j < g.n2; ++j) {
      for (int i = 0; i < g.n1; ++i) {
        double val;
        try {
          val = it.e->eval(g.x1(i), g.x2(j));
        } catch (const std::exception& ex) {
          r.message = std::string(it.name) + ": evaluation failed at node (" +
                      std::to_string(i) + "," + std::to_string(j) + "): " +
                      ex.what();
          return r;
        }
        if (!std::isfinite(val)) {
          r.message = std::string(it.name) + " is non-finite at node (" +
                      std::to_string(i) + "," + std::to_string(j) + "), x = (" +
                      std::to_string(g.x1(i)) + "," + std::to_string(g.x2(j)) +
                      ")";
          return r;
        }
        if (first || val < mn) mn = val;
        if (first || val > mx) mx = val;
        first = false;
        if (val <= it.lo || val >= it.hi) {
          r.message = std::string(it.name) + " = " + std::to_string(val) +
                      " violates (" + std::to_string(it.lo) + ", " +
                      std::to_string(it.hi) + ") at node (" + std::to_string(i) +
                      "," + std::to_string(j) + "), x = (" +
                      std::to_string(g.x1(i)) + "," + std::to_string(g.x2(j)) +
                      ")";
          *it.mn = mn;
          *it.mx = mx;
          return r;
        }
      }
    }
    *it.mn = mn;
    *it.mx = mx;
  }
  r.ok = true;
  r.message = "ok";
  return r;
}

ScalarField sample(const CoeffExpr& c, const Grid& g) {
  return ScalarField::from_fn(
      g, [&](double x1, double x2) { return Cplx(c.eval(x1, x2), 0.0); });
}

}  // namespace plr
