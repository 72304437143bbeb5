#include "balans/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace balans {

namespace {

bool all_zero_derivs(const Jet2& w) {
  return w.d_u == 0.0 && w.d_x == 0.0 && w.d_xu == 0.0 && w.d_xx == 0.0;
}

Jet2 chain(const Jet2& w, double v, double h1, double h2) {
  Jet2 r;
  r.value = v;
  r.d_u = h1 * w.d_u;
  r.d_x = h1 * w.d_x;
  r.d_xu = h2 * w.d_x * w.d_u + h1 * w.d_xu;
  r.d_xx = h2 * w.d_x * w.d_x + h1 * w.d_xx;
  return r;
}

double ipow(double base, long long n) {
  if (n < 0) return 1.0 / ipow(base, -n);
  double acc = 1.0, b = base;
  while (n > 0) {
    if (n & 1) acc *= b;
    b *= b;
    n >>= 1;
  }
  return acc;
}

struct Token {
  enum Kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end } kind;
  std::string_view text;
  std::size_t offset;
  double num = 0.0;
};

class Lexer {
public:
  explicit Lexer(std::string_view s) : src_(s) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                  src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
    tok_.offset = pos_ + 1; // offsets are 1-based byte positions
    if (pos_ >= src_.size()) {
      tok_.kind = Token::end;
      tok_.text = {};
      return;
    }
    char c = src_[pos_];
    switch (c) {
      case '+': single(Token::plus); return;
      case '-': single(Token::minus); return;
      case '*': single(Token::star); return;
      case '/': single(Token::slash); return;
      case '^': single(Token::caret); return;
      case '(': single(Token::lparen); return;
      case ')': single(Token::rparen); return;
      case ',': single(Token::comma); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_ + 1);
  }

  void single(Token::Kind k) {
    tok_.kind = k;
    tok_.text = src_.substr(pos_, 1);
    ++pos_;
  }

  void lex_number() {
    std::size_t start = pos_;
    bool digits = false;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
      digits = true;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        digits = true;
      }
    }
    if (!digits) throw ParseError("malformed number", start + 1);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        pos_ = mark; // bare 'e' after a number is not an exponent
      } else {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    tok_.kind = Token::number;
    tok_.text = src_.substr(start, pos_ - start);
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), v);
    if (ec != std::errc() || p != tok_.text.data() + tok_.text.size())
      throw ParseError("malformed number", start + 1);
    tok_.num = v;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

struct Builtin {
  std::string_view name;
  Expr::Op op;
  int arity;
};

constexpr Builtin kBuiltins[] = {
    {"sin", Expr::Op::sin, 1},  {"cos", Expr::Op::cos, 1},
    {"exp", Expr::Op::exp, 1},  {"log", Expr::Op::log, 1},
    {"abs", Expr::Op::abs, 1},  {"sqrt", Expr::Op::sqrt, 1},
    {"min", Expr::Op::min, 2},  {"max", Expr::Op::max, 2},
    {"if", Expr::Op::branch_if, 3},
};

} // namespace

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Expr run(std::string_view src) {
    Expr e;
    e.source_.assign(src);
    parse_expr(e);
    if (lex_.peek().kind != Token::end)
      throw ParseError("unexpected trailing input", lex_.peek().offset);
    return e;
  }

private:
  using Op = Expr::Op;

  std::int32_t push(Expr& e, Expr::Node n) {
    e.nodes_.push_back(n);
    return static_cast<std::int32_t>(e.nodes_.size() - 1);
  }

  std::int32_t leaf(Expr& e, Op op, std::size_t off, double num = 0.0) {
    Expr::Node n;
    n.op = op;
    n.number = num;
    n.offset = static_cast<std::uint32_t>(off);
    n.const_subtree = (op == Op::number);
    return push(e, n);
  }

  std::int32_t unary(Expr& e, Op op, std::int32_t a, std::size_t off) {
    Expr::Node n;
    n.op = op;
    n.arg0 = a;
    n.offset = static_cast<std::uint32_t>(off);
    n.const_subtree = e.nodes_[a].const_subtree;
    return push(e, n);
  }

  std::int32_t binary(Expr& e, Op op, std::int32_t a, std::int32_t b, std::size_t off) {
    Expr::Node n;
    n.op = op;
    n.arg0 = a;
    n.arg1 = b;
    n.offset = static_cast<std::uint32_t>(off);
    n.const_subtree = e.nodes_[a].const_subtree && e.nodes_[b].const_subtree;
    return push(e, n);
  }

  struct DepthGuard {
    explicit DepthGuard(int& d) : depth(d) {
      if (++depth > 256) throw ParseError("expression nests too deeply", 1);
    }
    ~DepthGuard() { --depth; }
    int& depth;
  };

  std::int32_t parse_expr(Expr& e) {
    DepthGuard guard(depth_);
    std::int32_t lhs = parse_term(e);
    while (lex_.peek().kind == Token::plus || lex_.peek().kind == Token::minus) {
      Token op = lex_.take();
      std::int32_t rhs = parse_term(e);
      lhs = binary(e, op.kind == Token::plus ? Op::add : Op::sub, lhs, rhs, op.offset);
    }
    return lhs;
  }

  std::int32_t parse_term(Expr& e) {
    std::int32_t lhs = parse_factor(e);
    while (lex_.peek().kind == Token::star || lex_.peek().kind == Token::slash) {
      Token op = lex_.take();
      std::int32_t rhs = parse_factor(e);
      lhs = binary(e, op.kind == Token::star ? Op::mul : Op::div, lhs, rhs, op.offset);
    }
    return lhs;
  }

  std::int32_t parse_factor(Expr& e) {
    bool negated = false;
    std::size_t neg_off = lex_.peek().offset;
    if (lex_.peek().kind == Token::minus) {
      lex_.take();
      negated = true;
    }
    std::int32_t base = parse_atom(e);
    if (lex_.peek().kind == Token::caret) {
      Token op = lex_.take();
      std::int32_t exponent = parse_atom(e);
      base = binary(e, Op::pow, base, exponent, op.offset);
    }
    if (negated) base = unary(e, Op::neg, base, neg_off);
    return base;
  }

  std::int32_t parse_atom(Expr& e) {
    Token t = lex_.peek();
    switch (t.kind) {
      case Token::number:
        lex_.take();
        return leaf(e, Op::number, t.offset, t.num);
      case Token::lparen: {
        lex_.take();
        std::int32_t inner = parse_expr(e);
        expect(Token::rparen, "expected ')'");
        return inner;
      }
      case Token::ident:
        lex_.take();
        if (lex_.peek().kind == Token::lparen) return parse_call(e, t);
        if (t.text == "t") return leaf(e, Op::var_t, t.offset);
        if (t.text == "x") return leaf(e, Op::var_x, t.offset);
        if (t.text == "u") return leaf(e, Op::var_u, t.offset);
        if (t.text == "pi") return leaf(e, Op::number, t.offset, std::numbers::pi_v<double>);
        if (t.text == "e") return leaf(e, Op::number, t.offset, std::numbers::e_v<double>);
        throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
      default:
        throw ParseError("expected a number, variable or '('", t.offset);
    }
  }

  std::int32_t parse_call(Expr& e, const Token& name) {
    const Builtin* builtin = nullptr;
    for (const auto& b : kBuiltins)
      if (b.name == name.text) builtin = &b;
    if (!builtin)
      throw ParseError("unknown function '" + std::string(name.text) + "'", name.offset);
    expect(Token::lparen, "expected '('");
    std::int32_t args[3] = {-1, -1, -1};
    int count = 0;
    args[count++] = parse_expr(e);
    while (lex_.peek().kind == Token::comma) {
      lex_.take();
      if (count == 3) throw ParseError("too many arguments", lex_.peek().offset);
      args[count++] = parse_expr(e);
    }
    expect(Token::rparen, "expected ')'");
    if (count != builtin->arity)
      throw ParseError(std::string(name.text) + " expects " + std::to_string(builtin->arity) +
                           " argument(s), got " + std::to_string(count),
                       name.offset);
    Expr::Node n;
    n.op = builtin->op;
    n.arg0 = args[0];
    n.arg1 = args[1];
    n.arg2 = args[2];
    n.offset = static_cast<std::uint32_t>(name.offset);
    n.const_subtree = true;
    for (int i = 0; i < count; ++i)
      n.const_subtree = n.const_subtree && e.nodes_[args[i]].const_subtree;
    return push(e, n);
  }

  void expect(Token::Kind k, const char* msg) {
    if (lex_.peek().kind != k) throw ParseError(msg, lex_.peek().offset);
    lex_.take();
  }

  Lexer lex_;
  int depth_ = 0;
};

Expr Expr::parse(std::string_view text) {
  Parser p(text);
  return p.run(text);
}

bool Expr::depends_on(Var v) const noexcept {
  Op target = v == Var::t ? Op::var_t : v == Var::x ? Op::var_x : Op::var_u;
  for (const auto& n : nodes_)
    if (n.op == target) return true;
  return false;
}

bool Expr::piecewise() const noexcept {
  for (const auto& n : nodes_)
    if (n.op == Op::branch_if) return true;
  return false;
}

namespace {

[[noreturn]] void domain_error(const char* what, const Expr::Node& n) {
  throw EvalError(what, n.offset);
}

double value_pow(double base, double expv, bool const_exp, const Expr::Node& n) {
  if (const_exp) {
    double r = std::nearbyint(expv);
    if (r == expv && std::fabs(r) < 9.0e15) {
      long long k = static_cast<long long>(r);
      if (base == 0.0 && k < 0) domain_error("zero raised to a negative power", n);
      return ipow(base, k);
    }
    if (base < 0.0) domain_error("negative base with non-integer exponent", n);
    if (base == 0.0) {
      if (expv <= 0.0) domain_error("zero raised to a non-positive power", n);
      return 0.0;
    }
    return std::pow(base, expv);
  }
  if (base <= 0.0) domain_error("base must be positive when the exponent varies", n);
  return std::exp(expv * std::log(base));
}

} // namespace

double Expr::value(double t, double x, double u) const {
  if (nodes_.empty()) return 0.0;
  thread_local std::vector<double> slot;
  slot.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    auto a = [&]() { return slot[n.arg0]; };
    auto b = [&]() { return slot[n.arg1]; };
    double v = 0.0;
    switch (n.op) {
      case Op::number: v = n.number; break;
      case Op::var_t: v = t; break;
      case Op::var_x: v = x; break;
      case Op::var_u: v = u; break;
      case Op::add: v = a() + b(); break;
      case Op::sub: v = a() - b(); break;
      case Op::mul: v = a() * b(); break;
      case Op::div:
        if (b() == 0.0) domain_error("division by zero", n);
        v = a() / b();
        break;
      case Op::neg: v = -a(); break;
      case Op::pow: v = value_pow(a(), b(), nodes_[n.arg1].const_subtree, n); break;
      case Op::sin: v = std::sin(a()); break;
      case Op::cos: v = std::cos(a()); break;
      case Op::exp: v = std::exp(a()); break;
      case Op::log:
        if (a() <= 0.0) domain_error("log of a non-positive value", n);
        v = std::log(a());
        break;
      case Op::abs: v = std::fabs(a()); break;
      case Op::sqrt:
        if (a() < 0.0) domain_error("sqrt of a negative value", n);
        v = std::sqrt(a());
        break;
      case Op::min: v = a() <= b() ? a() : b(); break;
      case Op::max: v = a() >= b() ? a() : b(); break;
      case Op::branch_if: v = a() > 0.0 ? b() : slot[n.arg2]; break;
    }
    slot[i] = v;
  }
  return slot.back();
}

Jet2 Expr::jet(double t, double x, double u) const {
  if (nodes_.empty()) return {};
  thread_local std::vector<Jet2> slot;
  slot.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const Jet2* a = n.arg0 >= 0 ? &slot[n.arg0] : nullptr;
    const Jet2* b = n.arg1 >= 0 ? &slot[n.arg1] : nullptr;
    Jet2 r;
    switch (n.op) {
      case Op::number: r.value = n.number; break;
      case Op::var_t: r.value = t; break;
      case Op::var_x:
        r.value = x;
        r.d_x = 1.0;
        break;
      case Op::var_u:
        r.value = u;
        r.d_u = 1.0;
        break;
      case Op::add:
        r = {a->value + b->value, a->d_u + b->d_u, a->d_x + b->d_x,
             a->d_xu + b->d_xu, a->d_xx + b->d_xx};
        break;
      case Op::sub:
        r = {a->value - b->value, a->d_u - b->d_u, a->d_x - b->d_x,
             a->d_xu - b->d_xu, a->d_xx - b->d_xx};
        break;
      case Op::neg:
        r = {-a->value, -a->d_u, -a->d_x, -a->d_xu, -a->d_xx};
        break;
      case Op::mul:
        r.value = a->value * b->value;
        r.d_u = a->d_u * b->value + a->value * b->d_u;
        r.d_x = a->d_x * b->value + a->value * b->d_x;
        r.d_xu = a->d_xu * b->value + a->d_x * b->d_u + a->d_u * b->d_x + a->value * b->d_xu;
        r.d_xx = a->d_xx * b->value + 2.0 * a->d_x * b->d_x + a->value * b->d_xx;
        break;
      case Op::div: {
        if (b->value == 0.0) domain_error("division by zero", n);
        r.value = a->value / b->value;
        r.d_x = (a->d_x - r.value * b->d_x) / b->value;
        r.d_u = (a->d_u - r.value * b->d_u) / b->value;
        r.d_xx = (a->d_xx - 2.0 * r.d_x * b->d_x - r.value * b->d_xx) / b->value;
        r.d_xu = (a->d_xu - r.d_x * b->d_u - r.d_u * b->d_x - r.value * b->d_xu) / b->value;
        break;
      }
      case Op::pow: r = jet_pow(*a, *b, n); break;
      case Op::sin: r = chain(*a, std::sin(a->value), std::cos(a->value), -std::sin(a->value)); break;
      case Op::cos: r = chain(*a, std::cos(a->value), -std::sin(a->value), -std::cos(a->value)); break;
      case Op::exp: {
        double ev = std::exp(a->value);
        r = chain(*a, ev, ev, ev);
        break;
      }
      case Op::log:
        if (a->value <= 0.0) domain_error("log of a non-positive value", n);
        r = chain(*a, std::log(a->value), 1.0 / a->value, -1.0 / (a->value * a->value));
        break;
      case Op::abs: {
        double s = a->value >= 0.0 ? 1.0 : -1.0;
        r = {std::fabs(a->value), s * a->d_u, s * a->d_x, s * a->d_xu, s * a->d_xx};
        break;
      }
      case Op::sqrt:
        if (a->value < 0.0) domain_error("sqrt of a negative value", n);
        if (a->value == 0.0) {
          if (!all_zero_derivs(*a)) domain_error("sqrt is not differentiable at zero", n);
          r = {};
        } else {
          double s = std::sqrt(a->value);
          r = chain(*a, s, 0.5 / s, -0.25 / (s * a->value));
        }
        break;
      case Op::min: r = (a->value <= b->value) ? *a : *b; break;
      case Op::max: r = (a->value >= b->value) ? *a : *b; break;
      case Op::branch_if: r = (a->value > 0.0) ? *b : slot[n.arg2]; break;
    }
    slot[i] = r;
  }
  return slot.back();
}

Jet2 Expr::jet_pow(const Jet2& a, const Jet2& b, const Node& n) const {
  if (nodes_[n.arg1].const_subtree) {
    double p = b.value;
    double rounded = std::nearbyint(p);
    if (rounded == p && std::fabs(rounded) < 9.0e15) {
      long long k = static_cast<long long>(rounded);
      if (k == 0) return {1.0, 0.0, 0.0, 0.0, 0.0};
      if (a.value == 0.0 && k < 0) domain_error("zero raised to a negative power", n);
      double v = ipow(a.value, k);
      double h1 = static_cast<double>(k) * ipow(a.value, k - 1);
      double h2 = (k == 1) ? 0.0
                           : static_cast<double>(k) * static_cast<double>(k - 1) * ipow(a.value, k - 2);
      if (a.value == 0.0) { // ipow would be fine, but k-1 or k-2 may be < 1
        h1 = (k == 1) ? 1.0 : 0.0;
        h2 = (k == 2) ? 2.0 : 0.0;
      }
      return chain(a, v, h1, h2);
    }
    if (a.value < 0.0) domain_error("negative base with non-integer exponent", n);
    if (a.value == 0.0) {
      if (p <= 0.0) domain_error("zero raised to a non-positive power", n);
      if (all_zero_derivs(a) || p > 2.0) return chain(a, 0.0, 0.0, 0.0);
      domain_error("power is not differentiable at zero base", n);
    }
    double v = std::pow(a.value, p);
    return chain(a, v, p * std::pow(a.value, p - 1.0), p * (p - 1.0) * std::pow(a.value, p - 2.0));
  }
  if (a.value <= 0.0) domain_error("base must be positive when the exponent varies", n);
  // a^b = exp(b*log(a)) with full second-order propagation
  Jet2 la = chain(a, std::log(a.value), 1.0 / a.value, -1.0 / (a.value * a.value));
  Jet2 m;
  m.value = b.value * la.value;
  m.d_u = b.d_u * la.value + b.value * la.d_u;
  m.d_x = b.d_x * la.value + b.value * la.d_x;
  m.d_xu = b.d_xu * la.value + b.d_x * la.d_u + b.d_u * la.d_x + b.value * la.d_xu;
  m.d_xx = b.d_xx * la.value + 2.0 * b.d_x * la.d_x + b.value * la.d_xx;
  double ev = std::exp(m.value);
  return chain(m, ev, ev, ev);
}

namespace {

void print_node(const Expr& e, std::int32_t idx, std::string& out) {
  const auto& nodes = e.nodes();
  const Expr::Node& n = nodes[idx];
  auto num = [&](double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, p);
  };
  auto bin = [&](const char* op) {
    out += '(';
    print_node(e, n.arg0, out);
    out += op;
    print_node(e, n.arg1, out);
    out += ')';
  };
  auto call = [&](const char* name, int arity) {
    out += name;
    out += '(';
    print_node(e, n.arg0, out);
    if (arity > 1) {
      out += ',';
      print_node(e, n.arg1, out);
    }
    if (arity > 2) {
      out += ',';
      print_node(e, n.arg2, out);
    }
    out += ')';
  };
  using Op = Expr::Op;
  switch (n.op) {
    case Op::number:
      if (n.number < 0.0) {
        out += '(';
        num(n.number);
        out += ')';
      } else {
        num(n.number);
      }
      break;
    case Op::var_t: out += 't'; break;
    case Op::var_x: out += 'x'; break;
    case Op::var_u: out += 'u'; break;
    case Op::add: bin("+"); break;
    case Op::sub: bin("-"); break;
    case Op::mul: bin("*"); break;
    case Op::div: bin("/"); break;
    case Op::pow: bin("^"); break;
    case Op::neg:
      out += "(-";
      print_node(e, n.arg0, out);
      out += ')';
      break;
    case Op::sin: call("sin", 1); break;
    case Op::cos: call("cos", 1); break;
    case Op::exp: call("exp", 1); break;
    case Op::log: call("log", 1); break;
    case Op::abs: call("abs", 1); break;
    case Op::sqrt: call("sqrt", 1); break;
    case Op::min: call("min", 2); break;
    case Op::max: call("max", 2); break;
    case Op::branch_if: call("if", 3); break;
  }
}

} // namespace

std::string Expr::str() const {
  if (nodes_.empty()) return "0";
  std::string out;
  out.reserve(source_.size() + 16);
  print_node(*this, static_cast<std::int32_t>(nodes_.size() - 1), out);
  return out;
}

double sup_abs_on_box(const Expr& e, JetComponent sel, const Box3& box, int samples_per_axis) {
  auto axis_count = [&](double lo, double hi) {
    if (lo == hi) return 1;
    if (samples_per_axis < 2)
      throw InvariantError("sup_abs_on_box needs at least 2 samples per non-degenerate axis");
    return samples_per_axis;
  };
  if (box.t1 < box.t0 || box.x1 < box.x0 || box.u1 < box.u0)
    throw InvariantError("sup_abs_on_box: empty box");
  int nt = axis_count(box.t0, box.t1);
  int nx = axis_count(box.x0, box.x1);
  int nu = axis_count(box.u0, box.u1);
  auto coord = [](double lo, double hi, int i, int count) {
    if (count == 1) return lo;
    if (i == count - 1) return hi; // endpoints exactly, no rounding drift
    return lo + (hi - lo) * (static_cast<double>(i) / (count - 1));
  };
  const bool value_only = (sel == JetComponent::value);
  double best = 0.0;
  for (int it = 0; it < nt; ++it) {
    double t = coord(box.t0, box.t1, it, nt);
    for (int ix = 0; ix < nx; ++ix) {
      double x = coord(box.x0, box.x1, ix, nx);
      for (int iu = 0; iu < nu; ++iu) {
        double u = coord(box.u0, box.u1, iu, nu);
        double v;
        if (value_only) {
          v = e.value(t, x, u);
        } else {
          Jet2 j = e.jet(t, x, u);
          switch (sel) {
            case JetComponent::d_u: v = j.d_u; break;
            case JetComponent::d_x: v = j.d_x; break;
            case JetComponent::d_xu: v = j.d_xu; break;
            case JetComponent::d_xx: v = j.d_xx; break;
            default: v = j.value; break;
          }
        }
        v = std::fabs(v);
        if (v > best) best = v;
      }
    }
  }
  return best;
}

} // namespace balans
