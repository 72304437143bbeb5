#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <doctest.h>

#include "balans/expr.hpp"

#include "expr_corpus.hpp"

using namespace balans;

namespace {

using balans::testing::CorpusEntry;
using balans::testing::expression_corpus;
using balans::testing::fd_oracle;
using balans::testing::FdJet;

const std::vector<CorpusEntry>& corpus() { return expression_corpus(); }

// ---- nested-dual oracle ------------------------------------------------------
// First-order duals nested twice give the mixed second derivative d_xu by a
// path independent of the Jet2 evaluator. The outer/inner seeding order is
// swappable, which also checks symmetry of the mixed partial.

struct D1 {
  double v = 0.0;
  double d = 0.0;
};
struct D2 {
  D1 v, d; // v: inner dual; d: outer derivative as an inner dual
};

D2 c2(double v) { return {{v, 0}, {0, 0}}; }
D2 add(D2 a, D2 b) { return {{a.v.v + b.v.v, a.v.d + b.v.d}, {a.d.v + b.d.v, a.d.d + b.d.d}}; }
D2 sub(D2 a, D2 b) { return {{a.v.v - b.v.v, a.v.d - b.v.d}, {a.d.v - b.d.v, a.d.d - b.d.d}}; }
D2 neg(D2 a) { return {{-a.v.v, -a.v.d}, {-a.d.v, -a.d.d}}; }
D2 mul(D2 a, D2 b) {
  return {{a.v.v * b.v.v, a.v.d * b.v.v + a.v.v * b.v.d},
          {a.d.v * b.v.v + a.v.v * b.d.v,
           a.d.d * b.v.v + a.d.v * b.v.d + a.v.d * b.d.v + a.v.v * b.d.d}};
}
D2 divide(D2 a, D2 b) {
  // a/b via a * b^-1, with inv'(w) = -1/w^2 and inv''(w) = 2/w^3
  double w = b.v.v;
  D2 inv{{1.0 / w, -b.v.d / (w * w)},
         {-b.d.v / (w * w),
          -b.d.d / (w * w) + 2.0 * b.v.d * b.d.v / (w * w * w)}};
  return mul(a, inv);
}
D2 lift(D2 a, double f, double f1, double f2) {
  return {{f, f1 * a.v.d},
          {f1 * a.d.v, f2 * a.v.d * a.d.v + f1 * a.d.d}};
}

D2 eval_d2(const Expr& e, std::size_t idx, double t, const D2& x, const D2& u);

D2 eval_node(const Expr& e, const Expr::Node& n, double t, const D2& x, const D2& u) {
  using Op = Expr::Op;
  auto A = [&]() { return eval_d2(e, n.arg0, t, x, u); };
  auto B = [&]() { return eval_d2(e, n.arg1, t, x, u); };
  switch (n.op) {
    case Op::number: return c2(n.number);
    case Op::var_t: return c2(t);
    case Op::var_x: return x;
    case Op::var_u: return u;
    case Op::add: return add(A(), B());
    case Op::sub: return sub(A(), B());
    case Op::neg: return neg(A());
    case Op::mul: return mul(A(), B());
    case Op::div: return divide(A(), B());
    case Op::sin: {
      D2 a = A();
      return lift(a, std::sin(a.v.v), std::cos(a.v.v), -std::sin(a.v.v));
    }
    case Op::cos: {
      D2 a = A();
      return lift(a, std::cos(a.v.v), -std::sin(a.v.v), -std::cos(a.v.v));
    }
    case Op::exp: {
      D2 a = A();
      double v = std::exp(a.v.v);
      return lift(a, v, v, v);
    }
    case Op::log: {
      D2 a = A();
      return lift(a, std::log(a.v.v), 1.0 / a.v.v, -1.0 / (a.v.v * a.v.v));
    }
    case Op::sqrt: {
      D2 a = A();
      double s = std::sqrt(a.v.v);
      return lift(a, s, 0.5 / s, -0.25 / (s * a.v.v));
    }
    case Op::abs: {
      D2 a = A();
      double s = a.v.v >= 0 ? 1.0 : -1.0;
      return lift(a, std::fabs(a.v.v), s, 0.0);
    }
    case Op::min: {
      D2 a = A(), b = B();
      return a.v.v <= b.v.v ? a : b;
    }
    case Op::max: {
      D2 a = A(), b = B();
      return a.v.v >= b.v.v ? a : b;
    }
    case Op::branch_if: {
      D2 c = A();
      return c.v.v > 0 ? B() : eval_d2(e, n.arg2, t, x, u);
    }
    case Op::pow: {
      D2 a = A(), b = B();
      double p = b.v.v;
      bool const_exp = b.v.d == 0 && b.d.v == 0 && b.d.d == 0;
      if (const_exp && p == std::nearbyint(p)) {
        long long k = static_cast<long long>(p);
        D2 acc = c2(1.0);
        long long reps = k >= 0 ? k : -k;
        for (long long i = 0; i < reps; ++i) acc = mul(acc, a);
        return k >= 0 ? acc : divide(c2(1.0), acc);
      }
      // exp(b*log a)
      D2 la = lift(a, std::log(a.v.v), 1.0 / a.v.v, -1.0 / (a.v.v * a.v.v));
      D2 m = mul(b, la);
      double v = std::exp(m.v.v);
      return lift(m, v, v, v);
    }
  }
  return c2(0.0);
}

D2 eval_d2(const Expr& e, std::size_t idx, double t, const D2& x, const D2& u) {
  return eval_node(e, e.nodes()[idx], t, x, u);
}

// order: true = outer seed on x, inner on u; false = swapped
double dual_dxu(const Expr& e, double t, double x, double u, bool x_outer) {
  D2 xv, uv;
  if (x_outer) {
    xv = {{x, 0}, {1, 0}};
    uv = {{u, 1}, {0, 0}};
  } else {
    xv = {{x, 1}, {0, 0}};
    uv = {{u, 0}, {1, 0}};
  }
  return eval_d2(e, e.nodes().size() - 1, t, xv, uv).d.d;
}

double sample(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return lo == hi ? lo : d(rng);
}

} // namespace

TEST_CASE("parse and evaluate basic expressions") {
  Expr lwr = Expr::parse("u*(1-u)");
  CHECK(lwr.value(0, 0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  Expr mx = Expr::parse("-x");
  CHECK(mx.value(0, 2, 0) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("syntax error carries the byte offset") {
  CHECK_THROWS_WITH_AS(Expr::parse("u*(1-u"), doctest::Contains("offset 7"), ParseError);
  try {
    Expr::parse("u*(1-u");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 7);
  }
}

TEST_CASE("identifier and arity errors") {
  CHECK_THROWS_AS(Expr::parse("y+1"), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(x)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin(x,u)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("if(x,1)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("min(1,2,3)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("2^3^2"), ParseError); // one '^' per factor
  CHECK_THROWS_AS(Expr::parse(""), ParseError);
  CHECK_THROWS_AS(Expr::parse(std::string(1000, '(') + "u" + std::string(1000, ')')),
                  ParseError); // recursion depth guard
}

TEST_CASE("domain errors identify the subexpression") {
  Expr e = Expr::parse("1/x");
  CHECK_THROWS_AS(e.value(0, 0, 0), EvalError);
  Expr lg = Expr::parse("log(x)");
  CHECK_THROWS_AS(lg.value(0, -1, 0), EvalError);
  try {
    lg.value(0, -1, 0);
  } catch (const EvalError& err) {
    CHECK(err.offset() == 1);
  }
  CHECK_THROWS_AS(Expr::parse("sqrt(x)").value(0, -2, 0), EvalError);
  CHECK_THROWS_AS(Expr::parse("x^0.5").value(0, -1, 0), EvalError);
  CHECK_THROWS_AS(Expr::parse("x^u").value(0, -1, 2), EvalError);
}

TEST_CASE("jet examples") {
  Jet2 j = Expr::parse("u*(1-u)").jet(0, 0, 0.3);
  CHECK(j.value == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(j.d_u == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(j.d_x == 0.0);
  CHECK(j.d_xu == 0.0);
  CHECK(j.d_xx == 0.0);

  Jet2 m = Expr::parse("-x").jet(0.3, 7.0, -2.0);
  CHECK(m.d_x == -1.0);
  CHECK(m.d_u == 0.0);
  CHECK(m.d_xu == 0.0);
  CHECK(m.d_xx == 0.0);

  Jet2 b = Expr::parse("x*u").jet(0, 2, 3);
  CHECK(b.value == 6.0);
  CHECK(b.d_u == 2.0);
  CHECK(b.d_x == 3.0);
  CHECK(b.d_xu == 1.0);
  CHECK(b.d_xx == 0.0);
}

TEST_CASE("jets match the finite-difference oracle on the corpus") {
  std::mt19937_64 rng(0xBA1A25u);
  for (const auto& entry : corpus()) {
    Expr e = Expr::parse(entry.text);
    for (int i = 0; i < 100; ++i) {
      double t = sample(rng, entry.box.t0, entry.box.t1);
      double x = sample(rng, entry.box.x0, entry.box.x1);
      double u = sample(rng, entry.box.u0, entry.box.u1);
      Jet2 j = e.jet(t, x, u);
      FdJet fd = fd_oracle(e, t, x, u);
      auto close = [&](double got, double want) {
        CHECK(std::fabs(got - want) <= 1e-6 * std::max(1.0, std::fabs(want)));
      };
      close(j.d_u, fd.d_u);
      close(j.d_x, fd.d_x);
      close(j.d_xu, fd.d_xu);
      close(j.d_xx, fd.d_xx);
    }
  }
}

TEST_CASE("mixed partial agrees with nested duals in both orders") {
  std::mt19937_64 rng(0xD0D0u);
  for (const auto& entry : corpus()) {
    Expr e = Expr::parse(entry.text);
    for (int i = 0; i < 25; ++i) {
      double t = sample(rng, entry.box.t0, entry.box.t1);
      double x = sample(rng, entry.box.x0, entry.box.x1);
      double u = sample(rng, entry.box.u0, entry.box.u1);
      double jet_dxu = e.jet(t, x, u).d_xu;
      double xu = dual_dxu(e, t, x, u, true);
      double ux = dual_dxu(e, t, x, u, false);
      CHECK(std::fabs(jet_dxu - xu) <= 1e-12 * std::max(1.0, std::fabs(xu)));
      CHECK(std::fabs(xu - ux) <= 1e-12 * std::max(1.0, std::fabs(xu)));
    }
  }
}

TEST_CASE("print/parse round trip evaluates identically") {
  std::mt19937_64 rng(0x5EED5u);
  for (const auto& entry : corpus()) {
    Expr e = Expr::parse(entry.text);
    Expr r = Expr::parse(e.str());
    for (int i = 0; i < 100; ++i) {
      double t = sample(rng, entry.box.t0, entry.box.t1);
      double x = sample(rng, entry.box.x0, entry.box.x1);
      double u = sample(rng, entry.box.u0, entry.box.u1);
      CHECK(e.value(t, x, u) == r.value(t, x, u));
    }
  }
}

TEST_CASE("sup_abs_on_box examples") {
  Expr lwr = Expr::parse("u*(1-u)");
  double s = sup_abs_on_box(lwr, JetComponent::d_u, {0, 0, 0, 0, 0, 1}, 101);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14)); // |1-2u| peaks at the corners

  Expr mx = Expr::parse("-x");
  CHECK(sup_abs_on_box(mx, JetComponent::d_x, {0, 1, -3, 5, -1, 1}, 11) == 1.0);

  Expr su = Expr::parse("sin(x)*u");
  double got = sup_abs_on_box(su, JetComponent::d_xu,
                              {0, 0, 0, 3.14159265358979323846, -1, 1}, 201);
  // oracle: dense scan of |cos x| over the same box
  double dense = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double x = 3.14159265358979323846 * i / 99999.0;
    dense = std::max(dense, std::fabs(std::cos(x)));
  }
  CHECK(std::fabs(got - dense) <= 1e-3);
}

TEST_CASE("sup_abs_on_box is monotone under nested refinement") {
  // 2S-1 samples keep every point of the S-sample grid
  Expr e = Expr::parse("sin(3*x)*u*(1-u)");
  Box3 box{0, 0, 0, 2, -1, 1};
  double prev = sup_abs_on_box(e, JetComponent::d_xu, box, 9);
  for (int s = 17; s <= 129; s = 2 * s - 1) {
    double cur = sup_abs_on_box(e, JetComponent::d_xu, box, s);
    CHECK(cur >= prev * (1.0 - 1e-12));
    prev = cur;
  }
}

TEST_CASE("sup_abs_on_box validates its inputs") {
  Expr e = Expr::parse("u");
  CHECK_THROWS_AS(sup_abs_on_box(e, JetComponent::value, {0, 1, 0, 1, 0, 1}, 1),
                  balans::InvariantError);
  CHECK_THROWS_AS(sup_abs_on_box(e, JetComponent::value, {0, -1, 0, 1, 0, 1}, 5),
                  balans::InvariantError);
  // degenerate axes take a single sample and are fine
  CHECK(sup_abs_on_box(e, JetComponent::value, {0, 0, 0, 0, 2, 2}, 5) == 2.0);
}

TEST_CASE("piecewise data expressions evaluate on both branches") {
  Expr step = Expr::parse("if(0.5-x, 1, 0)");
  CHECK(step.value(0, 0.25, 0) == 1.0);
  CHECK(step.value(0, 0.75, 0) == 0.0);
  CHECK(step.value(0, 0.5, 0) == 0.0); // condition 0 selects the else branch
  CHECK(step.piecewise());
  CHECK_FALSE(Expr::parse("u*(1-u)").piecewise());
}

TEST_CASE("min/max builtins are genuine minimum and maximum") {
  CHECK(Expr::parse("min(2,3)").value(0, 0, 0) == 2.0);
  CHECK(Expr::parse("max(2,3)").value(0, 0, 0) == 3.0);
  CHECK(Expr::parse("min(t,x)").value(1, -4, 0) == -4.0);
}

TEST_CASE("powers: integer exponents are exact, variable exponents compose") {
  Jet2 cube = Expr::parse("u^3").jet(0, 0, 2.0);
  CHECK(cube.value == 8.0);
  CHECK(cube.d_u == 12.0);
  Jet2 pw = Expr::parse("x^u").jet(0, 2.0, 3.0);
  CHECK(pw.value == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(pw.d_x == doctest::Approx(12.0).epsilon(1e-12));           // u*x^(u-1)
  CHECK(pw.d_u == doctest::Approx(8.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(Expr::parse("u^0").jet(0, 0, 0).value == 1.0);
  CHECK(Expr::parse("x^(-2)").value(0, 2, 0) == 0.25);
}
