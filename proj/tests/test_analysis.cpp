#include <cmath>
#include <random>

#include <doctest.h>

#include "balans/analysis.hpp"

using namespace balans;

namespace {

DiscreteSolution solve_catalog(const std::string& name, int cells, bool keep_half = false) {
  Ibvp p = catalog_problem(name);
  Grid g = build_grid(p, cells, std::nullopt, 1.0);
  return run(p, g, discretize(p, g, 3), keep_half);
}

} // namespace

TEST_CASE("semi-entropy identities pin the max/min convention") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    double s = dist(rng), k = dist(rng);
    CHECK(pos_part(s - k) == std::max(s, k) - k);
    CHECK(neg_part(s - k) == k - std::min(s, k));
  }
  CHECK(sgn_plus(2.0) == 1.0);
  CHECK(sgn_plus(0.0) == 0.0);
  CHECK(sgn_minus(0.0) == 0.0);
  CHECK(sgn_minus(-2.0) == -1.0);
}

TEST_CASE("tv_row arithmetic example") {
  std::vector<double> row{1.0, 2.0, 3.0};
  CHECK(tv_row(row, 0.0, 0.0) == doctest::Approx(6.0).epsilon(1e-15));
  std::vector<double> flat{0.7, 0.7};
  CHECK(tv_row(flat, 0.7, 0.7) == 0.0);
}

TEST_CASE("linf and tv snapshots on catalog problems") {
  DiscreteSolution adv = solve_catalog("advection-x", 100);
  int n09 = static_cast<int>(std::lround(0.9 / adv.grid.dt));
  CHECK(linf_snapshot(adv, n09) ==
        doctest::Approx(adv.grid.time(n09)).epsilon(1e-12));

  DiscreteSolution lwr = solve_catalog("lwr-ramp", 100);
  CHECK(linf_snapshot(lwr, lwr.steps) <= 0.4 + 1e-12);

  DiscreteSolution br = solve_catalog("burgers-riemann", 10);
  CHECK(tv_snapshot(br, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("envelope_U: pure u flux without source is the maximum principle") {
  Ibvp p = catalog_problem("lwr-ramp");
  UEnvelope e = envelope_U(p, 0.5, 13);
  CHECK(e.C1 == 0.0);
  CHECK(e.C2 == 0.0);
  CHECK(e.U == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("envelope_U for flux -x with zero boundary data gives U(t) = t") {
  Ibvp p = make_ibvp("-x", "0", "0", "0", "0", 0.0, 1.0, 1.0);
  UEnvelope e = envelope_U(p, 0.7, 13);
  CHECK(e.C1 == 1.0);
  CHECK(e.C2 == 0.0);
  CHECK(e.U == doctest::Approx(0.7).epsilon(1e-14));
  // the catalog variant carries u_a = u_b = t, so its data sup adds another t
  UEnvelope cat = envelope_U(catalog_problem("advection-x"), 0.7, 13);
  CHECK(cat.U == doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("envelope_U: linear damping source grows the envelope like e^t") {
  Ibvp p = make_ibvp("u^2/2", "-u", "1", "1", "1", 0.0, 1.0, 1.0);
  UEnvelope e = envelope_U(p, 1.0, 13);
  CHECK(e.C1 == 0.0);
  CHECK(e.C2 == 1.0);
  CHECK(e.U == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("envelope_Cx: pure u flux reduces to the data jump sums") {
  DiscreteSolution lwr = solve_catalog("lwr-ramp", 50);
  Ibvp p = catalog_problem("lwr-ramp");
  int n = lwr.steps;
  CxEnvelope cx = envelope_Cx(p, lwr, n, 13);
  CHECK(cx.K2 == 0.0);
  double jumps = tv_snapshot(lwr, 0);
  for (int m = 1; m <= n; ++m) {
    jumps += std::fabs(lwr.ua[m] - lwr.ua[m - 1]);
    jumps += std::fabs(lwr.ub[m] - lwr.ub[m - 1]);
  }
  CHECK(cx.Cx == doctest::Approx(jumps).epsilon(1e-12));
}

TEST_CASE("envelope_Cx on advection-x matches the closed form") {
  DiscreteSolution adv = solve_catalog("advection-x", 50);
  Ibvp p = catalog_problem("advection-x");
  int n = adv.steps / 2;
  double tn = adv.grid.time(n);
  CxEnvelope cx = envelope_Cx(p, adv, n, 13);
  // K2 = 2*C1 = 2; boundary sequences are t^m so each jump sum telescopes to t^n
  CHECK(cx.K2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cx.Cx == doctest::Approx(0.0 + tn + tn + 2.0 * tn).epsilon(1e-10));
}

TEST_CASE("envelope_Ct dominates the observed time-Lipschitz quotient") {
  DiscreteSolution adv = solve_catalog("advection-x", 50);
  Ibvp p = catalog_problem("advection-x");
  for (int n : {1, adv.steps / 2, adv.steps}) {
    double q = time_lipschitz_quotient(adv, n);
    CHECK(q == doctest::Approx(1.0).epsilon(1e-12)); // every cell moves by dt
    CHECK(q <= envelope_Ct(p, adv, n, 13) * (1 + 1e-9));
  }
}

TEST_CASE("spacetime_bv on advection-x is the pure time part") {
  DiscreteSolution adv = solve_catalog("advection-x", 50);
  Ibvp p = catalog_problem("advection-x");
  int n = adv.steps;
  double tn = adv.grid.time(n);
  double observed = spacetime_bv(adv, n);
  // rows are flat (ghosts included) so only time jumps contribute:
  // N cells plus both boundary sequences move by dt each step
  double expected = tn * (adv.grid.b - adv.grid.a) * (50.0 + 2.0) / 50.0;
  CHECK(observed == doctest::Approx(expected).epsilon(1e-10));
  CHECK(observed <= envelope_Cxt(p, adv, n, 13) * (1 + 1e-9));
}

TEST_CASE("envelopes are nondecreasing in time") {
  DiscreteSolution br = solve_catalog("burgers-riemann", 50);
  Ibvp p = catalog_problem("burgers-riemann");
  double prev_U = 0.0, prev_Cx = 0.0, prev_Cxt = 0.0;
  for (int n = br.steps / 8; n <= br.steps; n += br.steps / 8) {
    Envelopes env = envelopes_at(p, br, n, 13);
    CHECK(env.U >= prev_U - 1e-12);
    CHECK(env.Cx >= prev_Cx - 1e-12);
    CHECK(env.Cxt >= prev_Cxt - 1e-12);
    prev_U = env.U;
    prev_Cx = env.Cx;
    prev_Cxt = env.Cxt;
  }
}

TEST_CASE("audit_bounds passes on catalog problems") {
  for (const char* name : {"advection-x", "lwr-ramp", "burgers-riemann"}) {
    Ibvp p = catalog_problem(name);
    Grid g = build_grid(p, 50, std::nullopt, 1.0);
    DiscreteSolution sol = run(p, g, discretize(p, g, 3), false);
    BoundsReport rep = audit_bounds(p, sol, {0.5 * g.covered_horizon(), g.covered_horizon()},
                                    13, 1e-9);
    INFO(name, ": ", rep.violations.empty() ? "" : rep.violations.front().kind);
    CHECK(rep.violations.empty());
    CHECK(rep.alpha_ok);
    CHECK(!rep.checkpoints.empty());
  }
}

TEST_CASE("entropy residuals: saturated and telescoping k levels vanish") {
  Ibvp p = catalog_problem("burgers-riemann");
  Grid g = build_grid(p, 20, std::nullopt, 1.0);
  DiscreteSolution sol = run(p, g, discretize(p, g, 3), true);
  // k above everything: both families identically zero
  EntropyReport above = entropy_residuals(sol, p, {5.0});
  CHECK(above.worst_plus == 0.0);
  // k below everything with u-only flux: the plus inequality telescopes to 0
  EntropyReport below = entropy_residuals(sol, p, {-5.0});
  CHECK(below.worst_plus <= 1e-14);
  CHECK(below.worst_plus >= -1e-14);
}

TEST_CASE("entropy residuals stay below rounding for catalog runs") {
  for (const char* name : {"burgers-riemann", "decay"}) {
    Ibvp p = catalog_problem(name);
    Grid g = build_grid(p, 50, std::nullopt, 1.0);
    DiscreteSolution sol = run(p, g, discretize(p, g, 3), true);
    EntropyReport rep = entropy_residuals(sol, p, default_k_samples(sol, 21));
    INFO(name);
    CHECK(rep.worst_plus <= 1e-12);
    CHECK(rep.worst_minus <= 1e-12);
    CHECK(rep.violation_count == 0);
  }
}

TEST_CASE("breaking the CFL condition produces entropy violations") {
  Ibvp base = catalog_problem("burgers-riemann");
  Ibvp p = make_ibvp(base.flux.source(), base.source.source(), base.initial.source(),
                     base.bc_left.source(), base.bc_right.source(), base.a, base.b, 0.1,
                     "burgers-riemann-short");
  Grid g = build_grid(p, 100, std::nullopt, 3.5, true);
  DiscreteSolution sol = run(p, g, discretize(p, g, 3), true);
  EntropyReport rep = entropy_residuals(sol, p, default_k_samples(sol, 21), 1e-6);
  CHECK(rep.violation_count > 0);
  CHECK(std::max(rep.worst_plus, rep.worst_minus) > 1e-6);
}

TEST_CASE("entropy audit requires the half-step rows") {
  Ibvp p = catalog_problem("decay");
  Grid g = build_grid(p, 10, std::nullopt, 1.0);
  DiscreteSolution sol = run(p, g, discretize(p, g, 3), false);
  CHECK_THROWS_AS(entropy_residuals(sol, p, {0.0}), InvariantError);
}

TEST_CASE("default k samples cover the data extremes") {
  DiscreteSolution sol = solve_catalog("burgers-riemann", 20);
  std::vector<double> ks = default_k_samples(sol, 21);
  CHECK(ks.size() >= 21);
  bool has_one = false, has_zero = false;
  for (double k : ks) {
    has_one = has_one || k == 1.0;
    has_zero = has_zero || k == 0.0;
  }
  CHECK(has_one);  // u_a extreme
  CHECK(has_zero); // u_b extreme
  CHECK(std::is_sorted(ks.begin(), ks.end()));
}

TEST_CASE("bln residuals vanish when the trace equals the datum") {
  // constant solution matching both boundary data
  Ibvp p = make_ibvp("u^2/2", "0", "0.7", "0.7", "0.7", 0.0, 1.0, 0.5);
  Grid g = build_grid(p, 20, std::nullopt, 1.0);
  DiscreteSolution sol = run(p, g, discretize(p, g, 3), false);
  BlnReport rep = bln_residuals(sol, p, 33);
  CHECK(rep.worst_left <= 1e-14);
  CHECK(rep.worst_right <= 1e-14);
}

TEST_CASE("bln residuals: outgoing characteristics at x=b comply identically") {
  // linear flux c*u with c>0: information leaves through x=b for any datum
  Ibvp p = make_ibvp("2*u", "0", "0.5+0.25*sin(2*pi*x)", "0.5", "0", 0.0, 1.0, 0.4);
  Grid g = build_grid(p, 50, std::nullopt, 1.0);
  DiscreteSolution sol = run(p, g, discretize(p, g, 3), false);
  BlnReport rep = bln_residuals(sol, p, 33);
  CHECK(rep.worst_right <= 1e-12);
}

TEST_CASE("bln residuals shrink with the mesh on burgers-riemann") {
  Ibvp p = catalog_problem("burgers-riemann");
  BlnReport coarse, fine;
  {
    Grid g = build_grid(p, 100, std::nullopt, 1.0);
    coarse = bln_residuals(run(p, g, discretize(p, g, 3), false), p, 33);
  }
  {
    Grid g = build_grid(p, 400, std::nullopt, 1.0);
    fine = bln_residuals(run(p, g, discretize(p, g, 3), false), p, 33);
  }
  CHECK(fine.worst_right <= std::max(coarse.worst_right, 1e-9));
  CHECK(fine.worst_left <= std::max(coarse.worst_left, 1e-9));
}

TEST_CASE("l1 distances") {
  DiscreteSolution a = solve_catalog("burgers-riemann", 50);
  CHECK(l1_distance(a, a, a.steps) == 0.0);

  // rows differing by a constant measure c*(b-a)
  DiscreteSolution b = a;
  for (double& v : b.cells) v += 0.25;
  CHECK(l1_distance(a, b, a.steps) == doctest::Approx(0.25).epsilon(1e-12));

  DiscreteSolution other = solve_catalog("burgers-riemann", 100);
  CHECK_THROWS_AS(l1_distance(a, other, 1), MismatchError);
}

TEST_CASE("cross-grid l1 distance matches a dense overlap oracle") {
  DiscreteSolution coarse = solve_catalog("burgers-riemann", 50);
  DiscreteSolution fine = solve_catalog("burgers-riemann", 100);
  double t = std::min(coarse.grid.covered_horizon(), fine.grid.covered_horizon());
  double got = l1_cross_distance(coarse, fine, t);
  // oracle: sample both piecewise-constant fields on a very fine grid
  int nc = static_cast<int>(std::lround(t / coarse.grid.dt));
  int nf = static_cast<int>(std::lround(t / fine.grid.dt));
  auto rc = coarse.row(std::min(nc, coarse.steps));
  auto rf = fine.row(std::min(nf, fine.steps));
  const int dense = 400000;
  double acc = 0.0;
  for (int i = 0; i < dense; ++i) {
    double x = (i + 0.5) / dense;
    int jc = std::min<int>(49, static_cast<int>(x / coarse.grid.dx));
    int jf = std::min<int>(99, static_cast<int>(x / fine.grid.dx));
    acc += std::fabs(rc[jc] - rf[jf]);
  }
  acc /= dense;
  CHECK(got == doctest::Approx(acc).epsilon(1e-6));
}
