#include "balans/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace balans {

namespace {

constexpr int kDataSamples = 257; // 1-D data scans
constexpr int kSup2D = 65;        // (t,x) sup norms
constexpr int kSup3D = 21;        // (t,x,u) sup norms

struct AxisRange {
  double lo = 0.0, hi = 0.0;
};

AxisRange scan_range(const Expr& e, Var var, double lo, double hi, int samples,
                     const char* what) {
  AxisRange r{std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < samples; ++i) {
    double c = (samples == 1) ? lo : lo + (hi - lo) * (static_cast<double>(i) / (samples - 1));
    double t = var == Var::t ? c : 0.0;
    double x = var == Var::x ? c : 0.0;
    double u = var == Var::u ? c : 0.0;
    double v = e.value(t, x, u);
    if (!std::isfinite(v))
      throw InvariantError(std::string(what) + " is not finite on its domain");
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  return r;
}

} // namespace

Ibvp make_ibvp(const std::string& flux, const std::string& source,
               const std::string& initial, const std::string& bc_left,
               const std::string& bc_right, double a, double b, double horizon,
               const std::string& name) {
  if (!(a < b)) throw InvariantError("problem requires a < b");
  if (!(horizon > 0.0)) throw InvariantError("problem requires a positive horizon");
  Ibvp p;
  p.flux = Expr::parse(flux);
  p.source = Expr::parse(source);
  p.initial = Expr::parse(initial);
  p.bc_left = Expr::parse(bc_left);
  p.bc_right = Expr::parse(bc_right);
  p.a = a;
  p.b = b;
  p.horizon = horizon;
  p.name = name;
  if (p.initial.depends_on(Var::t) || p.initial.depends_on(Var::u))
    throw InvariantError("initial datum must be a function of x only");
  if (p.bc_left.depends_on(Var::x) || p.bc_left.depends_on(Var::u) ||
      p.bc_right.depends_on(Var::x) || p.bc_right.depends_on(Var::u))
    throw InvariantError("boundary data must be functions of t only");
  if (p.flux.piecewise())
    p.warnings.push_back("piecewise 'if' inside the flux voids the smoothness "
                         "assumptions behind the a-priori bounds");
  if (p.source.piecewise())
    p.warnings.push_back("piecewise 'if' inside the source voids the smoothness "
                         "assumptions behind the a-priori bounds");
  scan_range(p.initial, Var::x, a, b, kDataSamples, "initial datum");
  scan_range(p.bc_left, Var::t, 0.0, horizon, kDataSamples, "left boundary datum");
  scan_range(p.bc_right, Var::t, 0.0, horizon, kDataSamples, "right boundary datum");
  return p;
}

Ibvp catalog_problem(const std::string& name) {
  // advection-x: the flux is u-independent, so boundary data enter the
  // scheme only through the ghost cells; u_a = u_b = t is the trace of the
  // exact solution u(t,x) = t.
  if (name == "advection-x")
    return make_ibvp("-x", "0", "0", "t", "t", 0.0, 1.0, 1.0, name);
  if (name == "lwr-ramp")
    return make_ibvp("u*(1-u)", "0", "0", "min(4*t, 0.4)", "0", 0.0, 1.0, 0.5, name);
  if (name == "burgers-riemann")
    return make_ibvp("u^2/2", "0", "if(0.5-x, 1, 0)", "1", "0", 0.0, 1.0, 1.2, name);
  if (name == "decay")
    return make_ibvp("u^2/2", "-u", "0.5", "0.5*exp(-t)", "0.5*exp(-t)", 0.0, 1.0, 1.0, name);
  if (name == "burgers-smooth")
    return make_ibvp("u^2/2", "0", "0.5+0.25*sin(2*pi*x)", "0.5", "0.5", 0.0, 1.0, 0.3, name);
  throw InvariantError("unknown catalog problem '" + name + "'");
}

std::vector<std::string> catalog_names() {
  return {"advection-x", "lwr-ramp", "burgers-riemann", "decay", "burgers-smooth"};
}

CflBox cfl_estimate(const Ibvp& p) {
  AxisRange r0 = scan_range(p.initial, Var::x, p.a, p.b, kDataSamples, "initial datum");
  AxisRange ra = scan_range(p.bc_left, Var::t, 0.0, p.horizon, kDataSamples, "left boundary datum");
  AxisRange rb = scan_range(p.bc_right, Var::t, 0.0, p.horizon, kDataSamples, "right boundary datum");
  double lo = std::min({r0.lo, ra.lo, rb.lo});
  double hi = std::max({r0.hi, ra.hi, rb.hi});

  Box3 tx{0.0, p.horizon, p.a, p.b, 0.0, 0.0};
  double c1 = sup_abs_on_box(p.flux, JetComponent::d_x, tx, kSup2D) +
              sup_abs_on_box(p.source, JetComponent::value, tx, kSup2D);

  // Data range widened by the drift t*C1 and doubled away from zero, so the
  // viscosity covers the range the solution can reach.
  CflBox box;
  box.u_lo = 2.0 * std::min(lo - p.horizon * c1, 0.0);
  box.u_hi = 2.0 * std::max(hi + p.horizon * c1, 0.0);
  box.L_f_estimate = sup_abs_on_box(
      p.flux, JetComponent::d_u, Box3{0.0, p.horizon, p.a, p.b, box.u_lo, box.u_hi}, kSup3D);
  return box;
}

namespace {

Grid grid_from_alpha(const Ibvp& p, int cells, double alpha, double cfl_fraction,
                     bool allow_unsafe_cfl) {
  if (cells < 2) throw InvariantError("grid needs at least 2 cells");
  if (!(cfl_fraction > 0.0)) throw InvariantError("cfl_fraction must be positive");
  if (cfl_fraction > 1.0 && !allow_unsafe_cfl)
    throw InvariantError("cfl_fraction above 1 requires the unsafe flag");
  Grid g;
  g.cells = cells;
  g.a = p.a;
  g.b = p.b;
  g.horizon = p.horizon;
  g.dx = (p.b - p.a) / cells;
  g.alpha = alpha;
  g.lambda = cfl_fraction / (3.0 * alpha);
  g.dt = g.lambda * g.dx;
  // floor(horizon/dt), robust to the quotient landing a few ulps below an
  // integer
  g.steps = static_cast<int>(std::floor(p.horizon / g.dt * (1.0 + 4e-15)));
  if (g.steps < 1) throw InvariantError("horizon shorter than one time step");
  return g;
}

} // namespace

Grid build_grid(const Ibvp& p, int cells, std::optional<double> alpha_override,
                double cfl_fraction, bool allow_unsafe_cfl) {
  CflBox box = cfl_estimate(p);
  double floor_alpha = std::max(1.0, box.L_f_estimate);
  double alpha;
  if (alpha_override) {
    if (*alpha_override < floor_alpha)
      throw InvariantError("alpha override below the CFL floor " + std::to_string(floor_alpha));
    alpha = *alpha_override;
  } else {
    alpha = std::max(1.0, 1.001 * box.L_f_estimate);
  }
  return grid_from_alpha(p, cells, alpha, cfl_fraction, allow_unsafe_cfl);
}

Grid build_grid_pair(const Ibvp& p1, const Ibvp& p2, int cells, double cfl_fraction) {
  double lf = std::max(cfl_estimate(p1).L_f_estimate, cfl_estimate(p2).L_f_estimate);
  return grid_from_alpha(p1, cells, std::max(1.0, 1.001 * lf), cfl_fraction, false);
}

namespace quadrature {

namespace {

struct Rule {
  int n;
  double node[5];   // ascending, on [-1,1]
  double weight[5]; // normalized so they sum to exactly 1
};

Rule make_rule(int points) {
  Rule r{};
  r.n = points;
  switch (points) {
    case 1:
      r.node[0] = 0.0;
      r.weight[0] = 1.0;
      break;
    case 2:
      r.node[0] = -0.57735026918962576; // 1/sqrt(3)
      r.node[1] = -r.node[0];
      r.weight[0] = 0.5;
      r.weight[1] = 0.5;
      break;
    case 3: {
      double w_out = 5.0 / 18.0;
      r.node[0] = -0.77459666924148338; // sqrt(3/5)
      r.node[1] = 0.0;
      r.node[2] = -r.node[0];
      r.weight[0] = w_out;
      r.weight[1] = 1.0 - 2.0 * w_out; // keeps the sum exactly 1
      r.weight[2] = w_out;
      break;
    }
    case 4: {
      double w_out = 0.34785484513745386 / 2.0;
      r.node[0] = -0.86113631159405258;
      r.node[1] = -0.33998104358485626;
      r.node[2] = -r.node[1];
      r.node[3] = -r.node[0];
      r.weight[0] = w_out;
      r.weight[1] = 0.5 - w_out;
      r.weight[2] = 0.5 - w_out;
      r.weight[3] = w_out;
      break;
    }
    case 5: {
      double w2 = 0.23692688505618909 / 2.0;
      double w1 = 0.47862867049936647 / 2.0;
      r.node[0] = -0.90617984593866399;
      r.node[1] = -0.53846931010568309;
      r.node[2] = 0.0;
      r.node[3] = -r.node[1];
      r.node[4] = -r.node[0];
      r.weight[0] = w2;
      r.weight[1] = w1;
      r.weight[2] = 1.0 - 2.0 * (w1 + w2);
      r.weight[3] = w1;
      r.weight[4] = w2;
      break;
    }
    default:
      throw InvariantError("quadrature supports 1 to 5 points");
  }
  return r;
}

} // namespace

double average(const Expr& f, Var variable, double lo, double hi, int points) {
  if (points < 1) throw InvariantError("quadrature needs at least 1 point");
  Rule rule = make_rule(points);
  double mid = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  auto eval_at = [&](double c) {
    double t = variable == Var::t ? c : 0.0;
    double x = variable == Var::x ? c : 0.0;
    double u = variable == Var::u ? c : 0.0;
    return f.value(t, x, u);
  };
  // Summed relative to the first node so a constant integrand reproduces
  // exactly.
  double base = eval_at(mid + rule.node[0] * half);
  double acc = 0.0;
  for (int i = 0; i < rule.n; ++i)
    acc += rule.weight[i] * (eval_at(mid + rule.node[i] * half) - base);
  return base + acc;
}

} // namespace quadrature

DiscreteData discretize(const Ibvp& p, const Grid& grid, int quad_points) {
  if (quad_points < 1) throw InvariantError("quad_points must be at least 1");
  DiscreteData d;
  d.u0.resize(grid.cells);
  for (int j = 0; j < grid.cells; ++j)
    d.u0[j] = quadrature::average(p.initial, Var::x, grid.x_iface(j), grid.x_iface(j + 1),
                                  quad_points);
  d.ua.resize(grid.steps);
  d.ub.resize(grid.steps);
  for (int n = 0; n < grid.steps; ++n) {
    d.ua[n] = quadrature::average(p.bc_left, Var::t, grid.time(n), grid.time(n + 1), quad_points);
    d.ub[n] = quadrature::average(p.bc_right, Var::t, grid.time(n), grid.time(n + 1), quad_points);
  }
  return d;
}

LipschitzConstants lipschitz_constants(const Ibvp& p, double t, double u_lo, double u_hi,
                                       int samples) {
  if (!(t > 0.0)) throw InvariantError("lipschitz_constants needs t > 0");
  if (u_hi < u_lo) throw InvariantError("empty u range");
  Box3 box{0.0, t, p.a, p.b, u_lo, u_hi};
  return {sup_abs_on_box(p.flux, JetComponent::d_u, box, samples),
          sup_abs_on_box(p.source, JetComponent::d_u, box, samples)};
}

} // namespace balans
