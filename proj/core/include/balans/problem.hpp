#ifndef BALANS_PROBLEM_HPP
#define BALANS_PROBLEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "balans/expr.hpp"

namespace balans {

/// One initial-boundary value problem
///   d/dt u + d/dx flux(t,x,u) = source(t,x,u)  on ]a,b[ x ]0,horizon[
/// with initial datum `initial` (a function of x) and boundary data
/// `bc_left`, `bc_right` (functions of t). Immutable after construction.
struct Ibvp {
  Expr flux;     // f(t,x,u)
  Expr source;   // g(t,x,u)
  Expr initial;  // u_o(x)
  Expr bc_left;  // u_a(t)
  Expr bc_right; // u_b(t)
  double a = 0.0;
  double b = 1.0;
  double horizon = 1.0;
  std::string name = "custom";
  std::vector<std::string> warnings; // e.g. piecewise flux voids smoothness
};

/// Parses the five expression strings and validates the instance:
/// a < b, horizon > 0, data finite on a sampling grid. Piecewise constructs
/// inside flux/source produce a warning, not an error.
Ibvp make_ibvp(const std::string& flux, const std::string& source,
               const std::string& initial, const std::string& bc_left,
               const std::string& bc_right, double a, double b, double horizon,
               const std::string& name = "custom");

/// Builtin problems: "advection-x", "lwr-ramp", "burgers-riemann", "decay",
/// "burgers-smooth".
Ibvp catalog_problem(const std::string& name);
std::vector<std::string> catalog_names();

/// Uniform grid plus the time step chosen by the CFL condition
/// alpha >= L_f and lambda <= 1/(3*alpha).
struct Grid {
  int cells = 0;      // N
  double dx = 0.0;    // (b-a)/N
  double dt = 0.0;    // lambda*dx
  double lambda = 0.0;
  double alpha = 1.0; // numerical viscosity, >= 1
  int steps = 0;      // floor(horizon/dt)
  double a = 0.0;
  double b = 0.0;
  double horizon = 0.0;

  double x_center(int j) const { return a + (j + 0.5) * dx; } // j = 0..cells-1
  double x_iface(int i) const { return a + i * dx; }          // i = 0..cells
  double time(int n) const { return n * dt; }
  double covered_horizon() const { return steps * dt; }
  bool same_layout(const Grid& o) const {
    return cells == o.cells && dx == o.dx && dt == o.dt && a == o.a && b == o.b;
  }
};

/// Chooses alpha from a sampled estimate of L_f over the expected solution
/// range (or takes `alpha_override`, which must not fall below the CFL
/// floor max(1, L_f estimate)), then sets lambda = cfl_fraction/(3*alpha).
/// cfl_fraction above 1 breaks the scheme's monotonicity and is only
/// accepted with allow_unsafe_cfl, for negative-control experiments.
Grid build_grid(const Ibvp& p, int cells, std::optional<double> alpha_override,
                double cfl_fraction, bool allow_unsafe_cfl = false);

/// Grid valid for two problems sharing data and interval: alpha covers the
/// larger of the two L_f estimates.
Grid build_grid_pair(const Ibvp& p1, const Ibvp& p2, int cells, double cfl_fraction);

/// Cell averages of the initial datum and interval averages of the boundary
/// data, by composite Gauss-Legendre quadrature with `quad_points` nodes
/// (1..5) per cell / time interval.
struct DiscreteData {
  std::vector<double> u0; // cells entries
  std::vector<double> ua; // steps entries, average over [t^n, t^{n+1}]
  std::vector<double> ub;
};

DiscreteData discretize(const Ibvp& p, const Grid& grid, int quad_points);

/// Sampled sup norms of |d_u flux| and |d_u source| over
/// [0,t] x [a,b] x [u_lo, u_hi].
struct LipschitzConstants {
  double L_f = 0.0;
  double L_g = 0.0;
};

LipschitzConstants lipschitz_constants(const Ibvp& p, double t, double u_lo,
                                       double u_hi, int samples);

/// Signed u-range the CFL estimate is taken over: the sampled data range
/// widened by the drift t*C1 and doubled away from zero. Exposed for
/// reporting and for the audit that re-checks alpha against the observed
/// solution range.
struct CflBox {
  double u_lo = 0.0;
  double u_hi = 0.0;
  double L_f_estimate = 0.0;
};

CflBox cfl_estimate(const Ibvp& p);

namespace quadrature {
/// Average of `f` over [lo, hi] by Gauss-Legendre with `points` nodes.
double average(const Expr& f, Var variable, double lo, double hi, int points);
} // namespace quadrature

} // namespace balans

#endif
