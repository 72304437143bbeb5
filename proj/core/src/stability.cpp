#include "balans/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace balans {

namespace {

constexpr int kSup3D = 13;

void require_shared_data(const Ibvp& p1, const Ibvp& p2) {
  if (p1.a != p2.a || p1.b != p2.b || p1.horizon != p2.horizon)
    throw MismatchError("stability pair must share the interval and horizon");
  if (p1.initial.source() != p2.initial.source() ||
      p1.bc_left.source() != p2.bc_left.source() ||
      p1.bc_right.source() != p2.bc_right.source())
    throw MismatchError("stability pair must share initial and boundary data");
}

Expr difference_expr(const Expr& lhs, const Expr& rhs) {
  return Expr::parse("(" + lhs.source() + ")-(" + rhs.source() + ")");
}

// Envelope ingredients frozen at the checkpoint horizon; U(s) evaluated with
// them upper-bounds the per-time envelope for every s <= t.
struct FrozenEnvelope {
  double data_sup = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double at(double s) const { return (data_sup + s * C1) * std::exp(C2 * s); }
};

FrozenEnvelope freeze_envelope(const Ibvp& p, double t, int samples) {
  UEnvelope e = envelope_U(p, t, samples);
  return {e.data_sup, e.C1, e.C2};
}

} // namespace

StabilityEntry stability_bound(const Ibvp& p1, const Ibvp& p2,
                               const DiscreteSolution& sol1, const DiscreteSolution& sol2,
                               double t, int samples) {
  require_shared_data(p1, p2);
  if (!sol1.grid.same_layout(sol2.grid))
    throw MismatchError("stability pair must share the grid");
  const Grid& g = sol1.grid;
  int n = std::clamp(static_cast<int>(std::lround(t / g.dt)), 1,
                     std::min(sol1.steps, sol2.steps));

  StabilityEntry entry;
  entry.t = g.time(n);
  entry.measured = l1_distance(sol1, sol2, n);

  FrozenEnvelope env1 = freeze_envelope(p1, entry.t, samples);
  FrozenEnvelope env2 = freeze_envelope(p2, entry.t, samples);
  entry.box_u1 = env1.at(entry.t);
  entry.box_u2 = env2.at(entry.t);
  entry.box_union = std::max(entry.box_u1, entry.box_u2);

  Box3 sigma{0.0, entry.t, p1.a, p1.b, -entry.box_union, entry.box_union};
  double dug1 = sup_abs_on_box(p1.source, JetComponent::d_u, sigma, samples);
  double dug2 = sup_abs_on_box(p2.source, JetComponent::d_u, sigma, samples);
  entry.components.exp_prefactor = std::exp(entry.t * std::min(dug1, dug2));

  Expr fdiff = difference_expr(p2.flux, p1.flux);
  Expr gdiff = difference_expr(p1.source, p2.source);

  const int nx = g.cells; // trapezoid over the solver's own interfaces
  const int nu = std::max(2, samples);
  double x_flux = 0.0, source = 0.0, u_flux = 0.0, bnd_a = 0.0, bnd_b = 0.0;
  for (int m = 0; m <= n; ++m) {
    double s = g.time(m);
    double wt = (m == 0 || m == n) ? 0.5 * g.dt : g.dt;
    double uh = std::max(env1.at(s), env2.at(s));
    double a_sum = 0.0, b_sum = 0.0, du_sup = 0.0, edge_a = 0.0, edge_b = 0.0;
    for (int i = 0; i <= nx; ++i) {
      double x = g.x_iface(i);
      double wx = (i == 0 || i == nx) ? 0.5 * g.dx : g.dx;
      double dx_sup = 0.0, val_sup = 0.0, g_sup = 0.0;
      for (int iu = 0; iu < nu; ++iu) {
        double u = -uh + 2.0 * uh * (static_cast<double>(iu) / (nu - 1));
        Jet2 jd = fdiff.jet(s, x, u);
        dx_sup = std::max(dx_sup, std::fabs(jd.d_x));
        du_sup = std::max(du_sup, std::fabs(jd.d_u));
        val_sup = std::max(val_sup, std::fabs(jd.value));
        g_sup = std::max(g_sup, std::fabs(gdiff.value(s, x, u)));
      }
      a_sum += wx * dx_sup;
      b_sum += wx * g_sup;
      if (i == 0) edge_a = val_sup;
      if (i == nx) edge_b = val_sup;
    }
    double min_tv = std::min(tv_snapshot(sol1, m), tv_snapshot(sol2, m));
    x_flux += wt * a_sum;
    source += wt * b_sum;
    u_flux += wt * du_sup * min_tv;
    bnd_a += wt * edge_a;
    bnd_b += wt * edge_b;
  }
  entry.components.x_flux_term = x_flux;
  entry.components.source_term = source;
  entry.components.u_flux_tv_term = u_flux;
  entry.components.boundary_a_term = 2.0 * bnd_a;
  entry.components.boundary_b_term = 2.0 * bnd_b;
  entry.bound = entry.components.exp_prefactor *
                (x_flux + source + u_flux + 2.0 * bnd_a + 2.0 * bnd_b);
  return entry;
}

StabilityReport run_pair(const Ibvp& p1, const Ibvp& p2, int cells,
                         const std::vector<double>& checkpoints, int samples) {
  require_shared_data(p1, p2);
  Grid grid = build_grid_pair(p1, p2, cells, 1.0);
  DiscreteData data = discretize(p1, grid, 3);
  DiscreteSolution sol1 = run(p1, grid, data, false);
  DiscreteSolution sol2 = run(p2, grid, data, false);
  StabilityReport report;
  for (double t : checkpoints)
    report.checkpoints.push_back(stability_bound(p1, p2, sol1, sol2, t, samples));
  return report;
}

DataDependenceEntry data_dependence_bound(const Ibvp& p, const DiscreteData& data1,
                                          const DiscreteData& data2,
                                          const DiscreteSolution& sol1,
                                          const DiscreteSolution& sol2, double t) {
  if (!sol1.grid.same_layout(sol2.grid))
    throw MismatchError("data-dependence pair must share the grid");
  if (data1.u0.size() != data2.u0.size() || data1.ua.size() != data2.ua.size())
    throw MismatchError("data-dependence pair must share the discretization");
  const Grid& g = sol1.grid;
  DataDependenceEntry entry;
  int n = std::clamp(static_cast<int>(std::lround(t / g.dt)), 1,
                     std::min(sol1.steps, sol2.steps));
  entry.t = g.time(n);
  entry.measured = l1_distance(sol1, sol2, n);
  for (std::size_t j = 0; j < data1.u0.size(); ++j)
    entry.l1_u0 += std::fabs(data1.u0[j] - data2.u0[j]);
  entry.l1_u0 *= g.dx;
  for (int m = 0; m < n && m < static_cast<int>(data1.ua.size()); ++m) {
    entry.l1_ua += std::fabs(data1.ua[m] - data2.ua[m]);
    entry.l1_ub += std::fabs(data1.ub[m] - data2.ub[m]);
  }
  entry.l1_ua *= g.dt;
  entry.l1_ub *= g.dt;

  // L_f over the union of the observed ranges and the CFL operating box.
  // The continuum constant is a sup over all of R; the observed range alone
  // is too tight, the scheme's boundary layer overshoots it at O(dx).
  CflBox cfl = cfl_estimate(p);
  double lo = cfl.u_lo, hi = cfl.u_hi;
  for (const DiscreteSolution* s : {&sol1, &sol2}) {
    for (double v : s->cells) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double v : s->ua) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double v : s->ub) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  LipschitzConstants lc = lipschitz_constants(p, entry.t, lo, hi, kSup3D);
  entry.L_f = lc.L_f;
  entry.L_g = lc.L_g;
  entry.bound = std::exp(lc.L_g * entry.t) *
                (entry.l1_u0 + lc.L_f * (entry.l1_ua + entry.l1_ub));
  return entry;
}

std::vector<DataDependenceEntry> run_data_pair(const Ibvp& p1, const Ibvp& p2, int cells,
                                               const std::vector<double>& checkpoints) {
  if (p1.flux.source() != p2.flux.source() || p1.source.source() != p2.source.source())
    throw MismatchError("data-dependence pair must share flux and source");
  if (p1.a != p2.a || p1.b != p2.b || p1.horizon != p2.horizon)
    throw MismatchError("data-dependence pair must share the interval and horizon");
  Grid grid = build_grid_pair(p1, p2, cells, 1.0);
  DiscreteData data1 = discretize(p1, grid, 3);
  DiscreteData data2 = discretize(p2, grid, 3);
  DiscreteSolution sol1 = run(p1, grid, data1, false);
  DiscreteSolution sol2 = run(p2, grid, data2, false);
  std::vector<DataDependenceEntry> entries;
  entries.reserve(checkpoints.size());
  for (double t : checkpoints)
    entries.push_back(data_dependence_bound(p1, data1, data2, sol1, sol2, t));
  return entries;
}

} // namespace balans
