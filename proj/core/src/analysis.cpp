#include "balans/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace balans {

namespace {

constexpr int kDataSamples = 257;
constexpr int kSup2D = 33;

double data_sup_on(const Expr& e, Var var, double lo, double hi) {
  Box3 box;
  switch (var) {
    case Var::t: box = {lo, hi, 0.0, 0.0, 0.0, 0.0}; break;
    case Var::x: box = {0.0, 0.0, lo, hi, 0.0, 0.0}; break;
    case Var::u: box = {0.0, 0.0, 0.0, 0.0, lo, hi}; break;
  }
  return sup_abs_on_box(e, JetComponent::value, box, kDataSamples);
}

} // namespace

double linf_snapshot(const DiscreteSolution& sol, int n) {
  if (n < 0 || n > sol.steps) throw InvariantError("snapshot index out of range");
  double m = 0.0;
  for (double v : sol.row(n)) m = std::max(m, std::fabs(v));
  return m;
}

double tv_row(std::span<const double> row, double ua_n, double ub_n) {
  double tv = std::fabs(row.front() - ua_n);
  for (std::size_t j = 0; j + 1 < row.size(); ++j)
    tv += std::fabs(row[j + 1] - row[j]);
  tv += std::fabs(ub_n - row.back());
  return tv;
}

double tv_snapshot(const DiscreteSolution& sol, int n) {
  if (n < 0 || n > sol.steps) throw InvariantError("snapshot index out of range");
  return tv_row(sol.row(n), sol.ua[n], sol.ub[n]);
}

double time_lipschitz_quotient(const DiscreteSolution& sol, int n) {
  if (n < 1 || n > sol.steps) throw InvariantError("snapshot index out of range");
  auto prev = sol.row(n - 1);
  auto cur = sol.row(n);
  double acc = 0.0;
  for (int j = 0; j < sol.grid.cells; ++j) acc += std::fabs(cur[j] - prev[j]);
  return acc * sol.grid.dx / sol.grid.dt;
}

double spacetime_bv(const DiscreteSolution& sol, int n) {
  if (n < 1 || n > sol.steps) throw InvariantError("snapshot index out of range");
  double space = 0.0;
  for (int m = 0; m < n; ++m) space += tv_snapshot(sol, m);
  double time = 0.0;
  for (int m = 0; m < n; ++m) {
    double jumps = std::fabs(sol.ua[m + 1] - sol.ua[m]) + std::fabs(sol.ub[m + 1] - sol.ub[m]);
    auto cur = sol.row(m);
    auto nxt = sol.row(m + 1);
    for (int j = 0; j < sol.grid.cells; ++j) jumps += std::fabs(nxt[j] - cur[j]);
    time += jumps;
  }
  return sol.grid.dt * space + sol.grid.dx * time;
}

double l1_distance(const DiscreteSolution& s1, const DiscreteSolution& s2, int n) {
  if (!s1.grid.same_layout(s2.grid)) throw MismatchError("solutions live on different grids");
  if (n < 0 || n > std::min(s1.steps, s2.steps))
    throw InvariantError("snapshot index out of range");
  auto a = s1.row(n);
  auto b = s2.row(n);
  double acc = 0.0;
  for (int j = 0; j < s1.grid.cells; ++j) acc += std::fabs(a[j] - b[j]);
  return acc * s1.grid.dx;
}

double l1_cross_distance(const DiscreteSolution& coarse, const DiscreteSolution& fine,
                         double t) {
  const Grid& gc = coarse.grid;
  const Grid& gf = fine.grid;
  if (gc.a != gf.a || gc.b != gf.b)
    throw MismatchError("cross-grid distance needs a common interval");
  if (gf.cells % gc.cells != 0)
    throw MismatchError("cross-grid distance needs nested grids");
  int nc = static_cast<int>(std::lround(t / gc.dt));
  int nf = static_cast<int>(std::lround(t / gf.dt));
  nc = std::clamp(nc, 0, coarse.steps);
  nf = std::clamp(nf, 0, fine.steps);
  int ratio = gf.cells / gc.cells;
  auto rc = coarse.row(nc);
  auto rf = fine.row(nf);
  double acc = 0.0;
  for (int j = 0; j < gf.cells; ++j) acc += std::fabs(rf[j] - rc[j / ratio]);
  return acc * gf.dx;
}

UEnvelope envelope_U(const Ibvp& p, double t, int samples) {
  if (!(t > 0.0)) throw InvariantError("envelope_U needs t > 0");
  UEnvelope env;
  env.data_sup = std::max({data_sup_on(p.initial, Var::x, p.a, p.b),
                           data_sup_on(p.bc_left, Var::t, 0.0, t),
                           data_sup_on(p.bc_right, Var::t, 0.0, t)});
  Box3 tx{0.0, t, p.a, p.b, 0.0, 0.0};
  env.C1 = sup_abs_on_box(p.flux, JetComponent::d_x, tx, kSup2D) +
           sup_abs_on_box(p.source, JetComponent::value, tx, kSup2D);
  // pass 1: C2 over the data range; pass 2: over the resulting [-U, U] box
  double c2 = 0.0;
  double u_half = env.data_sup;
  for (int pass = 0; pass < 2; ++pass) {
    Box3 box{0.0, t, p.a, p.b, -u_half, u_half};
    c2 = sup_abs_on_box(p.flux, JetComponent::d_xu, box, samples) +
         sup_abs_on_box(p.source, JetComponent::d_u, box, samples);
    u_half = (env.data_sup + t * env.C1) * std::exp(c2 * t);
  }
  env.C2 = c2;
  env.U = u_half;
  return env;
}

Envelopes envelopes_at(const Ibvp& p, const DiscreteSolution& sol, int n, int samples) {
  if (n < 1 || n > sol.steps) throw InvariantError("envelope index out of range");
  const Grid& g = sol.grid;
  Envelopes env;
  env.n = n;
  env.t = g.time(n);
  UEnvelope ue = envelope_U(p, env.t, samples);
  env.U = ue.U;
  env.C1 = ue.C1;
  env.C2 = ue.C2;

  Box3 sigma{0.0, env.t, p.a, p.b, -env.U, env.U};
  double dxx_f = sup_abs_on_box(p.flux, JetComponent::d_xx, sigma, samples);
  double dxu_f = sup_abs_on_box(p.flux, JetComponent::d_xu, sigma, samples);
  double dx_g = sup_abs_on_box(p.source, JetComponent::d_x, sigma, samples);
  double du_g = sup_abs_on_box(p.source, JetComponent::d_u, sigma, samples);
  env.sup_du_f = sup_abs_on_box(p.flux, JetComponent::d_u, sigma, samples);
  env.sup_dx_f = sup_abs_on_box(p.flux, JetComponent::d_x, sigma, samples);
  env.g_sup = sup_abs_on_box(p.source, JetComponent::value, sigma, samples);
  env.L_g = du_g;

  double dxf_at0 = sup_abs_on_box(p.flux, JetComponent::d_x,
                                  Box3{0.0, env.t, p.a, p.b, 0.0, 0.0}, kSup2D);
  double ua_sup = data_sup_on(p.bc_left, Var::t, 0.0, env.t);
  double width = p.b - p.a;
  env.K1 = 2.0 * (dxf_at0 + width * dxx_f);
  env.K2 = 2.0 * env.C1 + width * (2.0 * dxx_f + dx_g) +
           0.5 * (3.0 * env.U + ua_sup) * dxu_f * g.dt + 2.0 * du_g * env.U;

  double jumps0 = tv_snapshot(sol, 0);
  double jumps_a = 0.0, jumps_b = 0.0;
  for (int m = 1; m <= n; ++m) {
    jumps_a += std::fabs(sol.ua[m] - sol.ua[m - 1]);
    jumps_b += std::fabs(sol.ub[m] - sol.ub[m - 1]);
  }
  env.Cx = std::exp(env.C2 * env.t) * (jumps0 + jumps_a + jumps_b + env.t * env.K2);

  env.Ct = (g.alpha + env.sup_du_f) * env.Cx + width * env.sup_dx_f;
  env.Ct_plus_g = env.Ct + env.g_sup;

  double ndt = n * g.dt;
  env.Cxt = ndt * (1.0 + g.alpha + env.sup_du_f) * env.Cx +
            ndt * (width * env.sup_dx_f + env.g_sup) +
            g.dx * (jumps_a + jumps_b);
  return env;
}

CxEnvelope envelope_Cx(const Ibvp& p, const DiscreteSolution& sol, int n, int samples) {
  Envelopes env = envelopes_at(p, sol, n, samples);
  return {env.Cx, env.K2};
}

double envelope_Ct(const Ibvp& p, const DiscreteSolution& sol, int n, int samples) {
  return envelopes_at(p, sol, n, samples).Ct_plus_g;
}

double envelope_Cxt(const Ibvp& p, const DiscreteSolution& sol, int n, int samples) {
  return envelopes_at(p, sol, n, samples).Cxt;
}

namespace {

BoundsCheckpoint checkpoint_from(const Envelopes& env, const DiscreteSolution& sol) {
  BoundsCheckpoint c;
  c.n = env.n;
  c.t = env.t;
  c.observed_linf = linf_snapshot(sol, env.n);
  c.bound_U = env.U;
  c.observed_tv = tv_snapshot(sol, env.n);
  c.bound_Cx = env.Cx;
  c.observed_time_lipschitz = time_lipschitz_quotient(sol, env.n);
  c.bound_Ct_plus_g = env.Ct_plus_g;
  c.observed_bv_spacetime = spacetime_bv(sol, env.n);
  c.bound_Cxt = env.Cxt;
  c.C1 = env.C1;
  c.C2 = env.C2;
  c.K1 = env.K1;
  c.K2 = env.K2;
  c.L_f = env.sup_du_f;
  c.L_g = env.L_g;
  c.u_box = env.U;
  return c;
}

} // namespace

BoundsReport audit_bounds(const Ibvp& p, const DiscreteSolution& sol,
                          const std::vector<double>& report_times, int samples,
                          double relative_slack) {
  BoundsReport report;
  report.relative_slack = relative_slack;
  report.alpha = sol.grid.alpha;
  const int steps = sol.steps;

  // Checkpoint ladder: geometric early (envelopes grow fastest near t=0),
  // then evenly spaced, plus every requested report time and the final step.
  std::vector<int> ladder;
  for (int c = 1; c < steps; c *= 2) ladder.push_back(c);
  int even = std::max(1, steps / 8);
  for (int c = even; c < steps; c += even) ladder.push_back(c);
  for (double t : report_times) {
    int n = static_cast<int>(std::lround(t / sol.grid.dt));
    ladder.push_back(std::clamp(n, 1, steps));
  }
  ladder.push_back(steps);
  std::sort(ladder.begin(), ladder.end());
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());

  std::vector<Envelopes> envs;
  envs.reserve(ladder.size());
  for (int c : ladder) envs.push_back(envelopes_at(p, sol, c, samples));

  auto passes = [&](double observed, double bound) {
    return observed <= bound * (1.0 + relative_slack) + 1e-300;
  };
  auto flag = [&](const char* kind, int n, double observed, double bound) {
    report.violations.push_back({kind, n, observed, bound});
  };

  // Per-step audits: compare against the envelope at the latest ladder point
  // at or below n (a lower bound on the step's own envelope, so a pass is
  // conclusive); recompute exactly when that comparison fails.
  std::size_t below = 0;
  for (int n = 1; n <= steps; ++n) {
    while (below + 1 < envs.size() && envs[below + 1].n <= n) ++below;
    const Envelopes& lower = envs[below];
    double linf = linf_snapshot(sol, n);
    double tv = tv_snapshot(sol, n);
    double lip = time_lipschitz_quotient(sol, n);
    bool ok_linf = passes(linf, lower.U);
    bool ok_tv = passes(tv, lower.Cx);
    bool ok_lip = passes(lip, lower.Ct_plus_g);
    if (!(ok_linf && ok_tv && ok_lip)) {
      Envelopes exact = (lower.n == n) ? lower : envelopes_at(p, sol, n, samples);
      if (lower.n != n) ++report.exact_rechecks;
      if (!passes(linf, exact.U)) flag("linf", n, linf, exact.U);
      if (!passes(tv, exact.Cx)) flag("tv", n, tv, exact.Cx);
      if (!passes(lip, exact.Ct_plus_g)) flag("lip", n, lip, exact.Ct_plus_g);
    }
  }

  // Cumulative space-time BV at the ladder points (exact by construction).
  for (const Envelopes& env : envs) {
    double observed = spacetime_bv(sol, env.n);
    if (!passes(observed, env.Cxt)) flag("bvxt", env.n, observed, env.Cxt);
  }

  for (const Envelopes& env : envs) {
    bool requested = env.n == steps;
    for (double t : report_times)
      requested = requested ||
                  env.n == std::clamp(static_cast<int>(std::lround(t / sol.grid.dt)), 1, steps);
    if (requested) report.checkpoints.push_back(checkpoint_from(env, sol));
  }

  // Re-verify the CFL viscosity against the range the solution actually
  // visited.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : sol.cells) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (int n = 0; n <= steps; ++n) {
    lo = std::min({lo, sol.ua[n], sol.ub[n]});
    hi = std::max({hi, sol.ua[n], sol.ub[n]});
  }
  report.observed_u_min = lo;
  report.observed_u_max = hi;
  report.alpha_floor_observed = sup_abs_on_box(
      p.flux, JetComponent::d_u,
      Box3{0.0, sol.grid.covered_horizon(), p.a, p.b, lo, hi}, samples);
  report.alpha_ok = sol.grid.alpha >= report.alpha_floor_observed * (1.0 - 1e-12);

  double covered = sol.grid.covered_horizon();
  for (int j = 0; j + 1 < sol.grid.cells; ++j)
    report.tv_u0_discrete += std::fabs(sol.at(0, j + 1) - sol.at(0, j));
  for (int m = 1; m <= steps; ++m) {
    report.tv_ua_discrete += std::fabs(sol.ua[m] - sol.ua[m - 1]);
    report.tv_ub_discrete += std::fabs(sol.ub[m] - sol.ub[m - 1]);
  }
  report.tv_uo_sampled = sampled_tv(p.initial, Var::x, p.a, p.b, 4096);
  report.tv_ua_sampled = sampled_tv(p.bc_left, Var::t, 0.0, covered, 4096);
  report.tv_ub_sampled = sampled_tv(p.bc_right, Var::t, 0.0, covered, 4096);
  return report;
}

double sampled_tv(const Expr& e, Var var, double lo, double hi, int samples) {
  if (samples < 2) throw InvariantError("sampled_tv needs at least 2 samples");
  auto at = [&](double c) {
    double t = var == Var::t ? c : 0.0;
    double x = var == Var::x ? c : 0.0;
    double u = var == Var::u ? c : 0.0;
    return e.value(t, x, u);
  };
  double tv = 0.0;
  double prev = at(lo);
  for (int i = 1; i < samples; ++i) {
    double c = (i == samples - 1) ? hi : lo + (hi - lo) * (static_cast<double>(i) / (samples - 1));
    double cur = at(c);
    tv += std::fabs(cur - prev);
    prev = cur;
  }
  return tv;
}

std::vector<double> default_k_samples(const DiscreteSolution& sol, int count) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : sol.cells) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double ua_lo = lo, ua_hi = hi, ub_lo = lo, ub_hi = hi;
  ua_lo = *std::min_element(sol.ua.begin(), sol.ua.end());
  ua_hi = *std::max_element(sol.ua.begin(), sol.ua.end());
  ub_lo = *std::min_element(sol.ub.begin(), sol.ub.end());
  ub_hi = *std::max_element(sol.ub.begin(), sol.ub.end());
  lo = std::min({lo, ua_lo, ub_lo});
  hi = std::max({hi, ua_hi, ub_hi});
  double range = std::max(hi - lo, 1e-12);
  double klo = lo - 0.1 * range;
  double khi = hi + 0.1 * range;
  std::vector<double> ks;
  ks.reserve(count + 4);
  for (int i = 0; i < count; ++i)
    ks.push_back(klo + (khi - klo) * (count == 1 ? 0.0 : static_cast<double>(i) / (count - 1)));
  ks.push_back(ua_lo);
  ks.push_back(ua_hi);
  ks.push_back(ub_lo);
  ks.push_back(ub_hi);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

EntropyReport entropy_residuals(const DiscreteSolution& sol, const Ibvp& p,
                                const std::vector<double>& k_values, double tolerance) {
  if (!sol.has_half())
    throw InvariantError("entropy audit needs the half-step rows (run with keep_half)");
  const Grid& g = sol.grid;
  const int N = g.cells;
  EntropyReport report;
  report.k_samples = k_values;
  report.tolerance = tolerance;
  report.worst_plus = -std::numeric_limits<double>::infinity();
  report.worst_minus = -std::numeric_limits<double>::infinity();

  std::vector<double> fk(N + 1), gp(N + 1), lm(N + 1), src(N);
  for (int n = 0; n < sol.steps; ++n) {
    double tn = g.time(n);
    auto cur = sol.row(n);
    auto nxt = sol.row(n + 1);
    auto hlf = sol.half_row(n);
    for (int j = 0; j < N; ++j) src[j] = p.source.value(tn, g.x_center(j), hlf[j]);
    auto state = [&](int j) {
      if (j < 0) return sol.ua[n];
      if (j >= N) return sol.ub[n];
      return cur[j];
    };
    for (double k : k_values) {
      for (int i = 0; i <= N; ++i) {
        double xi = g.x_iface(i);
        fk[i] = p.flux.value(tn, xi, k);
        double sl = state(i - 1), sr = state(i);
        // entropy fluxes G = F(max(.,k)) - F(k,k) and L = F(k,k) - F(min(.,k))
        gp[i] = numerical_flux(p.flux, tn, xi, std::max(sl, k), std::max(sr, k), g.alpha) - fk[i];
        lm[i] = fk[i] - numerical_flux(p.flux, tn, xi, std::min(sl, k), std::min(sr, k), g.alpha);
      }
      for (int j = 0; j < N; ++j) {
        double unp1 = nxt[j];
        double fk_diff = fk[j + 1] - fk[j];
        double rp = pos_part(unp1 - k) - pos_part(cur[j] - k) +
                    g.lambda * (gp[j + 1] - gp[j]) +
                    g.lambda * sgn_plus(unp1 - k) * fk_diff -
                    g.dt * sgn_plus(unp1 - k) * src[j];
        double rm = neg_part(unp1 - k) - neg_part(cur[j] - k) +
                    g.lambda * (lm[j + 1] - lm[j]) +
                    g.lambda * sgn_minus(unp1 - k) * fk_diff -
                    g.dt * sgn_minus(unp1 - k) * src[j];
        if (rp > report.worst_plus) {
          report.worst_plus = rp;
          report.at_plus = {n, j, k};
        }
        if (rm > report.worst_minus) {
          report.worst_minus = rm;
          report.at_minus = {n, j, k};
        }
        if (rp > tolerance) ++report.violation_count;
        if (rm > tolerance) ++report.violation_count;
      }
    }
  }
  return report;
}

BlnReport bln_residuals(const DiscreteSolution& sol, const Ibvp& p, int k_grid_size) {
  if (k_grid_size < 2) throw InvariantError("bln_residuals needs at least 2 k levels");
  const Grid& g = sol.grid;
  BlnReport report;
  report.left.resize(sol.steps + 1);
  report.right.resize(sol.steps + 1);
  report.worst_left = -std::numeric_limits<double>::infinity();
  report.worst_right = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= sol.steps; ++n) {
    double tn = g.time(n);
    double trace_a = sol.at(n, 0);
    double trace_b = sol.at(n, g.cells - 1);
    auto worst = [&](double x, double trace, double datum, double orientation) {
      double lo = std::min(trace, datum), hi = std::max(trace, datum);
      double pad = 0.1 * std::max(hi - lo, 0.1);
      lo -= pad;
      hi += pad;
      double f_trace = p.flux.value(tn, x, trace);
      double w = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < k_grid_size; ++i) {
        double k = lo + (hi - lo) * (static_cast<double>(i) / (k_grid_size - 1));
        double expr = (sgn(trace - k) - sgn(datum - k)) * (f_trace - p.flux.value(tn, x, k));
        w = std::max(w, orientation * expr);
      }
      return w;
    };
    // at x=a violations are positive values of the expression; at x=b the
    // inequality is reversed
    report.left[n] = worst(g.a, trace_a, sol.ua[n], +1.0);
    report.right[n] = worst(g.b, trace_b, sol.ub[n], -1.0);
    report.worst_left = std::max(report.worst_left, report.left[n]);
    report.worst_right = std::max(report.worst_right, report.right[n]);
  }
  return report;
}

} // namespace balans
