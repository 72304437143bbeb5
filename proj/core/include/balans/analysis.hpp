#ifndef BALANS_ANALYSIS_HPP
#define BALANS_ANALYSIS_HPP

#include <string>
#include <vector>

#include "balans/scheme.hpp"

namespace balans {

// ---- semi-Kruzkov helpers -------------------------------------------------
// The entropy machinery is written with (s-k)^+ = max(s,k) - k and
// (s-k)^- = k - min(s,k); a unit test pins these identities.

inline double pos_part(double s) { return s > 0.0 ? s : 0.0; }
inline double neg_part(double s) { return s < 0.0 ? -s : 0.0; }
inline double sgn_plus(double s) { return s > 0.0 ? 1.0 : 0.0; }
inline double sgn_minus(double s) { return s < 0.0 ? -1.0 : 0.0; }
inline double sgn(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

// ---- observed functionals ---------------------------------------------------

/// max_j |u_j^n| over the cells (ghosts excluded).
double linf_snapshot(const DiscreteSolution& sol, int n);

/// Total variation of a row including the jumps to the boundary values.
double tv_row(std::span<const double> row, double ua_n, double ub_n);
double tv_snapshot(const DiscreteSolution& sol, int n);

/// Per-step L1 quotient ||u(t^n) - u(t^{n-1})||_L1 / dt.
double time_lipschitz_quotient(const DiscreteSolution& sol, int n);

/// Observed space-time variation up to step n: sum_m dt*TV(u^m) over
/// m = 0..n-1 plus sum_m dx*|time jumps| including the boundary sequences.
double spacetime_bv(const DiscreteSolution& sol, int n);

/// dx-weighted L1 distance between two solutions on the same grid at step n.
double l1_distance(const DiscreteSolution& s1, const DiscreteSolution& s2, int n);

/// L1 distance between solutions on nested grids (fine.cells a multiple of
/// coarse.cells) at time t, by exact piecewise-constant overlap integration.
double l1_cross_distance(const DiscreteSolution& coarse, const DiscreteSolution& fine,
                         double t);

// ---- theoretical envelopes --------------------------------------------------

struct UEnvelope {
  double U = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double data_sup = 0.0; // max of the three data sup norms on [0,t]
};

/// L-infinity envelope U(t) = (data sup + t*C1(t)) * exp(C2(t)*t) with
/// C1 = sup|d_x f(.,.,0)| + sup|g(.,.,0)| and C2 = sup|d2_xu f| + sup|d_u g|.
/// C2 is sampled in two passes: first over the data range, then over the
/// resulting [-U, U] box.
UEnvelope envelope_U(const Ibvp& p, double t, int samples);

/// Everything the bound audits need at one time level, sampled over
/// Sigma_t = [0,t] x [a,b] x [-U(t), U(t)].
struct Envelopes {
  int n = 0;
  double t = 0.0;
  double U = 0.0;
  double C1 = 0.0, C2 = 0.0;
  double K1 = 0.0, K2 = 0.0;
  double Cx = 0.0;
  double Ct = 0.0;
  double Ct_plus_g = 0.0;
  double Cxt = 0.0;
  double sup_du_f = 0.0; // ||d_u f|| on Sigma_t (also the L_f used in reports)
  double sup_dx_f = 0.0;
  double g_sup = 0.0;
  double L_g = 0.0;
};

Envelopes envelopes_at(const Ibvp& p, const DiscreteSolution& sol, int n, int samples);

struct CxEnvelope {
  double Cx = 0.0;
  double K2 = 0.0;
};
CxEnvelope envelope_Cx(const Ibvp& p, const DiscreteSolution& sol, int n, int samples);
double envelope_Ct(const Ibvp& p, const DiscreteSolution& sol, int n, int samples);
double envelope_Cxt(const Ibvp& p, const DiscreteSolution& sol, int n, int samples);

// ---- bound audit -------------------------------------------------------------

struct BoundsCheckpoint {
  int n = 0;
  double t = 0.0;
  double observed_linf = 0.0, bound_U = 0.0;
  double observed_tv = 0.0, bound_Cx = 0.0;
  double observed_time_lipschitz = 0.0, bound_Ct_plus_g = 0.0;
  double observed_bv_spacetime = 0.0, bound_Cxt = 0.0;
  double C1 = 0.0, C2 = 0.0, K1 = 0.0, K2 = 0.0;
  double L_f = 0.0, L_g = 0.0;
  double u_box = 0.0; // half-width of the Sigma_t u box, i.e. U(t)
};

struct BoundViolation {
  std::string kind; // "linf", "tv", "lip", "bvxt"
  int n = 0;
  double observed = 0.0;
  double bound = 0.0;
};

struct BoundsReport {
  std::vector<BoundsCheckpoint> checkpoints;
  std::vector<BoundViolation> violations;
  double relative_slack = 0.0;
  // CFL re-verification on the observed solution range
  double alpha = 0.0;
  double observed_u_min = 0.0, observed_u_max = 0.0;
  double alpha_floor_observed = 0.0;
  bool alpha_ok = true;
  int exact_rechecks = 0;
  // data variation both ways: discrete jump sums (what the envelopes use)
  // and densely sampled continuum TVs (what they converge to)
  double tv_u0_discrete = 0.0, tv_ua_discrete = 0.0, tv_ub_discrete = 0.0;
  double tv_uo_sampled = 0.0, tv_ua_sampled = 0.0, tv_ub_sampled = 0.0;
};

/// Total variation of an expression over [lo, hi] from a dense sample.
double sampled_tv(const Expr& e, Var var, double lo, double hi, int samples);

/// Checks linf/tv/time-Lipschitz at every step (cheap staircase comparison
/// backed by exact envelope recomputation when inconclusive) and the
/// cumulative space-time BV at a checkpoint ladder. `report_times` selects
/// the rows included in the report.
BoundsReport audit_bounds(const Ibvp& p, const DiscreteSolution& sol,
                          const std::vector<double>& report_times, int samples,
                          double relative_slack);

// ---- entropy audit -----------------------------------------------------------

struct EntropyLocation {
  int n = -1;
  int j = -1;
  double k = 0.0;
};

struct EntropyReport {
  double worst_plus = 0.0;
  EntropyLocation at_plus;
  double worst_minus = 0.0;
  EntropyLocation at_minus;
  std::vector<double> k_samples;
  int violation_count = 0;
  double tolerance = 0.0;
};

/// Equispaced k levels spanning the solution and data range with a 10%
/// margin, plus the exact boundary-data extremes.
std::vector<double> default_k_samples(const DiscreteSolution& sol, int count);

/// Residuals of the discrete entropy inequalities for both semi-entropy
/// families; positive residual above `tolerance` counts as a violation.
/// Requires the solution to have been run with keep_half = true.
EntropyReport entropy_residuals(const DiscreteSolution& sol, const Ibvp& p,
                                const std::vector<double>& k_values,
                                double tolerance = 1e-12);

// ---- boundary-condition diagnostics ------------------------------------------

struct BlnReport {
  std::vector<double> left;  // per step: worst signed violation at x=a
  std::vector<double> right; // per step: worst signed violation at x=b
  double worst_left = 0.0;
  double worst_right = 0.0;
};

/// Residuals of the boundary-trace inequalities, using the first/last cell
/// as the trace. Positive entries measure violation; they are diagnostics
/// expected to shrink as dx -> 0, not exact-zero assertions.
BlnReport bln_residuals(const DiscreteSolution& sol, const Ibvp& p, int k_grid_size);

} // namespace balans

#endif
