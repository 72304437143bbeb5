#ifndef BALANS_STABILITY_HPP
#define BALANS_STABILITY_HPP

#include <vector>

#include "balans/analysis.hpp"

namespace balans {

/// Pieces of the flux/source stability bound; the bound equals
/// exp_prefactor * (sum of the five terms).
struct StabilityComponents {
  double x_flux_term = 0.0;     // integral of sup |d_x (f2-f1)|
  double source_term = 0.0;     // integral of sup |g1-g2|
  double u_flux_tv_term = 0.0;  // integral of sup |d_u (f2-f1)| * min TV
  double boundary_a_term = 0.0; // 2 * integral of sup |(f2-f1)(s,a,.)|
  double boundary_b_term = 0.0; // 2 * integral of sup |(f2-f1)(s,b,.)|
  double exp_prefactor = 1.0;
};

struct StabilityEntry {
  double t = 0.0; // realized checkpoint time n*dt
  double measured = 0.0;
  double bound = 0.0;
  StabilityComponents components;
  double box_u1 = 0.0; // L-infinity envelopes defining the u boxes
  double box_u2 = 0.0;
  double box_union = 0.0;
};

struct StabilityReport {
  std::vector<StabilityEntry> checkpoints;
};

/// Theoretical bound on ||u1(t) - u2(t)||_L1 for two problems sharing data,
/// with all five components measured separately. Time integrals use the
/// solver's own time levels (trapezoid); u suprema are sampled over the
/// symmetric boxes built from the L-infinity envelopes of both problems.
StabilityEntry stability_bound(const Ibvp& p1, const Ibvp& p2,
                               const DiscreteSolution& sol1, const DiscreteSolution& sol2,
                               double t, int samples);

/// Solves both problems on a common grid (viscosity valid for both fluxes)
/// and evaluates measured distance and bound at each checkpoint time.
StabilityReport run_pair(const Ibvp& p1, const Ibvp& p2, int cells,
                         const std::vector<double>& checkpoints, int samples = 13);

/// Lipschitz dependence on initial and boundary data:
/// measured ||u-v||_L1 against exp(L_g t) * (||du_o||_L1 + L_f*(||du_a||_L1
/// + ||du_b||_L1)), with the data norms taken from the discrete averages.
struct DataDependenceEntry {
  double t = 0.0;
  double measured = 0.0;
  double bound = 0.0;
  double l1_u0 = 0.0, l1_ua = 0.0, l1_ub = 0.0;
  double L_f = 0.0, L_g = 0.0;
};

DataDependenceEntry data_dependence_bound(const Ibvp& p, const DiscreteData& data1,
                                          const DiscreteData& data2,
                                          const DiscreteSolution& sol1,
                                          const DiscreteSolution& sol2, double t);

/// Paired solve for two problems sharing flux/source/interval but not data.
std::vector<DataDependenceEntry> run_data_pair(const Ibvp& p1, const Ibvp& p2, int cells,
                                               const std::vector<double>& checkpoints);

} // namespace balans

#endif
