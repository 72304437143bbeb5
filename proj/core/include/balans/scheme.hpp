#ifndef BALANS_SCHEME_HPP
#define BALANS_SCHEME_HPP

#include <span>
#include <vector>

#include "balans/problem.hpp"

namespace balans {

/// Piecewise-constant approximate solution: cell values u_j^n for
/// n = 0..steps and j = 0..cells-1, plus the boundary sequences used as
/// ghost values (u_0^n on the left, u_{cells}^n on the right) and,
/// optionally, the convection half-step rows needed by the entropy audit.
///
/// The boundary sequences hold the boundary data sampled at the step times
/// t^n (one extra entry at t^{steps} so final-time totals are defined).
struct DiscreteSolution {
  Grid grid;
  int steps = 0;
  std::vector<double> cells; // (steps+1) * grid.cells, row-major
  std::vector<double> half;  // steps * grid.cells when kept, else empty
  std::vector<double> ua;    // steps+1 entries
  std::vector<double> ub;    // steps+1 entries

  std::span<const double> row(int n) const {
    return {cells.data() + static_cast<std::size_t>(n) * grid.cells,
            static_cast<std::size_t>(grid.cells)};
  }
  std::span<const double> half_row(int n) const {
    return {half.data() + static_cast<std::size_t>(n) * grid.cells,
            static_cast<std::size_t>(grid.cells)};
  }
  bool has_half() const { return !half.empty(); }
  double at(int n, int j) const {
    return cells[static_cast<std::size_t>(n) * grid.cells + j];
  }
};

/// Lax-Friedrichs type flux at one interface:
///   (f(t,x,ul) + f(t,x,ur))/2 - alpha*(ur - ul)/2.
double numerical_flux(const Expr& flux, double t, double x_iface, double u_left,
                      double u_right, double alpha);

/// One convection half-step: u_j - lambda*(F_{j+1/2} - F_{j-1/2}) with ghost
/// values ua_n, ub_n. Interface fluxes are accumulated left to right so runs
/// are bitwise reproducible.
std::vector<double> convection_step(std::span<const double> row, double ua_n,
                                    double ub_n, double tn, const Grid& grid,
                                    const Expr& flux);

/// Explicit Euler source update evaluated at (tn, x_j, half value).
std::vector<double> source_step(std::span<const double> half_row, double tn,
                                const Grid& grid, const Expr& source);

/// Full time loop. Boundary ghost values are the data sampled at t^n.
/// Throws BlowupError with the (step, cell) location if a non-finite value
/// appears. Deterministic: identical inputs give bitwise-identical output.
DiscreteSolution run(const Ibvp& p, const Grid& grid, const DiscreteData& data,
                     bool keep_half);

/// Incremental coefficients of the update rewritten as a convex combination;
/// the scheme is monotone exactly when all of them lie in [0, 1/3] under the
/// CFL condition. Divided differences use the 0 convention on equal states.
struct IncrementCoefficients {
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> delta;
};

IncrementCoefficients monotone_coefficients(std::span<const double> row, double ua_n,
                                            double ub_n, double tn, const Grid& grid,
                                            const Expr& flux);

} // namespace balans

#endif
