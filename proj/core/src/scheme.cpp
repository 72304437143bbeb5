#include "balans/scheme.hpp"

#include <cmath>

namespace balans {

double numerical_flux(const Expr& flux, double t, double x_iface, double u_left,
                      double u_right, double alpha) {
  if (!(alpha > 0.0)) throw InvariantError("numerical_flux needs alpha > 0");
  return 0.5 * (flux.value(t, x_iface, u_left) + flux.value(t, x_iface, u_right)) -
         0.5 * alpha * (u_right - u_left);
}

namespace {

// Stencil value with ghosts: index -1 is ua_n, index N is ub_n.
inline double stencil(std::span<const double> row, int j, double ua_n, double ub_n) {
  if (j < 0) return ua_n;
  if (j >= static_cast<int>(row.size())) return ub_n;
  return row[j];
}

} // namespace

std::vector<double> convection_step(std::span<const double> row, double ua_n,
                                    double ub_n, double tn, const Grid& grid,
                                    const Expr& flux) {
  const int N = grid.cells;
  std::vector<double> iface(N + 1);
  for (int i = 0; i <= N; ++i) {
    double ul = stencil(row, i - 1, ua_n, ub_n);
    double ur = stencil(row, i, ua_n, ub_n);
    iface[i] = numerical_flux(flux, tn, grid.x_iface(i), ul, ur, grid.alpha);
  }
  std::vector<double> out(N);
  for (int j = 0; j < N; ++j)
    out[j] = row[j] - grid.lambda * (iface[j + 1] - iface[j]);
  return out;
}

std::vector<double> source_step(std::span<const double> half_row, double tn,
                                const Grid& grid, const Expr& source) {
  std::vector<double> out(half_row.begin(), half_row.end());
  for (int j = 0; j < grid.cells; ++j)
    out[j] = half_row[j] + source.value(tn, grid.x_center(j), half_row[j]) * grid.dt;
  return out;
}

DiscreteSolution run(const Ibvp& p, const Grid& grid, const DiscreteData& data,
                     bool keep_half) {
  if (static_cast<int>(data.u0.size()) != grid.cells)
    throw MismatchError("discrete data does not match the grid");
  DiscreteSolution sol;
  sol.grid = grid;
  sol.steps = grid.steps;
  sol.cells.assign(static_cast<std::size_t>(grid.steps + 1) * grid.cells, 0.0);
  if (keep_half) sol.half.assign(static_cast<std::size_t>(grid.steps) * grid.cells, 0.0);
  sol.ua.resize(grid.steps + 1);
  sol.ub.resize(grid.steps + 1);
  for (int n = 0; n <= grid.steps; ++n) {
    sol.ua[n] = p.bc_left.value(grid.time(n), 0.0, 0.0);
    sol.ub[n] = p.bc_right.value(grid.time(n), 0.0, 0.0);
  }

  std::copy(data.u0.begin(), data.u0.end(), sol.cells.begin());
  for (int j = 0; j < grid.cells; ++j)
    if (!std::isfinite(sol.cells[j])) throw BlowupError(0, j);

  std::vector<double> current(data.u0);
  for (int n = 0; n < grid.steps; ++n) {
    double tn = grid.time(n);
    std::vector<double> half = convection_step(current, sol.ua[n], sol.ub[n], tn, grid, p.flux);
    std::vector<double> next = source_step(half, tn, grid, p.source);
    for (int j = 0; j < grid.cells; ++j)
      if (!std::isfinite(next[j])) throw BlowupError(n + 1, j);
    if (keep_half)
      std::copy(half.begin(), half.end(),
                sol.half.begin() + static_cast<std::size_t>(n) * grid.cells);
    std::copy(next.begin(), next.end(),
              sol.cells.begin() + static_cast<std::size_t>(n + 1) * grid.cells);
    current.swap(next);
  }
  return sol;
}

IncrementCoefficients monotone_coefficients(std::span<const double> row, double ua_n,
                                            double ub_n, double tn, const Grid& grid,
                                            const Expr& flux) {
  const int N = grid.cells;
  IncrementCoefficients c;
  c.beta.resize(N);
  c.gamma.resize(N);
  c.delta.resize(N);
  auto F = [&](int iface, double ul, double ur) {
    return numerical_flux(flux, tn, grid.x_iface(iface), ul, ur, grid.alpha);
  };
  for (int j = 0; j < N; ++j) {
    double um = stencil(row, j - 1, ua_n, ub_n);
    double uc = row[j];
    double up = stencil(row, j + 1, ua_n, ub_n);
    if (uc != um) {
      c.beta[j] = grid.lambda * (F(j, uc, uc) - F(j, um, uc)) / (uc - um);
      c.delta[j] = grid.lambda * (F(j + 1, uc, uc) - F(j + 1, um, uc)) / (uc - um);
    }
    if (up != uc)
      c.gamma[j] = -grid.lambda * (F(j + 1, uc, up) - F(j + 1, uc, uc)) / (up - uc);
  }
  return c;
}

} // namespace balans
