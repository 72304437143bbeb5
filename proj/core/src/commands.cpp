#include "balans/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <ostream>

#include "balans/config.hpp"
#include "balans/report_io.hpp"
#include "balans/stability.hpp"

namespace balans {

namespace {

constexpr double kEnvelopeSlack = 1e-9;
constexpr int kSupSamples = 13;

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

int snapshot_row(const Grid& g, double t) {
  int n = static_cast<int>(std::lround(t / g.dt));
  return std::clamp(n, 0, g.steps);
}

void write_grid_json(JsonWriter& w, const Grid& g) {
  w.begin_object();
  w.key("N").value(g.cells);
  w.key("dx").value(g.dx);
  w.key("dt").value(g.dt);
  w.key("lambda").value(g.lambda);
  w.key("alpha").value(g.alpha);
  w.key("steps").value(g.steps);
  w.key("covered_horizon").value(g.covered_horizon());
  w.end_object();
}

void write_problem_json(JsonWriter& w, const Ibvp& p) {
  w.begin_object();
  w.key("name").value(p.name);
  w.key("f").value(p.flux.source());
  w.key("g").value(p.source.source());
  w.key("u_o").value(p.initial.source());
  w.key("u_a").value(p.bc_left.source());
  w.key("u_b").value(p.bc_right.source());
  w.key("a").value(p.a);
  w.key("b").value(p.b);
  w.key("T").value(p.horizon);
  w.end_object();
}

struct LoadedRun {
  RunConfig cfg;
  Ibvp problem;
  Grid grid;
  DiscreteData data;
};

LoadedRun load_run(const std::string& config_path) {
  LoadedRun r;
  r.cfg = load_config(config_path);
  r.problem = problem_from_config(r.cfg);
  r.grid = grid_from_config(r.problem, r.cfg);
  r.data = discretize(r.problem, r.grid, r.cfg.quad_points);
  return r;
}

std::vector<double> default_checkpoints(double horizon) {
  return {0.25 * horizon, 0.5 * horizon, horizon};
}

int guard(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MismatchError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BlowupError& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const EvalError& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const IoError& e) {
    err << "filesystem error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

void print_warnings(const Ibvp& p, std::ostream& err) {
  for (const auto& w : p.warnings) err << "warning: " << w << "\n";
}

} // namespace

std::string resolve_out_dir(const std::string& configured) {
  const char* env = std::getenv("BALANS_OUT");
  if (env && *env) return env;
  return configured;
}

int cmd_solve(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guard(err, [&]() {
    LoadedRun r = load_run(config_path);
    print_warnings(r.problem, err);
    DiscreteSolution sol = run(r.problem, r.grid, r.data, false);
    std::string dir = resolve_out_dir(r.cfg.out_dir);
    ensure_directory(dir);

    std::vector<std::string> written;
    for (double t : r.cfg.snapshot_times) {
      int n = snapshot_row(r.grid, t);
      std::string csv = "x,u\n";
      auto row = sol.row(n);
      for (int j = 0; j < r.grid.cells; ++j)
        csv += format_double(r.grid.x_center(j)) + "," + format_double(row[j]) + "\n";
      std::string name = "snapshot_" + format_double(t) + ".csv";
      write_file(join_path(dir, name), csv);
      written.push_back(name);
    }
    if (r.cfg.dump) {
      std::string csv = "n,t,j,x,u\n";
      for (int n = 0; n <= sol.steps; ++n) {
        auto row = sol.row(n);
        for (int j = 0; j < r.grid.cells; ++j) {
          csv += std::to_string(n) + "," + format_double(r.grid.time(n)) + "," +
                 std::to_string(j + 1) + "," + format_double(r.grid.x_center(j)) + "," +
                 format_double(row[j]) + "\n";
        }
      }
      write_file(join_path(dir, "dump.csv"), csv);
      written.push_back("dump.csv");
    }

    JsonWriter w;
    w.begin_object();
    w.key("problem");
    write_problem_json(w, r.problem);
    w.key("grid");
    write_grid_json(w, r.grid);
    w.key("outputs").begin_array();
    for (const auto& name : written) w.value(name);
    w.end_array();
    w.end_object();
    write_file(join_path(dir, "manifest.json"), w.str() + "\n");

    out << "solved " << r.problem.name << ": N=" << r.grid.cells << ", steps=" << sol.steps
        << ", covered horizon " << format_double(r.grid.covered_horizon()) << "\n";
    return kExitOk;
  });
}

int cmd_audit(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guard(err, [&]() {
    LoadedRun r = load_run(config_path);
    print_warnings(r.problem, err);
    DiscreteSolution sol = run(r.problem, r.grid, r.data, r.cfg.audit_entropy_on);
    std::string dir = resolve_out_dir(r.cfg.out_dir);
    ensure_directory(dir);

    std::vector<double> report_times = r.cfg.snapshot_times;
    if (report_times.empty()) report_times = default_checkpoints(r.grid.covered_horizon());

    int violations = 0;
    JsonWriter w;
    w.begin_object();
    w.key("problem");
    write_problem_json(w, r.problem);
    w.key("grid");
    write_grid_json(w, r.grid);

    if (r.cfg.audit_bounds_on) {
      BoundsReport bounds = audit_bounds(r.problem, sol, report_times, kSupSamples,
                                         kEnvelopeSlack);
      violations += static_cast<int>(bounds.violations.size());
      if (!bounds.alpha_ok) ++violations;
      w.key("checkpoints").begin_array();
      for (const auto& c : bounds.checkpoints) {
        w.begin_object();
        w.key("t").value(c.t);
        w.key("observed_linf").value(c.observed_linf);
        w.key("bound_U").value(c.bound_U);
        w.key("observed_tv").value(c.observed_tv);
        w.key("bound_Cx").value(c.bound_Cx);
        w.key("observed_time_lipschitz").value(c.observed_time_lipschitz);
        w.key("bound_Ct_plus_g").value(c.bound_Ct_plus_g);
        w.key("observed_bv_spacetime").value(c.observed_bv_spacetime);
        w.key("bound_Cxt").value(c.bound_Cxt);
        w.key("C1").value(c.C1);
        w.key("C2").value(c.C2);
        w.key("K1").value(c.K1);
        w.key("K2").value(c.K2);
        w.key("L_f").value(c.L_f);
        w.key("L_g").value(c.L_g);
        w.key("u_box").begin_array().value(-c.u_box).value(c.u_box).end_array();
        w.end_object();
      }
      w.end_array();
      w.key("bound_violations").begin_array();
      for (const auto& v : bounds.violations) {
        w.begin_object();
        w.key("kind").value(v.kind);
        w.key("n").value(v.n);
        w.key("observed").value(v.observed);
        w.key("bound").value(v.bound);
        w.end_object();
      }
      w.end_array();
      w.key("cfl").begin_object();
      w.key("alpha").value(bounds.alpha);
      w.key("observed_u_range")
          .begin_array()
          .value(bounds.observed_u_min)
          .value(bounds.observed_u_max)
          .end_array();
      w.key("alpha_floor_observed").value(bounds.alpha_floor_observed);
      w.key("ok").value(bounds.alpha_ok);
      w.end_object();
      w.key("envelope_slack").value(bounds.relative_slack);
      w.key("data_tv").begin_object();
      w.key("u_o_discrete").value(bounds.tv_u0_discrete);
      w.key("u_o_sampled").value(bounds.tv_uo_sampled);
      w.key("u_a_discrete").value(bounds.tv_ua_discrete);
      w.key("u_a_sampled").value(bounds.tv_ua_sampled);
      w.key("u_b_discrete").value(bounds.tv_ub_discrete);
      w.key("u_b_sampled").value(bounds.tv_ub_sampled);
      w.end_object();
    }

    if (r.cfg.audit_entropy_on) {
      EntropyReport ent = entropy_residuals(sol, r.problem,
                                            default_k_samples(sol, r.cfg.k_count));
      violations += ent.violation_count;
      w.key("entropy").begin_object();
      w.key("worst_plus").value(ent.worst_plus);
      w.key("at_plus").begin_object();
      w.key("n").value(ent.at_plus.n);
      w.key("j").value(ent.at_plus.j + 1);
      w.key("k").value(ent.at_plus.k);
      w.end_object();
      w.key("worst_minus").value(ent.worst_minus);
      w.key("at_minus").begin_object();
      w.key("n").value(ent.at_minus.n);
      w.key("j").value(ent.at_minus.j + 1);
      w.key("k").value(ent.at_minus.k);
      w.end_object();
      w.key("violations").value(ent.violation_count);
      w.key("tolerance").value(ent.tolerance);
      w.key("k_samples").value(ent.k_samples);
      w.end_object();
    }

    if (r.cfg.audit_bln_on) {
      BlnReport bln = bln_residuals(sol, r.problem, 33);
      w.key("bln").begin_object();
      w.key("worst_left").value(bln.worst_left);
      w.key("worst_right").value(bln.worst_right);
      w.key("per_n").begin_object();
      w.key("left").value(bln.left);
      w.key("right").value(bln.right);
      w.end_object();
      w.end_object();
    }

    w.end_object();
    write_file(join_path(dir, "audit_report.json"), w.str() + "\n");

    out << "audited " << r.problem.name << ": " << violations << " violation(s)\n";
    return violations == 0 ? kExitOk : kExitViolation;
  });
}

int cmd_convergence(const std::string& config_path, const std::vector<int>& cell_counts,
                    std::ostream& out, std::ostream& err) {
  return guard(err, [&]() {
    if (cell_counts.size() < 2)
      throw ConfigError("convergence needs at least two cell counts");
    for (std::size_t i = 0; i + 1 < cell_counts.size(); ++i) {
      if (cell_counts[i + 1] <= cell_counts[i] ||
          cell_counts[i + 1] % cell_counts[i] != 0)
        throw ConfigError("cell counts must be strictly increasing and nested");
    }
    RunConfig cfg = load_config(config_path);
    Ibvp p = problem_from_config(cfg);

    std::vector<DiscreteSolution> sols;
    for (int n_cells : cell_counts) {
      Grid g = build_grid(p, n_cells, cfg.alpha, cfg.cfl_fraction, cfg.allow_unsafe_cfl);
      sols.push_back(run(p, g, discretize(p, g, cfg.quad_points), false));
    }
    double t_cmp = sols.front().grid.covered_horizon();
    for (const auto& s : sols) t_cmp = std::min(t_cmp, s.grid.covered_horizon());

    std::string csv = "N_coarse,N_fine,t,l1_error,order\n";
    double prev_error = 0.0;
    std::vector<double> errors;
    for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
      double e = l1_cross_distance(sols[i], sols[i + 1], t_cmp);
      errors.push_back(e);
      csv += std::to_string(cell_counts[i]) + "," + std::to_string(cell_counts[i + 1]) + "," +
             format_double(t_cmp) + "," + format_double(e) + ",";
      if (i > 0 && e > 0.0 && prev_error > 0.0)
        csv += format_double(std::log2(prev_error / e));
      csv += "\n";
      prev_error = e;
    }
    std::string dir = resolve_out_dir(cfg.out_dir);
    ensure_directory(dir);
    write_file(join_path(dir, "convergence.csv"), csv);

    out << "convergence over " << cell_counts.size() << " grids at t=" << format_double(t_cmp)
        << ":";
    for (double e : errors) out << " " << format_double(e);
    out << "\n";
    return kExitOk;
  });
}

namespace {

void write_pair_csv(const std::string& path, const std::vector<double>& ts,
                    const std::vector<double>& measured, const std::vector<double>& bound) {
  std::string csv = "t,measured,bound\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    csv += format_double(ts[i]) + "," + format_double(measured[i]) + "," +
           format_double(bound[i]) + "\n";
  write_file(path, csv);
}

} // namespace

int cmd_stability(const std::string& config_path1, const std::string& config_path2,
                  std::ostream& out, std::ostream& err) {
  return guard(err, [&]() {
    RunConfig cfg1 = load_config(config_path1);
    RunConfig cfg2 = load_config(config_path2);
    Ibvp p1 = problem_from_config(cfg1);
    Ibvp p2 = problem_from_config(cfg2);
    std::vector<double> checkpoints = cfg1.snapshot_times;
    if (checkpoints.empty()) checkpoints = default_checkpoints(p1.horizon);
    StabilityReport report = run_pair(p1, p2, cfg1.N, checkpoints);

    JsonWriter w;
    w.begin_object();
    w.key("problem_1");
    write_problem_json(w, p1);
    w.key("problem_2");
    write_problem_json(w, p2);
    w.key("checkpoints").begin_array();
    bool dominated = true;
    std::vector<double> ts, ms, bs;
    for (const auto& c : report.checkpoints) {
      dominated = dominated && c.measured <= c.bound;
      ts.push_back(c.t);
      ms.push_back(c.measured);
      bs.push_back(c.bound);
      w.begin_object();
      w.key("t").value(c.t);
      w.key("measured").value(c.measured);
      w.key("bound").value(c.bound);
      w.key("components").begin_object();
      w.key("x_flux_term").value(c.components.x_flux_term);
      w.key("source_term").value(c.components.source_term);
      w.key("u_flux_tv_term").value(c.components.u_flux_tv_term);
      w.key("boundary_a_term").value(c.components.boundary_a_term);
      w.key("boundary_b_term").value(c.components.boundary_b_term);
      w.key("exp_prefactor").value(c.components.exp_prefactor);
      w.end_object();
      w.end_object();
    }
    w.end_array();
    if (!report.checkpoints.empty()) {
      const auto& last = report.checkpoints.back();
      w.key("boxes").begin_object();
      w.key("U1").value(last.box_u1);
      w.key("U2").value(last.box_u2);
      w.key("U").value(last.box_union);
      w.end_object();
    }
    w.end_object();

    std::string dir = resolve_out_dir(cfg1.out_dir);
    ensure_directory(dir);
    write_file(join_path(dir, "stability.json"), w.str() + "\n");
    write_pair_csv(join_path(dir, "stability.csv"), ts, ms, bs);

    out << "stability: " << (dominated ? "measured <= bound at all checkpoints"
                                       : "bound violated")
        << "\n";
    return dominated ? kExitOk : kExitViolation;
  });
}

int cmd_data_dependence(const std::string& config_path, const std::string& perturbed_path,
                        std::ostream& out, std::ostream& err) {
  return guard(err, [&]() {
    RunConfig cfg1 = load_config(config_path);
    RunConfig cfg2 = load_config(perturbed_path);
    Ibvp p1 = problem_from_config(cfg1);
    Ibvp p2 = problem_from_config(cfg2);
    std::vector<double> checkpoints = cfg1.snapshot_times;
    if (checkpoints.empty()) checkpoints = default_checkpoints(p1.horizon);
    std::vector<DataDependenceEntry> entries = run_data_pair(p1, p2, cfg1.N, checkpoints);

    JsonWriter w;
    w.begin_object();
    w.key("problem");
    write_problem_json(w, p1);
    w.key("perturbed_data").begin_object();
    w.key("u_o").value(p2.initial.source());
    w.key("u_a").value(p2.bc_left.source());
    w.key("u_b").value(p2.bc_right.source());
    w.end_object();
    w.key("checkpoints").begin_array();
    bool dominated = true;
    std::vector<double> ts, ms, bs;
    for (const auto& c : entries) {
      dominated = dominated && c.measured <= c.bound;
      ts.push_back(c.t);
      ms.push_back(c.measured);
      bs.push_back(c.bound);
      w.begin_object();
      w.key("t").value(c.t);
      w.key("measured").value(c.measured);
      w.key("bound").value(c.bound);
      w.key("l1_u0").value(c.l1_u0);
      w.key("l1_ua").value(c.l1_ua);
      w.key("l1_ub").value(c.l1_ub);
      w.key("L_f").value(c.L_f);
      w.key("L_g").value(c.L_g);
      w.end_object();
    }
    w.end_array();
    w.end_object();

    std::string dir = resolve_out_dir(cfg1.out_dir);
    ensure_directory(dir);
    write_file(join_path(dir, "data_dependence.json"), w.str() + "\n");
    write_pair_csv(join_path(dir, "data_dependence.csv"), ts, ms, bs);

    out << "data dependence: " << (dominated ? "measured <= bound at all checkpoints"
                                             : "bound violated")
        << "\n";
    return dominated ? kExitOk : kExitViolation;
  });
}

} // namespace balans
