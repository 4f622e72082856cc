#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cmslab/heatpoly.hpp"
#include "cmslab/mc.hpp"
#include "cmslab/ode.hpp"
#include "cmslab/orthopoly.hpp"
#include "cmslab/sde.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#ifndef CMSLAB_GIT_HASH
#define CMSLAB_GIT_HASH "unknown"
#endif

namespace {

using json = nlohmann::ordered_json;
using namespace cmslab;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheckFailed = 3;
constexpr int kExitSolverFailed = 4;

struct CommonOpts {
  std::string family = "hermite";
  int n = 2;
  double nu = 1.0;
  double p = 0.0, q = 0.0;
  double k = std::numeric_limits<double>::infinity();
  std::optional<double> lambda;
  std::string x0;
  double t_end = 1.0;
  double dt = 1e-3;
  long paths = 100000;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool reproducible = false;
};

Family parse_family(const std::string& s) {
  if (s == "hermite") return Family::HermiteA;
  if (s == "laguerre") return Family::LaguerreB;
  if (s == "jacobi" || s == "jacobi-compact") return Family::JacobiCompact;
  if (s == "jacobi-noncompact") return Family::JacobiNoncompact;
  if (s == "torus") return Family::Torus;
  throw InvalidParams("unknown family: " + s);
}

ModelSpec make_model(const CommonOpts& o) {
  ModelSpec m;
  m.family = parse_family(o.family);
  m.n = o.n;
  m.nu = o.nu;
  m.p = o.p;
  m.q = o.q;
  m.lambda = o.lambda;
  m.inv_temp = o.k;
  m.validate();
  return m;
}

std::vector<double> parse_coords(const std::string& s, int expect_n) {
  std::vector<double> out;
  std::string token;
  std::stringstream ss(s);
  while (std::getline(ss, token, ',')) {
    size_t pos = 0;
    out.push_back(std::stod(token, &pos));
    if (pos != token.size()) throw InvalidParams("bad coordinate: " + token);
  }
  if (expect_n > 0 && static_cast<int>(out.size()) != expect_n)
    throw InvalidParams("--x0 must list exactly n coordinates");
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json check_entry(const std::string& name, double value, double tolerance, bool pass) {
  return json{{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}};
}

struct ReportWriter {
  json report;
  std::string out_dir;
  bool reproducible;
  bool all_pass = true;

  ReportWriter(const std::string& command, const CommonOpts& o)
      : out_dir(o.out_dir), reproducible(o.reproducible) {
    report["command"] = command;
    report["provenance"] = {{"git_hash", CMSLAB_GIT_HASH}, {"seed", o.seed}};
    if (!o.reproducible) report["provenance"]["timestamp"] = std::time(nullptr);
    report["checks"] = json::array();
  }

  void add_check(const std::string& name, double value, double tolerance, bool pass) {
    report["checks"].push_back(check_entry(name, value, tolerance, pass));
    all_pass = all_pass && pass;
  }

  int finish(const std::vector<std::string>& csv_lines) {
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream f(out_dir + "/report.json");
      f << report.dump(2) << "\n";
    }
    {
      std::ofstream f(out_dir + "/series.csv");
      for (const auto& line : csv_lines) f << line << "\n";
    }
    if (!all_pass) {
      std::cerr << "check failure: see " << out_dir << "/report.json\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  }
};

json identity_to_json(const IdentityReport& rep, double dt) {
  return json{{"tag", rep.tag},
              {"predicted", {rep.predicted.real(), rep.predicted.imag()}},
              {"mean", {rep.estimate.mean.real(), rep.estimate.mean.imag()}},
              {"stderr", {rep.estimate.stderr_re, rep.estimate.stderr_im}},
              {"n_paths", rep.estimate.n_paths},
              {"dt", dt},
              {"z_score", rep.z_score},
              {"z_tolerance", 3.0},
              {"reran", rep.reran},
              {"pass", rep.pass}};
}

int run_zeros(const CommonOpts& o) {
  PolyFamily pf;
  PolyParams params;
  switch (parse_family(o.family)) {
    case Family::HermiteA:
      pf = PolyFamily::Hermite;
      break;
    case Family::LaguerreB:
      pf = PolyFamily::Laguerre;
      params.alpha = o.nu - 1.0;
      break;
    case Family::JacobiCompact:
    case Family::JacobiNoncompact:
      pf = PolyFamily::Jacobi;
      params.alpha = o.q - o.n;
      params.beta = o.p - o.n;
      break;
    default:
      throw InvalidParams("zeros: family must be hermite, laguerre, or jacobi");
  }
  const ZeroSet zs = zeros(pf, o.n, params);

  ReportWriter w("zeros", o);
  w.report["inputs"] = {{"family", o.family}, {"n", o.n}, {"nu", o.nu}, {"p", o.p}, {"q", o.q}};
  w.report["results"]["zeros"] = zs.zeros;
  w.report["results"]["residual"] = zs.residual;
  w.add_check("electrostatic_residual", zs.residual, 1e-10, zs.residual < 1e-10);

  double sum = 0.0, sumsq = 0.0;
  for (double z : zs.zeros) {
    sum += z;
    sumsq += z * z;
  }
  if (pf == PolyFamily::Hermite) {
    const double target = o.n * (o.n - 1.0) / 2.0;
    w.report["results"]["sum_of_squares"] = sumsq;
    const double err = std::abs(sumsq - target) / std::max(1.0, target);
    w.add_check("sum_of_squares_identity", err, 1e-9, err < 1e-9);
  } else if (pf == PolyFamily::Laguerre) {
    const double target = o.n * (o.n + o.nu - 1.0);
    w.report["results"]["sum"] = sum;
    const double err = std::abs(sum - target) / std::max(1.0, target);
    w.add_check("sum_identity", err, 1e-9, err < 1e-9);
  }

  std::vector<std::string> csv{"index,zero"};
  for (size_t i = 0; i < zs.zeros.size(); ++i)
    csv.push_back(std::to_string(i + 1) + "," + fmt17(zs.zeros[i]));
  return w.finish(csv);
}

int run_flow(const CommonOpts& o, int samples) {
  const ModelSpec model = make_model(o);
  const ParticleState x0{0.0, parse_coords(o.x0, o.n)};

  std::vector<double> grid;
  for (int i = 1; i <= samples; ++i) grid.push_back(o.t_end * i / samples);
  SolveConfig cfg;
  cfg.t_end = o.t_end;
  const Trajectory traj = solve(model, x0, cfg, grid);

  ReportWriter w("flow", o);
  w.report["inputs"] = {{"family", o.family}, {"n", o.n},     {"nu", o.nu},
                        {"p", o.p},           {"q", o.q},     {"x0", x0.coords},
                        {"t_end", o.t_end},   {"samples", samples}};
  if (o.lambda) w.report["inputs"]["lambda"] = *o.lambda;
  w.report["results"]["final_state"] = traj.back().coords;
  w.report["results"]["steps_accepted"] = traj.stats.accepted;
  w.report["results"]["steps_rejected"] = traj.stats.rejected;

  bool chamber_ok = true;
  for (const auto& s : traj.samples) chamber_ok = chamber_ok && in_chamber(model, s.coords);
  w.add_check("chamber_membership", chamber_ok ? 0.0 : 1.0, 0.5, chamber_ok);

  // Quadratic norm law for the unconfined Hermite/Laguerre flows.
  if (!model.lambda &&
      (model.family == Family::HermiteA || model.family == Family::LaguerreB)) {
    double n0 = 0.0;
    for (double v : x0.coords) n0 += v * v;
    const double rate = (model.family == Family::HermiteA) ? o.n * (o.n - 1.0)
                                                           : 2.0 * o.n * (o.n + o.nu - 1.0);
    double worst = 0.0;
    for (const auto& s : traj.samples) {
      double nt = 0.0;
      for (double v : s.coords) nt += v * v;
      worst = std::max(worst, std::abs(nt - rate * (s.time - x0.time) - n0));
    }
    const double tol = 1e-9 * (1.0 + n0);
    w.report["results"]["norm_law_residual"] = worst;
    w.add_check("norm_law", worst, tol, worst < tol);
  }

  std::vector<std::string> csv;
  std::string header = "t";
  for (int i = 1; i <= o.n; ++i) header += ",x_" + std::to_string(i);
  csv.push_back(header);
  for (const auto& s : traj.samples) {
    std::string line = fmt17(s.time);
    for (double v : s.coords) line += "," + fmt17(v);
    csv.push_back(line);
  }
  return w.finish(csv);
}

int run_stability(const CommonOpts& o, const std::string& x0b, int samples) {
  const ModelSpec model = make_model(o);
  const ParticleState a{0.0, parse_coords(o.x0, o.n)};
  const ParticleState b{0.0, parse_coords(x0b, o.n)};

  std::vector<double> grid;
  for (int i = 0; i <= samples; ++i) grid.push_back(o.t_end * i / samples);
  SolveConfig cfg;
  const DecayReport rep = decay_rate_check(model, a, b, grid, cfg);

  ReportWriter w("stability", o);
  w.report["inputs"] = {{"family", o.family}, {"n", o.n},     {"nu", o.nu},
                        {"p", o.p},           {"q", o.q},     {"x0", a.coords},
                        {"x0b", b.coords},    {"t_end", o.t_end}};
  if (o.lambda) w.report["inputs"]["lambda"] = *o.lambda;
  w.report["results"]["fitted_rate"] = rep.fitted_rate;
  double worst_excess = 0.0;
  for (size_t i = 0; i < rep.times.size(); ++i)
    if (rep.bound[i] > 0.0)
      worst_excess = std::max(worst_excess, rep.distance[i] / rep.bound[i] - 1.0);
  w.add_check("pointwise_bound_excess", worst_excess, 1e-8, rep.pointwise_ok);

  std::vector<std::string> csv{"t,distance,bound"};
  for (size_t i = 0; i < rep.times.size(); ++i)
    csv.push_back(fmt17(rep.times[i]) + "," + fmt17(rep.distance[i]) + "," + fmt17(rep.bound[i]));
  return w.finish(csv);
}

int run_heat_check(const CommonOpts& o, int samples) {
  const ModelSpec model = make_model(o);
  const ParticleState x0{0.0, parse_coords(o.x0, o.n)};
  if (!strictly_interior(model, x0.coords))
    throw InvalidParams("heat-check: start must be strictly interior");

  // Dense uniform grid for the finite-difference residual.
  std::vector<double> grid;
  const double fd_dt = 1e-4;
  for (int i = 0; i <= samples; ++i) {
    const double tc = 0.1 + (o.t_end - 0.1) * i / samples;
    grid.push_back(tc - fd_dt);
    grid.push_back(tc);
    grid.push_back(tc + fd_dt);
  }
  std::sort(grid.begin(), grid.end());
  SolveConfig cfg;
  cfg.t_end = grid.back();
  const Trajectory traj = solve(model, x0, cfg, grid);

  double residual = 0.0;
  for (size_t i = 1; i + 2 < traj.samples.size(); i += 3) {
    Trajectory triple{traj.model,
                      {traj.samples[i], traj.samples[i + 1], traj.samples[i + 2]},
                      traj.config,
                      traj.stats};
    residual = std::max(residual, pde_residual(triple));
  }

  // Exact linear coefficient flow against the particle integrator.
  const PolyRep p0 = poly_from_roots(model, x0.coords);
  const PolyRep pt = coefficient_flow(model, p0, o.t_end);
  const std::vector<double> poly_roots = roots_from_poly(pt);
  SolveConfig cfg2;
  cfg2.t_end = o.t_end;
  const Trajectory direct = solve(model, x0, cfg2);
  double mismatch = 0.0;
  for (int i = 0; i < o.n; ++i)
    mismatch = std::max(mismatch, std::abs(poly_roots[i] - direct.back().coords[i]));

  ReportWriter w("heat-check", o);
  w.report["inputs"] = {{"family", o.family}, {"n", o.n}, {"nu", o.nu},
                        {"p", o.p},           {"q", o.q}, {"x0", x0.coords},
                        {"t_end", o.t_end}};
  w.report["results"]["pde_residual"] = residual;
  w.report["results"]["coefficient_flow_roots"] = poly_roots;
  w.report["results"]["ode_roots"] = direct.back().coords;
  w.add_check("pde_residual", residual, 1e-6, residual < 1e-6);
  w.add_check("oracle_root_mismatch", mismatch, 1e-7, mismatch < 1e-7);

  std::vector<std::string> csv{"t,pde_residual"};
  csv.push_back(fmt17(o.t_end) + "," + fmt17(residual));
  return w.finish(csv);
}

int run_sde(const CommonOpts& o, int samples) {
  const ModelSpec model = make_model(o);
  const ParticleState x0{0.0, parse_coords(o.x0, o.n)};

  std::vector<double> grid;
  for (int i = 0; i <= samples; ++i) grid.push_back(o.t_end * i / samples);
  SdeConfig cfg{o.dt, o.t_end, BoundaryPolicy::ReflectOrder};
  const auto path = simulate(model, x0, cfg, RngStream{o.seed, 0}, grid);

  ReportWriter w("sde", o);
  w.report["inputs"] = {{"family", o.family}, {"n", o.n},     {"nu", o.nu},
                        {"p", o.p},           {"q", o.q},     {"k", o.k},
                        {"x0", x0.coords},    {"t_end", o.t_end}, {"dt", o.dt}};
  w.report["results"]["final_state"] = path.back().coords;
  bool chamber_ok = true;
  for (const auto& s : path) chamber_ok = chamber_ok && in_chamber(model, s.coords);
  w.add_check("chamber_membership", chamber_ok ? 0.0 : 1.0, 0.5, chamber_ok);

  std::vector<std::string> csv;
  std::string header = "t";
  for (int i = 1; i <= o.n; ++i) header += ",x_" + std::to_string(i);
  csv.push_back(header);
  for (const auto& s : path) {
    std::string line = fmt17(s.time);
    for (double v : s.coords) line += "," + fmt17(v);
    csv.push_back(line);
  }
  return w.finish(csv);
}

int run_expect(const CommonOpts& o, const std::string& identity, double y0, int l) {
  const ModelSpec model = make_model(o);
  const ParticleState x0{0.0, parse_coords(o.x0, o.n)};

  ReportWriter w("expect", o);
  w.report["inputs"] = {{"family", o.family}, {"n", o.n},       {"nu", o.nu},
                        {"p", o.p},           {"q", o.q},       {"k", o.k},
                        {"x0", x0.coords},    {"t", o.t_end},   {"dt", o.dt},
                        {"paths", o.paths},   {"identity", identity}, {"y0", y0}};

  std::vector<std::string> csv{"tag,predicted_re,predicted_im,mean_re,mean_im,z_score,pass"};
  auto record = [&](const IdentityReport& rep) {
    w.report["results"]["identities"].push_back(identity_to_json(rep, o.dt));
    w.add_check(rep.tag + "_z", rep.z_score, 3.0, rep.pass);
    csv.push_back(rep.tag + "," + fmt17(rep.predicted.real()) + "," +
                  fmt17(rep.predicted.imag()) + "," + fmt17(rep.estimate.mean.real()) + "," +
                  fmt17(rep.estimate.mean.imag()) + "," + fmt17(rep.z_score) + "," +
                  (rep.pass ? "1" : "0"));
  };

  if (identity == "char-poly") {
    record(char_poly_expectation(model, x0, y0, o.t_end, o.paths, o.dt, o.seed));
  } else if (identity == "esym") {
    const std::vector<double> grid{o.k};
    for (const auto& rep :
         symmetric_fn_invariance(model, x0, o.t_end, l, grid, o.paths, o.dt, o.seed))
      record(rep);
  } else {
    throw InvalidParams("unknown identity (use char-poly or esym): " + identity);
  }
  return w.finish(csv);
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("CMS_LAB_THREADS")) {
#ifdef _OPENMP
    const int t = std::atoi(threads);
    if (t > 0) omp_set_num_threads(t);
#endif
  }

  CLI::App app{"Numerical laboratory for frozen Calogero-Moser-Sutherland particle models"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string x0b;
  std::string identity = "char-poly";
  double y0 = 0.0;
  int l = 1;
  int samples = 100;

  auto add_common = [&](CLI::App* cmd, bool wants_lambda = false) {
    cmd->add_option("--family", o.family, "hermite|laguerre|jacobi|jacobi-noncompact|torus");
    cmd->add_option("--n", o.n, "particle count");
    cmd->add_option("--nu", o.nu, "Laguerre parameter");
    cmd->add_option("--p", o.p, "Jacobi parameter p");
    cmd->add_option("--q", o.q, "Jacobi parameter q");
    cmd->add_option("--k", o.k, "inverse temperature (omit for the frozen flow)");
    cmd->add_option("--x0", o.x0, "comma-separated start coordinates");
    cmd->add_option("--t-end", o.t_end, "time horizon");
    cmd->add_option("--dt", o.dt, "SDE step size");
    cmd->add_option("--paths", o.paths, "Monte Carlo path count");
    cmd->add_option("--seed", o.seed, "root seed");
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_flag("--reproducible", o.reproducible, "omit timestamps from the report");
    cmd->add_option("--samples", samples, "output sample count");
    if (wants_lambda)
      cmd->add_option("--lambda", [&](const std::vector<std::string>& vals) {
        o.lambda = std::stod(vals[0]);
        return true;
      }, "confinement rate (Hermite/Laguerre)");
  };

  CLI::App* zeros_cmd = app.add_subcommand("zeros", "classical polynomial zeros with certification");
  add_common(zeros_cmd);
  CLI::App* flow_cmd = app.add_subcommand("flow", "integrate the deterministic particle flow");
  add_common(flow_cmd, true);
  CLI::App* stab_cmd = app.add_subcommand("stability", "paired-flow contraction bound check");
  add_common(stab_cmd, true);
  stab_cmd->add_option("--x0b", x0b, "second start (comma-separated)");
  CLI::App* heat_cmd = app.add_subcommand("heat-check", "coefficient-flow oracle and residuals");
  add_common(heat_cmd);
  CLI::App* sde_cmd = app.add_subcommand("sde", "simulate one diffusion path");
  add_common(sde_cmd);
  CLI::App* expect_cmd = app.add_subcommand("expect", "Monte Carlo expectation identities");
  add_common(expect_cmd);
  expect_cmd->add_option("--identity", identity, "char-poly|esym");
  expect_cmd->add_option("--y0", y0, "companion start");
  expect_cmd->add_option("--l", l, "elementary symmetric index (esym)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return (e.get_exit_code() == 0) ? kExitOk : kExitConfig;
  }

  try {
    if (zeros_cmd->parsed()) return run_zeros(o);
    if (flow_cmd->parsed()) return run_flow(o, samples);
    if (stab_cmd->parsed()) return run_stability(o, x0b, samples);
    if (heat_cmd->parsed()) return run_heat_check(o, samples);
    if (sde_cmd->parsed()) return run_sde(o, samples);
    if (expect_cmd->parsed()) return run_expect(o, identity, y0, l);
  } catch (const InvalidParams& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolverFailed;
  }
  return kExitConfig;
}
