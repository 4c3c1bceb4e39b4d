#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "biofilm/bvp.hpp"
#include "biofilm/errors.hpp"
#include "biofilm/evolution.hpp"
#include "biofilm/model.hpp"
#include "biofilm/quasisteady.hpp"
#include "biofilm/shooting.hpp"
#include "biofilm/verify.hpp"

namespace biofilm::cli {

enum ExitCode : int {
  Ok = 0,
  ConfigError = 1,
  SolverFailure = 2, ///< also returned when a requested check fails
  NoEquilibrium = 3,
};

// ---------------------------------------------------------------------------------------
// spec strings

inline double parse_number(const std::string &text, const std::string &what) {
  double x = 0.0;
  const char *first = text.data(), *last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(x))
    throw InvalidInput(what + ": '" + text + "' is not a finite number");
  return x;
}

inline std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// "s/v,s/v,..." into two columns.
inline void parse_table(const std::string &body, const std::string &what, std::vector<double> &xs,
                        std::vector<double> &ys) {
  for (const auto &row : split(body, ',')) {
    const auto xy = split(row, '/');
    if (xy.size() != 2) throw InvalidInput(what + ": table rows must be s/value, got '" + row + "'");
    xs.push_back(parse_number(xy[0], what));
    ys.push_back(parse_number(xy[1], what));
  }
}

/// tanh:rho | monod:rmax:K | linear:lambda | table:s/r,...
inline RateModel parse_rate(const std::string &spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const std::string what = "rate '" + spec + "'";
  if (kind == "table") {
    std::vector<double> s, r;
    parse_table(body, what, s, r);
    return RateModel::tabulated(std::move(s), std::move(r));
  }
  const auto args = split(body, ':');
  auto arg = [&](std::size_t i) { return parse_number(args.at(i), what); };
  if (kind == "tanh" && args.size() == 1) return RateModel::tanh(arg(0));
  if (kind == "monod" && args.size() == 2) return RateModel::monod(arg(0), arg(1));
  if (kind == "linear" && args.size() == 1) return RateModel::linear(arg(0));
  throw InvalidInput(what + ": expected tanh:rho, monod:rmax:K, linear:lambda or table:s/r,...");
}

/// affine:alpha:b | const:g | table:s/g,...
inline GrowthModel parse_growth(const std::string &spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const std::string what = "growth '" + spec + "'";
  if (kind == "table") {
    std::vector<double> s, g;
    parse_table(body, what, s, g);
    return GrowthModel::tabulated(std::move(s), std::move(g));
  }
  const auto args = split(body, ':');
  auto arg = [&](std::size_t i) { return parse_number(args.at(i), what); };
  if (kind == "affine" && args.size() == 2) return GrowthModel::affine(arg(0), arg(1));
  if (kind == "const" && args.size() == 1) return GrowthModel::constant(arg(0));
  throw InvalidInput(what + ": expected affine:alpha:b, const:g or table:s/g,...");
}

// ---------------------------------------------------------------------------------------
// configuration

struct RunConfig {
  PhysicalParams params;
  std::string rate = "tanh:2";
  std::string growth = "affine:1:0.5";

  double h = 1.0;              ///< bvp height
  double h0 = 3.5;             ///< initial height (evolve, quasisteady)
  std::string v0 = "cos2";     ///< cos2 | ramp | const:V | file:PATH, as u0 profiles

  int n = 0;                   ///< cells; 0 selects the command default
  double rtol = 1e-8;
  double dt = 1e-3;
  double cfl = 0.5;
  double reaction_cap = 0.5;
  std::string scheme = "imex-euler";
  double t_end = 60.0;

  std::string out_dir = ".";
  std::string tag;             ///< file prefix; empty selects the command name
  double output_interval = 0.01;
  bool profiles = false;
  int profile_stride = 10;     ///< every k-th stored state goes to the snapshot file

  std::string sweep_param = "b";
  std::vector<double> sweep_values;
  std::string sweep_task = "equilibrium";
  int jobs = 1;

  Model model() const {
    Model m;
    m.params = params;
    m.rate = parse_rate(rate);
    m.growth = parse_growth(growth);
    m.params.check();
    return m;
  }

  TimeScheme time_scheme() const {
    if (scheme == "imex-euler") return TimeScheme::ImexEuler;
    if (scheme == "cn-ab2") return TimeScheme::CrankNicolsonAB2;
    throw InvalidInput("scheme: expected imex-euler or cn-ab2, got '" + scheme + "'");
  }

  /// Flat TOML, one key per line, floats with 17 significant digits.
  std::string to_toml() const {
    std::ostringstream os;
    auto num = [&](const char *k, double v) { os << k << " = " << detail::format_number(v) << "\n"; };
    auto str = [&](const char *k, const std::string &v) { os << k << " = \"" << v << "\"\n"; };
    num("kappa", params.kappa);
    num("kappa_L", params.kappa_L);
    num("L", params.L);
    num("c_star", params.c_star);
    num("eps", params.eps);
    str("rate", rate);
    str("growth", growth);
    num("h", h);
    num("h0", h0);
    str("v0", v0);
    os << "n = " << n << "\n";
    num("rtol", rtol);
    num("dt", dt);
    num("cfl", cfl);
    num("reaction_cap", reaction_cap);
    str("scheme", scheme);
    num("t_end", t_end);
    num("output_interval", output_interval);
    os << "profiles = " << (profiles ? "true" : "false") << "\n";
    os << "profile_stride = " << profile_stride << "\n";
    str("sweep_param", sweep_param);
    if (!sweep_values.empty()) { // an empty array does not parse back
      os << "sweep_values = [";
      for (std::size_t i = 0; i < sweep_values.size(); ++i)
        os << (i ? ", " : "") << detail::format_number(sweep_values[i]);
      os << "]\n";
    }
    str("sweep_task", sweep_task);
    return os.str();
  }
};

/// Initial deficit v0 = c* - u0 on n cells.
inline Profile initial_deficit(const RunConfig &cfg, int n) {
  const double cs = cfg.params.c_star;
  if (cfg.v0 == "cos2") return figure1_initial_deficit(n, cs);
  if (cfg.v0 == "ramp") return Profile::from_function(n, [cs](double y) { return cs * (1.0 - y); });
  if (cfg.v0.rfind("const:", 0) == 0) {
    const double u = parse_number(cfg.v0.substr(6), "v0");
    return Profile::constant(n, cs - u);
  }
  if (cfg.v0.rfind("file:", 0) == 0) {
    // One u0 value per line on a uniform grid of [0,1]; resampled linearly to n cells.
    const std::string path = cfg.v0.substr(5);
    std::ifstream in(path);
    if (!in) throw InvalidInput("v0: cannot open '" + path + "'");
    std::vector<double> u;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      u.push_back(parse_number(line, "v0 file " + path));
    }
    if (u.size() < 2) throw InvalidInput("v0: '" + path + "' needs at least two values");
    std::vector<double> ys(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) ys[i] = static_cast<double>(i) / (u.size() - 1);
    return Profile::from_function(n, [&](double y) { return cs - detail::interpolate(ys, u, y, true); });
  }
  throw InvalidInput("v0: expected cos2, ramp, const:V or file:PATH, got '" + cfg.v0 + "'");
}

// ---------------------------------------------------------------------------------------
// output

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path &path, const std::string &command, const RunConfig &cfg,
            const std::string &columns)
      : path_(path), out_(path) {
    if (!out_) throw InvalidInput("out_dir: cannot write '" + path.string() + "'");
    out_ << "# command: " << command << "\n";
    std::istringstream cfg_lines(cfg.to_toml());
    std::string line;
    while (std::getline(cfg_lines, line)) out_ << "# " << line << "\n";
    out_ << columns << "\n";
  }

  template <class... T> void row(const T &...xs) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(xs), first = false), ...);
    out_ << "\n";
  }

  void comment(const std::string &text) { out_ << "# " << text << "\n"; }
  const std::filesystem::path &path() const { return path_; }

private:
  static std::string cell(double x) { return detail::format_number(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  static std::string cell(const std::string &s) { return s; }
  static std::string cell(const char *s) { return s; }

  std::filesystem::path path_;
  std::ofstream out_;
};

struct Context {
  RunConfig cfg;
  std::string command;
  std::ostream *out = &std::cout;
  std::ostream *err = &std::cerr;

  std::filesystem::path file(const std::string &suffix) const {
    std::filesystem::create_directories(cfg.out_dir);
    return std::filesystem::path(cfg.out_dir) / ((cfg.tag.empty() ? command : cfg.tag) + "_" + suffix + ".csv");
  }
};

inline int resolved_n(RunConfig &cfg, int fallback) {
  if (cfg.n == 0) cfg.n = fallback;
  if (cfg.n < Profile::min_cells) throw InvalidInput("n: at least 8 cells required");
  return cfg.n;
}

// ---------------------------------------------------------------------------------------
// commands

inline int cmd_bvp(Context &ctx) {
  auto &cfg = ctx.cfg;
  const Model model = cfg.model();
  BvpOptions bo;
  bo.n = resolved_n(cfg, 1024);
  const auto sol = solve_bvp(cfg.h, model, bo);
  const double f = growth_rate(sol, model);

  CsvWriter prof(ctx.file("profile"), ctx.command, cfg, "y,u,u_y,u_yy");
  for (std::size_t i = 0; i < sol.u.size(); ++i) prof.row(sol.u.node(i), sol.u[i], sol.u_y[i], sol.u_yy[i]);
  CsvWriter sum(ctx.file("summary"), ctx.command, cfg, "h,residual,iterations,method,f");
  sum.row(sol.h, sol.residual, sol.iterations, std::string(to_string(sol.method)), f);
  *ctx.out << "bvp: h = " << detail::format_number(sol.h) << ", residual = " << detail::format_number(sol.residual)
           << ", iterations = " << sol.iterations << ", f(h) = " << detail::format_number(f) << "\n";
  return Ok;
}

inline int cmd_evolve(Context &ctx) {
  auto &cfg = ctx.cfg;
  const Model model = cfg.model();
  EvolutionOptions eo;
  eo.n = resolved_n(cfg, 128);
  eo.dt = cfg.dt;
  eo.cfl = cfg.cfl;
  eo.reaction_cap = cfg.reaction_cap;
  eo.scheme = cfg.time_scheme();
  eo.output_interval = cfg.output_interval;
  const auto v0 = initial_deficit(cfg, eo.n);
  const auto tr = evolve(v0, cfg.h0, cfg.t_end, model, eo);

  CsvWriter traj(ctx.file("trajectory"), ctx.command, cfg, "t,h,G,flux_ratio");
  for (std::size_t i = 0; i < tr.states.size(); ++i)
    traj.row(tr.states[i].t, tr.states[i].h, tr.diagnostics[i].G, tr.diagnostics[i].flux_ratio);
  traj.comment(std::string("status: ") + (tr.extinct ? "extinct" : "completed"));
  if (cfg.profiles) {
    CsvWriter snap(ctx.file("profiles"), ctx.command, cfg, "t,y,v");
    const std::size_t stride = static_cast<std::size_t>(std::max(cfg.profile_stride, 1));
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      if (k % stride != 0 && k + 1 != tr.states.size()) continue;
      const auto &s = tr.states[k];
      for (std::size_t i = 0; i < s.v.size(); ++i) snap.row(s.t, s.v.node(i), s.v[i]);
    }
  }
  *ctx.out << "evolve: " << (tr.extinct ? "extinct" : "completed") << ", t = "
           << detail::format_number(tr.states.back().t) << ", h = " << detail::format_number(tr.states.back().h)
           << ", steps = " << tr.extremes.steps << "\n";
  return Ok;
}

inline int cmd_quasisteady(Context &ctx) {
  auto &cfg = ctx.cfg;
  const Model model = cfg.model();
  QuasiSteadyOptions qo;
  qo.rtol = cfg.rtol;
  qo.bvp.n = resolved_n(cfg, 512);
  qo.store_profiles = cfg.profiles;
  const auto tr = integrate_quasisteady(cfg.h0, cfg.t_end, model, qo);

  CsvWriter traj(ctx.file("trajectory"), ctx.command, cfg, "t,h,G,flux_ratio");
  for (std::size_t i = 0; i < tr.times.size(); ++i) traj.row(tr.times[i], tr.heights[i], tr.growth[i], tr.flux_ratio[i]);
  traj.comment(std::string("status: ") + to_string(tr.status));
  if (cfg.profiles) {
    CsvWriter snap(ctx.file("profiles"), ctx.command, cfg, "t,y,v");
    const std::size_t stride = static_cast<std::size_t>(std::max(cfg.profile_stride, 1));
    for (std::size_t k = 0; k < tr.profiles.size(); ++k) {
      if (k % stride != 0 && k + 1 != tr.profiles.size()) continue;
      const auto &u = tr.profiles[k];
      for (std::size_t i = 0; i < u.size(); ++i) snap.row(tr.times[k], u.node(i), cfg.params.c_star - u[i]);
    }
  }
  *ctx.out << "quasisteady: status: " << to_string(tr.status) << ", t = " << detail::format_number(tr.times.back())
           << ", h = " << detail::format_number(tr.heights.back()) << "\n";
  return Ok;
}

inline int cmd_equilibrium(Context &ctx) {
  auto &cfg = ctx.cfg;
  const Model model = cfg.model();
  const int n = resolved_n(cfg, 4096);
  const auto eq = find_equilibrium_shooting(model);
  CsvWriter rec(ctx.file("equilibrium"), ctx.command, cfg,
                "status,h_e,c0_e,residual_B,unique,min_B_increment,min_M,h_e_ode,cross_method_delta");
  if (eq.status != EquilibriumStatus::Found) {
    rec.row(std::string(to_string(eq.status)), 0.0, 0.0, 0.0, false, 0.0, 0.0, 0.0, 0.0);
    *ctx.out << "equilibrium: status: no-equilibrium (r(c*) <= b)\n";
    return NoEquilibrium;
  }
  OdeEquilibriumOptions oo;
  oo.bvp.n = n;
  const auto ode = find_equilibrium_ode(model, oo);
  const double delta = ode.found ? std::abs(ode.h_e - eq.h_e) : std::numeric_limits<double>::quiet_NaN();
  rec.row(std::string(to_string(eq.status)), eq.h_e, eq.c0_e, eq.residual_B, eq.unique,
          eq.certificate.min_B_increment, eq.certificate.min_M_overall, ode.h_e, delta);
  *ctx.out << "equilibrium: status: found, h_e = " << detail::format_number(eq.h_e)
           << ", c0_e = " << detail::format_number(eq.c0_e) << ", unique = " << (eq.unique ? "yes" : "no")
           << ", |h_e(shooting) - h_e(ode)| = " << detail::format_number(delta) << "\n";
  if (!eq.unique) *ctx.out << "equilibrium: certificate: " << eq.certificate.offending << "\n";
  return Ok;
}

inline int cmd_verify(Context &ctx, const std::vector<std::string> &selectors) {
  auto &cfg = ctx.cfg;
  std::vector<std::string> names = selectors;
  if (names.empty() || (names.size() == 1 && names[0] == "all")) names = check_names();
  const auto reports = run_checks(names);
  CsvWriter rec(ctx.file("verify"), ctx.command + " " + [&] {
    std::string s;
    for (const auto &n : names) s += (s.empty() ? "" : " ") + n;
    return s;
  }(), cfg, "check,quantity,value,target,relation,tolerance,provenance,pass");
  bool all = true;
  for (const auto &r : reports) {
    all = all && r.pass;
    *ctx.out << r.text();
    rec.row(r.name, std::string("overall"), r.pass ? 1.0 : 0.0, 1.0, std::string(">="), 0.0,
            std::string("qualitative"), r.pass);
    for (const auto &m : r.measurements)
      rec.row(r.name, m.name, m.value, m.target, std::string(to_string(m.relation)), m.tolerance,
              std::string(to_string(m.provenance)), m.pass);
    for (const auto &n : r.notes) rec.comment(r.name + ": " + n);
  }
  *ctx.out << "verify: " << (all ? "all checks passed" : "some checks failed") << "\n";
  return all ? Ok : SolverFailure;
}

/// Applies one sweep coordinate to a copy of the configuration.
inline RunConfig with_sweep_value(RunConfig cfg, const std::string &param, double x) {
  if (param == "kappa") cfg.params.kappa = x;
  else if (param == "kappa_L") cfg.params.kappa_L = x;
  else if (param == "L") cfg.params.L = x;
  else if (param == "c_star") cfg.params.c_star = x;
  else if (param == "eps") cfg.params.eps = x;
  else if (param == "h") cfg.h = x;
  else if (param == "h0") cfg.h0 = x;
  else if (param == "t_end") cfg.t_end = x;
  else if (param == "alpha" || param == "b") {
    const auto g = parse_growth(cfg.growth);
    if (!g.is_affine()) throw InvalidInput("sweep_param: " + param + " needs an affine growth law");
    const double alpha = param == "alpha" ? x : g.alpha();
    const double b = param == "b" ? x : g.b();
    cfg.growth = GrowthModel::affine(alpha, b).spec();
  } else {
    throw InvalidInput("sweep_param: unknown parameter '" + param + "'");
  }
  return cfg;
}

inline int cmd_sweep(Context &ctx) {
  auto &cfg = ctx.cfg;
  if (cfg.sweep_values.empty()) throw InvalidInput("sweep_values: at least one value required");
  if (cfg.jobs < 1) throw InvalidInput("jobs: must be at least 1");
  const std::string task = cfg.sweep_task;
  if (task != "equilibrium" && task != "quasisteady" && task != "bvp")
    throw InvalidInput("sweep_task: expected equilibrium, quasisteady or bvp, got '" + task + "'");
  // Validate every grid point before any work starts.
  std::vector<RunConfig> points;
  for (double x : cfg.sweep_values) {
    points.push_back(with_sweep_value(cfg, cfg.sweep_param, x));
    (void)points.back().model();
  }
  const int n_bvp = resolved_n(cfg, task == "equilibrium" ? 4096 : task == "quasisteady" ? 512 : 1024);

  struct Row {
    std::string status;
    double a = 0.0, b = 0.0;
    std::string error;
  };
  std::vector<Row> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < points.size();) {
      try {
        const Model m = points[i].model();
        if (task == "equilibrium") {
          ShootingEquilibriumOptions so;
          so.with_certificate = false;
          const auto eq = find_equilibrium_shooting(m, so);
          rows[i] = {to_string(eq.status), eq.h_e, eq.c0_e, {}};
        } else if (task == "quasisteady") {
          QuasiSteadyOptions qo;
          qo.rtol = cfg.rtol;
          qo.bvp.n = n_bvp;
          const auto tr = integrate_quasisteady(points[i].h0, points[i].t_end, m, qo);
          rows[i] = {to_string(tr.status), tr.heights.back(), tr.growth.back(), {}};
        } else {
          BvpOptions bo;
          bo.n = n_bvp;
          const auto sol = solve_bvp(points[i].h, m, bo);
          rows[i] = {"converged", growth_rate(sol, m), sol.residual, {}};
        }
      } catch (const std::exception &e) {
        rows[i] = {"failed", 0.0, 0.0, e.what()};
      }
    }
  };
  std::vector<std::thread> pool;
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(points.size()));
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();

  const std::string cols = task == "equilibrium" ? "h_e,c0_e" : task == "quasisteady" ? "h_end,G_end" : "f,residual";
  CsvWriter out(ctx.file("sweep"), ctx.command, cfg, cfg.sweep_param + ",status," + cols);
  bool failed = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(cfg.sweep_values[i], rows[i].status, rows[i].a, rows[i].b);
    if (!rows[i].error.empty()) {
      out.comment("point " + std::to_string(i) + ": " + rows[i].error);
      failed = true;
    }
  }
  *ctx.out << "sweep: " << rows.size() << " points, " << (failed ? "some failed" : "all completed") << "\n";
  return failed ? SolverFailure : Ok;
}

// ---------------------------------------------------------------------------------------
// entry point

/// Parses argv and runs one command. Never throws; returns an ExitCode.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  auto &cfg = ctx.cfg;

  CLI::App app{"Biofilm growth: reduced model solvers and checks"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit"); // -h would clash with --h
  app.set_config("--config", "", "TOML/INI file with RunConfig keys");
  app.allow_config_extras(CLI::config_extras_mode::error);

  app.add_option("--kappa", cfg.params.kappa, "diffusivity in the film");
  app.add_option("--kappa_L", cfg.params.kappa_L, "diffusivity in the boundary layer");
  app.add_option("--L", cfg.params.L, "boundary layer thickness");
  app.add_option("--c_star", cfg.params.c_star, "bulk substrate concentration");
  app.add_option("--eps", cfg.params.eps, "substrate time scale");
  app.add_option("--rate", cfg.rate, "tanh:rho | monod:rmax:K | linear:lambda | table:s/r,...");
  app.add_option("--growth", cfg.growth, "affine:alpha:b | const:g | table:s/g,...");
  app.add_option("--h", cfg.h, "film height for bvp");
  app.add_option("--h0", cfg.h0, "initial film height");
  app.add_option("--v0", cfg.v0, "initial profile u0: cos2 | ramp | const:V | file:PATH");
  app.add_option("--n", cfg.n, "grid cells (0: command default)");
  app.add_option("--rtol", cfg.rtol, "quasi-steady integrator tolerance");
  app.add_option("--dt", cfg.dt, "evolution step");
  app.add_option("--cfl", cfg.cfl, "advection step cap factor");
  app.add_option("--reaction_cap", cfg.reaction_cap, "reaction step cap factor");
  app.add_option("--scheme", cfg.scheme, "imex-euler | cn-ab2");
  app.add_option("--t_end", cfg.t_end, "final time");
  app.add_option("--out_dir", cfg.out_dir, "output directory")->envname("BIOFILM_OUT_DIR");
  app.add_option("--tag", cfg.tag, "output file prefix");
  app.add_option("--output_interval", cfg.output_interval, "evolution output spacing in t (0: every step)");
  app.add_flag("--profiles", cfg.profiles, "write t,y,v snapshots");
  app.add_option("--profile_stride", cfg.profile_stride, "every k-th stored state in snapshots");
  app.add_option("--sweep_param", cfg.sweep_param, "kappa | kappa_L | L | c_star | eps | h | h0 | t_end | alpha | b");
  app.add_option("--sweep_values", cfg.sweep_values, "grid values")->delimiter(',');
  app.add_option("--sweep_task", cfg.sweep_task, "equilibrium | quasisteady | bvp");
  app.add_option("--jobs", cfg.jobs, "concurrent sweep points");

  std::vector<std::string> selectors;
  auto *bvp = app.add_subcommand("bvp", "solve the fixed-height problem u[h]")->fallthrough();
  auto *evo = app.add_subcommand("evolve", "full evolution of (v, h)")->fallthrough();
  auto *qs = app.add_subcommand("quasisteady", "integrate h' = f(h)")->fallthrough();
  auto *eqc = app.add_subcommand("equilibrium", "locate the equilibrium height")->fallthrough();
  auto *ver = app.add_subcommand("verify", "run checks")->fallthrough();
  ver->add_option("checks", selectors, "small_h | large_h | extinction | convergence | figure1 | all");
  auto *swp = app.add_subcommand("sweep", "parameter sweep")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return Ok;
  } catch (const CLI::ParseError &e) {
    err << "config error: " << e.what() << "\n";
    return ConfigError;
  }

  try {
    if (*bvp) ctx.command = "bvp";
    else if (*evo) ctx.command = "evolve";
    else if (*qs) ctx.command = "quasisteady";
    else if (*eqc) ctx.command = "equilibrium";
    else if (*ver) ctx.command = "verify";
    else if (*swp) ctx.command = "sweep";
    // Fail on config errors before any solver work.
    (void)cfg.model();
    (void)cfg.time_scheme();
    if (ctx.command == "bvp") return cmd_bvp(ctx);
    if (ctx.command == "evolve") return cmd_evolve(ctx);
    if (ctx.command == "quasisteady") return cmd_quasisteady(ctx);
    if (ctx.command == "equilibrium") return cmd_equilibrium(ctx);
    if (ctx.command == "verify") {
      for (const auto &s : selectors)
        if (s != "all" && std::find(check_names().begin(), check_names().end(), s) == check_names().end())
          throw InvalidInput("checks: unknown check '" + s + "'");
      return cmd_verify(ctx, selectors);
    }
    return cmd_sweep(ctx);
  } catch (const InvalidInput &e) {
    err << "config error: " << e.what() << "\n";
    return ConfigError;
  } catch (const std::exception &e) {
    err << "solver failure: " << e.what() << "\n";
    return SolverFailure;
  }
}

} // namespace biofilm::cli
