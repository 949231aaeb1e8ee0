#include "iashock/cli.hpp"
#include "iashock/approximation.hpp"
#include "iashock/config.hpp"
#include "iashock/energy_diagnostics.hpp"
#include "iashock/error.hpp"
#include "iashock/io.hpp"
#include "iashock/kdv_burgers.hpp"
#include "iashock/nsp_evolution.hpp"
#include "iashock/profile_ode.hpp"
#include "iashock/rankine_hugoniot.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace iashock::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Command
{
  std::string                                        name;
  std::string                                        about;
  std::function<void(Config &)>                      declare;
  std::function<void(const Config &, std::ostream &)> run;
};

std::string output_root()
{
  char const *env = std::getenv("IASHOCK_OUT");
  return env && *env ? env : ".";
}

// --out if given, else the default name under $IASHOCK_OUT
std::string out_path(const Config &cfg, const std::string &fallback)
{
  std::string const o = cfg.str("out");
  return o.empty() ? (fs::path(output_root()) / fallback).string() : o;
}

std::string sidecar(const std::string &path)
{
  return fs::path(path).replace_extension(".json").string();
}

json config_json(const Config &cfg)
{
  json j;
  for (auto const &[k, e] : cfg.entries()) j[k] = e.value;
  return j;
}

// physical (mu, lambda) from the flags; scaled values give mu = eps mu_bar,
// lambda = sqrt(eps) lambda_bar and must agree with explicit physical ones
PlasmaParams resolve_params(const Config &cfg, double eps)
{
  PlasmaParams p{cfg.num("T"), cfg.num("mu"), cfg.num("lambda")};
  auto merge = [&](const char *phys, const char *scaled, double factor, double &target) {
    if (!cfg.has(scaled) || !cfg.was_set(scaled)) return;
    double const v = factor * cfg.num(scaled);
    if (cfg.was_set(phys) && std::abs(v - target) > 1e-12 * std::max(1.0, std::abs(target))) {
      throw SolverError(ErrorKind::ConfigError,
                        std::string(phys) + " and " + scaled + " are inconsistent for eps = " + io::format_double(eps));
    }
    target = v;
  };
  merge("mu", "mu-bar", eps, p.mu);
  merge("lambda", "lambda-bar", std::sqrt(eps), p.lambda);
  p.validate();
  return p;
}

void declare_physical(Config &c, const std::string &T = "0")
{
  c.declare("T", T, "temperature T >= 0");
  c.declare("mu", "1", "viscosity mu > 0");
  c.declare("lambda", "1", "Debye length lambda > 0");
  c.declare("mu-bar", "", "scaled viscosity, mu = eps mu_bar (optional)");
  c.declare("lambda-bar", "", "scaled Debye length, lambda = sqrt(eps) lambda_bar (optional)");
}

json fit_json(const DecayFit &f)
{
  return json{{"rate", f.rate}, {"intercept", f.intercept}, {"points", f.points}};
}

// ---------------------------------------------------------------- rh

void declare_rh(Config &c)
{
  c.declare("T", "0", "temperature T >= 0");
  c.declare("eps", "0.1", "shock strength eps > 0");
  c.declare("eps-max-factor", "0.5", "eps must not exceed this times sqrt(T+1)");
  c.declare("json", "false", "print a JSON record instead of text");
}

void run_rh(const Config &cfg, std::ostream &out)
{
  double const T = cfg.num("T"), eps = cfg.num("eps");
  Downstream const d = parametrize_downstream(T, eps, cfg.num("eps-max-factor"));
  EquilibriumState const left{1.0, 0.0, 0.0};
  auto const re = rh_residual_eulerian(left, d.state, d.s, T);
  LagrangianEquilibrium const ll = eulerian_to_lagrangian(left), lr = eulerian_to_lagrangian(d.state);
  auto const rl = rh_residual_lagrangian(ll, lr, d.s, T);
  if (cfg.flag("json")) {
    json j;
    j["config"] = config_json(cfg);
    j["s"] = d.s;
    j["n_plus"] = d.state.n;
    j["u_plus"] = d.state.u;
    j["phi_plus"] = d.state.phi;
    j["a_eps"] = d.a_eps;
    j["v_plus"] = lr.v;
    j["residual_eulerian"] = {re[0], re[1]};
    j["residual_lagrangian"] = {rl[0], rl[1]};
    out << j.dump(2) << '\n';
    return;
  }
  out << std::setprecision(15);
  out << "s = " << d.s << '\n'
      << "n+ = " << d.state.n << '\n'
      << "u+ = " << d.state.u << '\n'
      << "phi+ = " << d.state.phi << '\n'
      << "a_eps = " << d.a_eps << '\n'
      << "v+ = " << lr.v << '\n'
      << std::setprecision(3) << "residual_eulerian = " << re[0] << ' ' << re[1] << '\n'
      << "residual_lagrangian = " << rl[0] << ' ' << rl[1] << '\n';
}

// ---------------------------------------------------------------- profile

void declare_profile(Config &c)
{
  declare_physical(c);
  c.declare("eps", "0.02", "shock strength");
  c.declare("L", "0", "half-length of the domain; 0 picks 40 / gdot(0)");
  c.declare("nodes", "4001", "odd node count");
  c.declare("newton-tol", "1e-10", "Newton update tolerance");
  c.declare("max-newton", "50", "Newton iteration cap");
  c.declare("eps-max-factor", "0.5", "eps must not exceed this times sqrt(T+1)");
  c.declare("out", "", "CSV path (default $IASHOCK_OUT/profile.csv); a JSON sidecar is written next to it");
}

ProfileSolution profile_from(const Config &cfg, double eps)
{
  PlasmaParams const p = resolve_params(cfg, eps);
  ProfileOptions o;
  o.grid = default_profile_grid(p, eps, cfg.integer("nodes"));
  if (cfg.num("L") > 0.0) o.grid.L = cfg.num("L");
  o.newton_tol = cfg.num("newton-tol");
  o.max_newton = cfg.integer("max-newton");
  o.eps_max_factor = cfg.num("eps-max-factor");
  return solve_profile(p, eps, o);
}

void run_profile(const Config &cfg, std::ostream &out)
{
  double const eps = cfg.num("eps");
  ProfileSolution const sol = profile_from(cfg, eps);
  std::string const path = out_path(cfg, "profile.csv");
  std::string const header = cfg.dump() + "s = " + io::format_double(sol.s) + "\n";
  io::write_csv(path, {{"xi", sol.xi}, {"n", sol.n}, {"u", sol.u}, {"phi", sol.phi}}, header);

  StructureReport const st = profile_structure(sol);
  DecayFit const fl = decay_rate_estimate(sol, Side::Left), fr = decay_rate_estimate(sol, Side::Right);
  json j;
  j["config"] = config_json(cfg);
  j["s"] = sol.s;
  j["L"] = sol.xi[sol.size() - 1];
  j["n_plus"] = sol.right.n;
  j["u_plus"] = sol.right.u;
  j["phi_plus"] = sol.right.phi;
  j["newton_iterations"] = sol.newton_iterations;
  j["residual_norm"] = sol.residual_norm;
  j["update_history"] = io::to_json(sol.update_history);
  j["endpoint_mismatch"] = sol.endpoint_mismatch;
  j["mass_integral_residual"] = mass_integral_residual(sol);
  j["first_integral_residual"] = first_integral_residual(sol);
  j["monotone"] = {{"n", st.n_decreasing}, {"u", st.u_decreasing}, {"phi", st.phi_decreasing}};
  j["C_lower"] = st.C_lower;
  j["C_upper"] = st.C_upper;
  j["decay_left"] = fit_json(fl);
  j["decay_right"] = fit_json(fr);
  j["linearized_rate_left"] = linearized_tail_rate(sol.params, sol.s, sol.left, Side::Left);
  j["linearized_rate_right"] = linearized_tail_rate(sol.params, sol.s, sol.right, Side::Right);
  j["g_dot_zero"] = g_dot_zero(sol.params, sol.right.n);
  io::write_json(sidecar(path), j);
  out << "profile: s = " << sol.s << ", " << sol.newton_iterations << " Newton steps, wrote " << path << '\n';
}

// ---------------------------------------------------------------- kdvb

void declare_kdvb(Config &c, bool sweep)
{
  c.declare("T", "0", "temperature T >= 0");
  if (sweep) {
    c.declare("delta-list", "0.001,0.01,0.05", "comma separated dispersion parameters");
  }
  else {
    c.declare("delta", "0.01", "dispersion parameter delta >= 0");
  }
  c.declare("kind", "n1", "n1, u1 or phi1");
  c.declare("modified", "false", "use the eps-dependent coefficients");
  c.declare("eps", "0.02", "eps for the modified variant");
  c.declare("L", "30", "half-length of the z domain");
  c.declare("nodes", "4001", "odd node count");
  c.declare("out", "", sweep ? "CSV table path (default $IASHOCK_OUT/kdvb_sweep.csv)"
                             : "CSV path (default $IASHOCK_OUT/kdvb.csv); a JSON sidecar is written next to it");
}

KdvbProfile kdvb_from(const Config &cfg, double delta)
{
  double const T = cfg.num("T");
  KdvbOptions o;
  o.grid = GridSpec{cfg.num("L"), cfg.integer("nodes")};
  KdvbVariant const var = cfg.flag("modified") ? KdvbVariant::modified_for(T, cfg.num("eps")) : KdvbVariant::classic();
  return solve_kdvb(T, delta, kdvb_kind_from_string(cfg.str("kind")), var, o);
}

void run_kdvb(const Config &cfg, std::ostream &out)
{
  KdvbProfile const p = kdvb_from(cfg, cfg.num("delta"));
  std::string const path = out_path(cfg, "kdvb.csv");
  io::write_csv(path, {{"z", p.z}, {"field", p.field}, {"slope", p.slope}}, cfg.dump());
  PhaseEigenvalues const ev = kdvb_phase_eigenvalues(p.T, p.delta);
  MonotonicityReport const m = monotonicity_report(p);
  json j;
  j["config"] = config_json(cfg);
  j["coefficients"] = {{"c1", p.coeffs.c1}, {"c2", p.coeffs.c2}, {"c3", p.coeffs.c3}, {"c4", p.coeffs.c4}};
  j["far_left"] = p.far_left;
  j["far_right"] = p.far_right;
  j["newton_iterations"] = p.iterations;
  j["residual"] = p.residual;
  j["equation_residual"] = kdvb_equation_residual(p);
  j["monotone"] = m.monotone;
  j["overshoot"] = m.overshoot;
  j["eigenvalues"] = {{"minus1", ev.minus1}, {"minus2", ev.minus2}, {"plus1", ev.plus1}, {"plus2", ev.plus2}};
  j["discriminant_root"] = kdvb_discriminant_root(p.T);
  j["decay_left"] = fit_json(fit_tail(p.z, p.field, p.far_left, Side::Left));
  j["decay_right"] = fit_json(fit_tail(p.z, p.field, p.far_right, Side::Right));
  io::write_json(sidecar(path), j);
  out << "kdvb: " << p.iterations << " Newton steps, wrote " << path << '\n';
}

void run_kdvb_sweep(const Config &cfg, std::ostream &out)
{
  std::vector<double> const deltas = cfg.list("delta-list");
  if (deltas.empty()) throw SolverError(ErrorKind::ConfigError, "delta-list is empty");
  std::vector<std::future<KdvbProfile>> jobs;
  for (double d : deltas) jobs.push_back(std::async(std::launch::async, [&cfg, d] { return kdvb_from(cfg, d); }));
  Eigen::Index const n = static_cast<Eigen::Index>(deltas.size());
  Vec del(n), mono(n), over(n), left(n), lm1(n), right(n), lp1(n), root(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    KdvbProfile const p = jobs[i].get();
    PhaseEigenvalues const ev = kdvb_phase_eigenvalues(p.T, p.delta);
    MonotonicityReport const m = monotonicity_report(p);
    del[i] = p.delta;
    mono[i] = m.monotone ? 1.0 : 0.0;
    over[i] = m.overshoot;
    left[i] = fit_tail(p.z, p.field, p.far_left, Side::Left).rate;
    lm1[i] = ev.minus1;
    right[i] = fit_tail(p.z, p.field, p.far_right, Side::Right).rate;
    lp1[i] = std::abs(ev.plus1);
    root[i] = kdvb_discriminant_root(p.T);
  }
  std::string const path = out_path(cfg, "kdvb_sweep.csv");
  io::write_csv(path,
                {{"delta", del},
                 {"monotone", mono},
                 {"overshoot", over},
                 {"rate_left", left},
                 {"lambda_minus1", lm1},
                 {"rate_right", right},
                 {"abs_lambda_plus1", lp1},
                 {"discriminant_root", root}},
                cfg.dump());
  out << std::setprecision(6);
  for (Eigen::Index i = 0; i < n; ++i) {
    out << "delta " << del[i] << "  monotone " << mono[i] << "  left " << left[i] << " / " << lm1[i] << "  right "
        << right[i] << " / " << lp1[i] << '\n';
  }
  out << "wrote " << path << '\n';
}

// ---------------------------------------------------------------- validate

void declare_validate(Config &c)
{
  ValidationConfig const d;
  c.declare("T", "0", "temperature T >= 0");
  c.declare("delta", "0.01", "delta = lambda_bar^2 / mu_bar^2");
  c.declare("eps-list", "0.04,0.02,0.01", "comma separated eps values, halving");
  c.declare("mu-bar", "1", "scaled viscosity");
  c.declare("alpha", "1", "tail weight exponent, 0 < alpha < 2");
  c.declare("k", "2", "derivative order of the weighted norms");
  c.declare("L", "60", "half-length of the z domain");
  c.declare("nodes", "8001", "odd node count");
  c.declare("noise-floor", "1e-10", "relative level below which tails are treated analytically");
  c.declare("fixed-point", "true", "also run the remainder fixed-point iteration");
  c.declare("max-iter", "40", "fixed-point iteration cap");
  c.declare("fp-tol", "1e-9", "fixed-point tolerance relative to the X norm");
  c.declare("threads", "0", "worker threads, 0 = one per eps");
  c.declare("delta-sweep", "", "optional comma separated deltas for a uniformity sweep");
  c.declare("delta-sweep-eps", "0.02", "eps used by the delta sweep");
  c.declare("out", "", "JSON path (default $IASHOCK_OUT/report.json)");
}

json epsilon_json(const EpsilonResult &r)
{
  json j;
  j["epsilon"] = r.epsilon;
  j["sup_error"] = {{"n", r.err_n}, {"u", r.err_u}, {"phi", r.err_phi}};
  j["sup_remainder"] = {{"n", r.sup_nR}, {"u", r.sup_uR}, {"phi", r.sup_phiR}};
  j["nR_at_zero"] = r.nR_at_zero;
  j["far_field_R"] = r.far_field_R;
  j["weighted_norm"] = {{"n", r.norm_nR}, {"phi", r.norm_phiR}, {"X", r.x_norm}};
  j["u_formula_gap"] = r.u_formula_gap;
  j["shift"] = r.shift;
  j["r_ratios"] = {{"r2", r.ratio_r2}, {"r3", r.ratio_r3}, {"r5", r.ratio_r5}, {"r6", r.ratio_r6}};
  j["profile_residuals"] = {{"u_identity", r.profile_residuals.u_identity},
                            {"poisson", r.profile_residuals.poisson},
                            {"momentum", r.profile_residuals.momentum}};
  j["fixed_point"] = {{"converged", r.fp_converged},
                      {"iterations", r.fp_iterations},
                      {"ratios", io::to_json(r.fp_ratios)},
                      {"increments", io::to_json(r.fp_increments)},
                      {"gap_to_direct", r.fp_gap}};
  j["error_estimate"] = {{"direct", r.err_est_direct}, {"fixed_point", r.err_est_fp}};
  return j;
}

void run_validate(const Config &cfg, std::ostream &out)
{
  ValidationConfig vc;
  vc.T = cfg.num("T");
  vc.delta = cfg.num("delta");
  vc.eps_list = cfg.list("eps-list");
  vc.mu_bar = cfg.num("mu-bar");
  vc.alpha = cfg.num("alpha");
  vc.k = cfg.integer("k");
  vc.L = cfg.num("L");
  vc.nodes = cfg.integer("nodes");
  vc.noise_floor = cfg.num("noise-floor");
  vc.fixed_point = cfg.flag("fixed-point");
  vc.max_iter = cfg.integer("max-iter");
  vc.fp_tol = cfg.num("fp-tol");
  vc.threads = cfg.integer("threads");
  ValidationReport const rep = run_validation(vc);

  json j;
  j["config"] = config_json(cfg);
  j["runs"] = json::array();
  for (auto const &r : rep.runs) j["runs"].push_back(epsilon_json(r));
  j["observed_order"] = {{"n", io::to_json(rep.order_n)}, {"u", io::to_json(rep.order_u)}, {"phi", io::to_json(rep.order_phi)}};
  j["halving_ratio"] = {{"n", io::to_json(rep.ratio_n)}, {"u", io::to_json(rep.ratio_u)}, {"phi", io::to_json(rep.ratio_phi)}};
  j["remainder_spread"] = {{"n", rep.spread_nR}, {"u", rep.spread_uR}, {"phi", rep.spread_phiR}};

  std::vector<double> const deltas = cfg.list("delta-sweep");
  if (!deltas.empty()) {
    DeltaSweep const ds = delta_sweep(vc, cfg.num("delta-sweep-eps"), deltas);
    json s;
    s["epsilon"] = ds.epsilon;
    s["spread_nR"] = ds.spread_nR;
    s["entries"] = json::array();
    for (auto const &e : ds.entries) {
      s["entries"].push_back({{"delta", e.delta},
                              {"sup_nR", e.sup_nR},
                              {"burgers_gap", e.burgers_gap},
                              {"err_est", e.err_est},
                              {"err_est_burgers", e.err_est_burgers}});
    }
    j["delta_sweep"] = s;
  }
  std::string const path = out_path(cfg, "report.json");
  io::write_json(path, j);
  out << std::setprecision(4);
  for (std::size_t i = 0; i < rep.ratio_n.size(); ++i) {
    out << "halving " << i + 1 << ": error ratios n " << rep.ratio_n[i] << "  u " << rep.ratio_u[i] << "  phi "
        << rep.ratio_phi[i] << '\n';
  }
  out << "remainder spread n " << rep.spread_nR << "  u " << rep.spread_uR << "  phi " << rep.spread_phiR << '\n';
  out << "wrote " << path << '\n';
}

// ---------------------------------------------------------------- evolve

void declare_evolve(Config &c)
{
  ExperimentSpec const d;
  EvolveOptions const e;
  declare_physical(c, "1");
  c.declare("jump", "0.05", "volume jump v+ - v- of the base shock");
  c.declare("eps", "", "shock strength; overrides jump when given");
  c.declare("profile-nodes", std::to_string(d.profile_nodes), "nodes of the Eulerian profile solve");
  c.declare("dy", "1", "Lagrangian grid spacing");
  c.declare("y-min", "0", "left end; 0 sizes it from t-end so the left acoustic wave stays clear");
  c.declare("y-max", "0", "right end; 0 sizes it from t-end for diffusive spreading (at least 600)");
  c.declare("t-end", "2000", "final time");
  c.declare("sample-every", "10", "diagnostics interval");
  c.declare("snapshot-every", "0", "snapshot interval; 0 writes the initial and final states only");
  c.declare("cfl", "0.4", "acoustic Courant number");
  c.declare("E0", "1e-3", "target initial energy; the amplitude is scaled to match");
  c.declare("amplitude", "0", "explicit perturbation amplitude; overrides E0 when nonzero");
  c.declare("shape", "bump", "bump (derivative of a Gaussian) or dipole");
  c.declare("center", "0", "perturbation center");
  c.declare("width", "10", "perturbation width");
  c.declare("steady-refine", "true", "use the discrete steady state as the base profile");
  c.declare("guard-fraction", "0.2", "outer fraction of each half-domain monitored");
  c.declare("guard-threshold", "1e-3", "abort when the guard band perturbation exceeds this times its running max");
  c.declare("transient-fraction", "0.25", "fraction of t-end treated as transient by the verdict");
  c.declare("late-tol", "0.05", "allowed relative growth of (E + int D)/E0 after the transient");
  c.declare("g-bound", "100", "bound on (E + int D)/E0");
  c.declare("out", "", "output directory (default $IASHOCK_OUT/traj)");
}

ExperimentSpec experiment_from(const Config &cfg)
{
  ExperimentSpec x;
  double const T = cfg.num("T");
  x.jump = cfg.num("jump");
  double eps = epsilon_for_volume_jump(T, x.jump);
  if (cfg.was_set("eps")) {
    eps = cfg.num("eps");
    x.jump = 1.0 / parametrize_downstream(T, eps).state.n - 1.0;
  }
  x.params = resolve_params(cfg, eps);
  x.profile_nodes = cfg.integer("profile-nodes");
  x.h = cfg.num("dy");
  x.y_min = cfg.num("y-min");
  x.y_max = cfg.num("y-max");
  x.t_end = cfg.num("t-end");
  x.E0_target = cfg.num("E0");
  x.amplitude_override = cfg.num("amplitude");
  std::string const shape = cfg.str("shape");
  if (shape == "bump") {
    x.pert.shape = PerturbationShape::DerivativeOfBump;
  }
  else if (shape == "dipole") {
    x.pert.shape = PerturbationShape::Dipole;
  }
  else {
    throw SolverError(ErrorKind::ConfigError, "shape must be bump or dipole, got '" + shape + "'");
  }
  x.pert.center = cfg.num("center");
  x.pert.width = cfg.num("width");
  x.refine_steady = cfg.flag("steady-refine");
  return x;
}

void write_snapshot(const std::string &path, const LagrangianState &st, const std::string &header)
{
  io::write_csv(path,
                {{"y", st.y}, {"v", st.v}, {"u", st.u}, {"phi", st.phi}, {"phi_t", st.phi_t}},
                header + "time = " + io::format_double(st.t) + "\n");
}

json verdict_json(const StabilityVerdict &v)
{
  return json{{"pass", v.pass},
              {"bounded", v.bounded},
              {"E0", v.E0},
              {"sup_E_ratio", v.sup_E_ratio},
              {"G_max", v.G_max},
              {"G_final", v.G_final},
              {"G_late_growth", v.G_late_growth},
              {"running_max", v.running_max},
              {"terminal", v.terminal},
              {"terminal_ratio", v.terminal_ratio},
              {"max_mass", v.max_mass},
              {"max_leak", v.max_leak},
              {"min_E1_margin", v.min_margin}};
}

json run_evolve_to(const Config &cfg, const std::string &dir)
{
  ExperimentSpec const spec = experiment_from(cfg);
  Experiment const ex = prepare_experiment(spec);
  std::string const header = cfg.dump() + "s = " + io::format_double(ex.base.s) + "\n";
  fs::create_directories(dir);
  io::write_csv((fs::path(dir) / "profile.csv").string(),
                {{"y", ex.base.y}, {"v", ex.base.v}, {"u", ex.base.u}, {"phi", ex.base.phi}},
                header);

  EvolveOptions eo;
  eo.t_end = spec.t_end;
  eo.sample_every = cfg.num("sample-every");
  eo.cfl = cfg.num("cfl");
  eo.guard_fraction = cfg.num("guard-fraction");
  eo.guard_threshold = cfg.num("guard-threshold");
  double const snap = cfg.num("snapshot-every");
  int count = 0;
  double next_snap = 0.0;
  auto snapshot = [&](const LagrangianState &st) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(5) << std::setfill('0') << count++ << ".csv";
    write_snapshot((fs::path(dir) / name.str()).string(), st, header);
  };
  snapshot(ex.initial);
  if (snap > 0.0) {
    next_snap = snap;
    eo.observer = [&](const LagrangianState &st, const EnergyReport &) {
      if (st.t >= next_snap - 1e-9 * snap && st.t < spec.t_end - 1e-9 * spec.t_end) {
        snapshot(st);
        next_snap += snap;
      }
    };
  }
  Trajectory const tr = evolve(ex.initial, ex.base, eo);
  snapshot(tr.final_state);

  std::vector<double> const G = gronwall_ratio(tr.samples, ex.E0);
  Eigen::Index const m = static_cast<Eigen::Index>(tr.samples.size());
  std::vector<Vec> cols(14, Vec(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    EnergyReport const &r = tr.samples[i];
    double const row[] = {r.t, r.E, r.D, r.E1, r.E1_margin, G[i], r.sup_v, r.sup_u, r.sup_phi,
                          r.sup_perturbation, r.mass_v, r.mass_u, r.leak_Phi, r.leak_Psi};
    for (int c = 0; c < 14; ++c) cols[c][i] = row[c];
  }
  char const *names[] = {"t", "E", "D", "E1", "E1_margin", "G", "sup_v", "sup_u", "sup_phi",
                         "sup_perturbation", "mass_v", "mass_u", "leak_Phi", "leak_Psi"};
  std::vector<io::Column> columns;
  for (int c = 0; c < 14; ++c) columns.push_back({names[c], cols[c]});
  io::write_csv((fs::path(dir) / "diagnostics.csv").string(), columns, header);

  StabilityVerdict const v = stability_verdict(tr.samples, ex.E0, cfg.num("transient-fraction"), cfg.num("g-bound"),
                                               cfg.num("late-tol"));
  json j;
  j["config"] = config_json(cfg);
  j["epsilon"] = ex.epsilon;
  j["s"] = ex.base.s;
  j["jump"] = spec.jump;
  j["grid"] = {{"y_min", ex.base.y[0]}, {"y_max", ex.base.y[ex.base.y.size() - 1]}, {"nodes", ex.base.y.size()}};
  j["amplitude"] = ex.amplitude;
  j["E0"] = ex.E0;
  if (spec.refine_steady) {
    j["steady_state"] = {{"distance", ex.steady.distance},
                         {"residual_before", ex.steady.residual_before},
                         {"residual_after", ex.steady.residual_after},
                         {"iterations", ex.steady.iterations}};
  }
  j["steps"] = tr.steps;
  j["dt"] = tr.dt;
  j["snapshots"] = count;
  j["verdict"] = verdict_json(v);
  if (tr.samples.size() >= 2 && ex.E0 > 0.0) j["verdict"]["G_doubling_growth"] = gronwall_doubling_growth(tr.samples, ex.E0);
  io::write_json((fs::path(dir) / "summary.json").string(), j);
  return j;
}

void run_evolve(const Config &cfg, std::ostream &out)
{
  std::string const dir = out_path(cfg, "traj");
  json const j = run_evolve_to(cfg, dir);
  auto const &v = j["verdict"];
  out << std::setprecision(4) << "evolve: " << j["steps"].get<long>() << " steps, E0 = " << j["E0"].get<double>()
      << ", G_max = " << v["G_max"].get<double>() << ", terminal ratio = " << v["terminal_ratio"].get<double>()
      << ", verdict " << (v["pass"].get<bool>() ? "PASS" : "FAIL") << ", wrote " << dir << '\n';
}

// ---------------------------------------------------------------- diagnose

void declare_diagnose(Config &c)
{
  c.declare("state", "", "snapshot CSV with columns y, v, u, phi and optionally phi_t");
  c.declare("profile", "", "base profile CSV with columns y, v, u, phi");
  c.declare("T", "", "temperature; default read from the profile header");
  c.declare("mu", "", "viscosity; default read from the profile header");
  c.declare("lambda", "", "Debye length; default read from the profile header");
  c.declare("s", "", "shock speed; default read from the profile header");
  c.declare("out", "", "JSON path; default prints to stdout");
}

void run_diagnose(const Config &cfg, std::ostream &out)
{
  if (cfg.str("state").empty() || cfg.str("profile").empty()) {
    throw SolverError(ErrorKind::ConfigError, "diagnose needs --state and --profile");
  }
  io::CsvTable const st = io::read_csv(cfg.str("state"));
  io::CsvTable const pr = io::read_csv(cfg.str("profile"));
  auto param = [&](const std::string &key) {
    if (!cfg.str(key).empty()) return cfg.num(key);
    auto it = pr.meta.find(key);
    if (it == pr.meta.end()) throw SolverError(ErrorKind::ConfigError, "profile header lacks '" + key + "'; pass --" + key);
    Config tmp;
    tmp.declare(key, it->second, "");
    return tmp.num(key);
  };
  LagrangianProfile base;
  base.y = pr.column("y");
  base.v = pr.column("v");
  base.u = pr.column("u");
  base.phi = pr.column("phi");
  base.s = param("s");
  base.params = PlasmaParams{param("T"), param("mu"), param("lambda")};
  base.params.validate();
  Eigen::Index const N = base.y.size();
  if (N < 5) throw SolverError(ErrorKind::GridMismatch, "profile has fewer than 5 nodes");
  base.left = {base.v[0], base.u[0], base.phi[0]};
  base.right = {base.v[N - 1], base.u[N - 1], base.phi[N - 1]};

  LagrangianState s;
  s.y = st.column("y");
  if (s.y.size() != N || (s.y - base.y).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, base.y.cwiseAbs().maxCoeff())) {
    throw SolverError(ErrorKind::GridMismatch, "state and profile grids differ");
  }
  s.v = st.column("v");
  s.u = st.column("u");
  s.phi = st.column("phi");
  s.phi_t = st.has("phi_t") ? st.column("phi_t") : Vec::Zero(N);
  auto it = st.meta.find("time");
  s.t = it == st.meta.end() ? 0.0 : std::stod(it->second);
  s.s = base.s;
  s.params = base.params;
  s.left = base.left;
  s.right = base.right;

  EnergyReport const r = energy_report(s, base);
  json j;
  j["config"] = config_json(cfg);
  j["t"] = r.t;
  j["E"] = r.E;
  j["D"] = r.D;
  j["E1"] = r.E1;
  j["E1_margin"] = r.E1_margin;
  j["E0_functional"] = initial_energy(s, base);
  j["sup"] = {{"v", r.sup_v}, {"u", r.sup_u}, {"phi", r.sup_phi}, {"max", r.sup_perturbation}};
  j["mass"] = {{"v", r.mass_v}, {"u", r.mass_u}};
  j["leak"] = {{"Phi", r.leak_Phi}, {"Psi", r.leak_Psi}};
  if (cfg.str("out").empty()) {
    out << j.dump(2) << '\n';
  }
  else {
    io::write_json(cfg.str("out"), j);
    out << "wrote " << cfg.str("out") << '\n';
  }
}

// ---------------------------------------------------------------- sweep

void declare_sweep(Config &c)
{
  c.declare("param", "E0", "evolve key varied across runs");
  c.declare("values", "5e-4,1e-3,2e-3", "comma separated values of that key");
  c.declare("jobs", "0", "parallel workers, 0 = hardware concurrency");
  c.declare("run-config", "", "evolve config file shared by every run");
  c.declare("out", "", "output directory (default $IASHOCK_OUT/sweep); run i writes to run_<i>/");
}

void run_sweep(const Config &cfg, std::ostream &out)
{
  Config base;
  declare_evolve(base);
  if (!cfg.str("run-config").empty()) base.parse_file(cfg.str("run-config"));
  std::string const key = cfg.str("param");
  if (!base.has(key) || key == "out") throw SolverError(ErrorKind::ConfigError, "sweep: '" + key + "' is not an evolve key");
  std::vector<double> const values = cfg.list("values");
  if (values.empty()) throw SolverError(ErrorKind::ConfigError, "sweep: no values");
  std::string const dir = out_path(cfg, "sweep");

  std::size_t const n = values.size();
  std::vector<json> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      Config c = base;
      c.set(key, io::format_double(values[i]));
      std::string const sub = (fs::path(dir) / ("run_" + std::to_string(i))).string();
      c.set("out", sub);
      json r;
      r["value"] = values[i];
      r["dir"] = sub;
      try {
        json const j = run_evolve_to(c, sub);
        r["E0"] = j["E0"];
        r["verdict"] = j["verdict"];
      }
      catch (const SolverError &e) {
        r["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
      }
      results[i] = std::move(r);
    }
  };
  int jobs = cfg.integer("jobs");
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto &t : pool) t.join();

  json j;
  j["config"] = config_json(cfg);
  j["runs"] = results;
  json first_fail = nullptr;
  for (auto const &r : results) {
    bool const pass = r.contains("verdict") && r["verdict"]["pass"].get<bool>();
    if (!pass) {
      first_fail = r["value"];
      break;
    }
  }
  j["first_failing_value"] = first_fail;
  io::write_json((fs::path(dir) / "sweep.json").string(), j);
  for (auto const &r : results) {
    out << key << " = " << r["value"].get<double>() << ": ";
    if (r.contains("error")) {
      out << "error " << r["error"]["kind"].get<std::string>() << '\n';
    }
    else {
      out << (r["verdict"]["pass"].get<bool>() ? "PASS" : "FAIL") << '\n';
    }
  }
  out << "wrote " << dir << '\n';
}

std::vector<Command> commands()
{
  return {
    {"rh", "downstream state and Rankine-Hugoniot residuals", declare_rh, run_rh},
    {"profile", "full shock profile on a truncated domain", declare_profile, run_profile},
    {"kdvb", "KdV-Burgers profile", [](Config &c) { declare_kdvb(c, false); }, run_kdvb},
    {"kdvb-sweep", "KdV-Burgers monotonicity and tail-rate table over delta",
     [](Config &c) { declare_kdvb(c, true); }, run_kdvb_sweep},
    {"validate", "approximation order study of the first-order expansion", declare_validate, run_validate},
    {"evolve", "perturbed shock evolution with energy diagnostics", declare_evolve, run_evolve},
    {"diagnose", "energy functionals of a stored snapshot", declare_diagnose, run_diagnose},
    {"sweep", "independent evolve runs in parallel over one key", declare_sweep, run_sweep},
  };
}

void error_record(std::ostream &err, const std::string &sub, const std::string &kind, const std::string &msg,
                  const std::vector<double> &history = {})
{
  json j;
  j["error"] = kind;
  j["subcommand"] = sub;
  j["message"] = msg;
  if (!history.empty()) j["history"] = io::to_json(history);
  err << j.dump() << '\n';
}

} // namespace

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"ion-acoustic shock profiles: construction, approximation and stability"};
  app.require_subcommand(1);
  app.footer("Environment: IASHOCK_OUT sets the default output root.\n"
             "Exit codes: 0 success, 1 solver failure, 2 usage error.");

  std::vector<Command> const cmds = commands();
  // std::deque keeps element addresses stable for CLI11
  std::deque<Config> configs;
  std::deque<std::string> files;
  std::deque<std::map<std::string, std::string>> strings;
  std::deque<std::map<std::string, bool>> flags;
  std::vector<CLI::App *> subs;
  for (auto const &cmd : cmds) {
    Config &cfg = configs.emplace_back();
    cmd.declare(cfg);
    CLI::App *sub = app.add_subcommand(cmd.name, cmd.about);
    sub->add_option("--config", files.emplace_back(), "key = value file; flags override it");
    auto &sv = strings.emplace_back();
    auto &fv = flags.emplace_back();
    for (auto const &[key, e] : cfg.entries()) {
      if (e.value == "true" || e.value == "false") {
        sub->add_flag("--" + key + ",!--no-" + key, fv[key], e.help)->default_str(e.value);
      }
      else {
        sub->add_option("--" + key, sv[key], e.help)->default_str(e.value.empty() ? "\"\"" : e.value);
      }
    }
    subs.push_back(sub);
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  }
  catch (const CLI::CallForHelp &) {
    out << app.help();
    return ok;
  }
  catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  }
  catch (const CLI::ParseError &e) {
    std::string sub;
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) sub = cmds[i].name;
    }
    err << (sub.empty() ? app.help() : app.get_subcommand(sub)->help());
    error_record(err, sub, "UsageError", e.what());
    return usage_error;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    CLI::App *sub = subs[i];
    Config &cfg = configs[i];
    std::string const name = cmds[i].name;
    try {
      if (!files[i].empty()) cfg.parse_file(files[i]);
      for (auto const &[key, val] : strings[i]) {
        if (sub->get_option("--" + key)->count() > 0) cfg.set(key, val);
      }
      for (auto const &[key, val] : flags[i]) {
        if (sub->get_option("--" + key)->count() > 0) cfg.set(key, val ? "true" : "false");
      }
      cmds[i].run(cfg, out);
      return ok;
    }
    catch (const SolverError &e) {
      error_record(err, name, to_string(e.kind()), e.what(), e.history());
      bool const usage = e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::InvalidArgument;
      return usage ? usage_error : solver_failed;
    }
    catch (const std::exception &e) {
      error_record(err, name, "InternalError", e.what());
      return solver_failed;
    }
  }
  return usage_error;
}

int dispatch(int argc, char **argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

} // namespace iashock::cli
