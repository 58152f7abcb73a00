// dftfunclab: lattice energies, transport and convex kinetic solvers, and
// the bound evaluators behind them, with one JSON result envelope per run.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "dfl/acceptance.hpp"
#include "dfl/bounds.hpp"
#include "dfl/constants.hpp"
#include "dfl/crystal.hpp"
#include "dfl/errors.hpp"
#include "dfl/fock.hpp"
#include "dfl/io.hpp"
#include "dfl/mmot.hpp"
#include "dfl/parallel.hpp"
#include "dfl/tgc.hpp"
#include "dfl/zeta.hpp"

using namespace dfl;

namespace {

struct GlobalArgs {
  int threads = 0;
  std::string config;
  std::string out;
};

void emit(const Json& j, const std::string& out_path) {
  std::string text = j.dump(2);
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) throw InputError("cannot open output file '" + out_path + "'");
    f << text << "\n";
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::stod(cur));
  return out;
}

// "start:end:count", geometric
std::vector<double> parse_range(const std::string& text) {
  auto a = text.find(':');
  auto b = text.rfind(':');
  if (a == std::string::npos || b == a) return parse_list(text);
  double lo = std::stod(text.substr(0, a));
  double hi = std::stod(text.substr(a + 1, b - a - 1));
  int count = std::stoi(text.substr(b + 1));
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(lo * std::pow(hi / lo, double(i) / double(count - 1)));
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"density-functional bound laboratory"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalArgs ga;
  if (const char* env = std::getenv("DFTFUNCLAB_THREADS")) ga.threads = std::atoi(env);
  app.add_option("--threads", ga.threads, "worker cap (0 = all cores)");
  app.add_option("--config", ga.config, "flat key=value config file");
  app.add_option("--out", ga.out, "write the JSON result to this file");

  // ---- constants ----
  auto* c_const = app.add_subcommand("constants", "closed-form constants table");
  int dirac_order = 32;
  c_const->add_option("--dirac-order", dirac_order, "quadrature order for the exchange constant");

  // ---- zeta ----
  auto* c_zeta = app.add_subcommand("zeta", "lattice zeta function");
  std::string z_lattice = "Z3";
  double z_s = 1.0, z_tol = 1e-8, z_split = 1.0;
  std::string z_method = "auto";
  c_zeta->add_option("--lattice", z_lattice, "Z1 Z2 Z3 BCC FCC TRI")->required();
  c_zeta->add_option("--s", z_s, "exponent")->required();
  c_zeta->add_option("--tol", z_tol, "tolerance");
  c_zeta->add_option("--method", z_method, "auto|direct|ewald");
  c_zeta->add_option("--split", z_split, "splitting parameter");

  // ---- crystal ----
  auto* c_cr = app.add_subcommand("crystal", "finite crystal energies");
  std::string cr_mode = "floating", cr_lattice = "Z1", cr_kernel, cr_L = "8,16,32", cr_csv;
  double cr_s = 0.5, cr_margin = 2.0;
  int cr_order = 16;
  bool cr_fit = false;
  c_cr->add_option("--mode", cr_mode, "floating|clamped|modified")->required();
  c_cr->add_option("--lattice", cr_lattice)->required();
  c_cr->add_option("--s", cr_s, "riesz exponent");
  c_cr->add_option("--kernel", cr_kernel, "kernel spec (overrides --s)");
  c_cr->add_option("--L", cr_L, "comma-separated box sides");
  c_cr->add_option("--margin", cr_margin, "fluid margin (modified mode)");
  c_cr->add_option("--order", cr_order, "cell quadrature order");
  c_cr->add_flag("--fit", cr_fit, "fit a + b/L and report the limit");
  c_cr->add_option("--csv", cr_csv, "also write an L,value table");

  // ---- sce ----
  auto* c_sce = app.add_subcommand("sce", "strictly correlated transport");
  auto* c_sce_solve = c_sce->add_subcommand("solve", "solve the coupled minimization");
  std::string sce_density, sce_kernel = "riesz:1", sce_solver = "lp", sce_emit;
  int sce_n = 2;
  long long sce_budget = 200000;
  c_sce_solve->add_option("--density", sce_density, "density csv")->required();
  c_sce_solve->add_option("--n", sce_n, "particle number")->required();
  c_sce_solve->add_option("--kernel", sce_kernel, "riesz:S|coulomb3d|negabs|gaussian:A");
  c_sce_solve->add_option("--solver", sce_solver, "lp|sinkhorn");
  c_sce_solve->add_option("--emit", sce_emit, "write the plan JSON here");
  c_sce_solve->add_option("--budget", sce_budget, "cap on M^n");

  // ---- kinetic ----
  auto* c_kin = app.add_subcommand("kinetic", "convex kinetic solver and trial states");
  auto* c_kin_tgc = c_kin->add_subcommand("tgc", "dual-ascent minimal kinetic energy");
  std::string kin_density;
  double kin_tol = 1e-6;
  c_kin_tgc->add_option("--density", kin_density, "density csv (periodic grid)")->required();
  c_kin_tgc->add_option("--tol", kin_tol, "relative duality-gap tolerance");
  auto* c_kin_trial = c_kin->add_subcommand("trial", "explicit states");
  std::string trial_mode = "fermi", trial_density;
  double trial_rho0 = 1.0, trial_delta = 0.5, trial_l = 21.0;
  int trial_cells = 63, trial_n = 3;
  c_kin_trial->add_option("--mode", trial_mode, "fermi|marchyoung|layercake")->required();
  c_kin_trial->add_option("--density", trial_density, "density csv (marchyoung/layercake)");
  c_kin_trial->add_option("--rho0", trial_rho0, "constant density (fermi)");
  c_kin_trial->add_option("--cells", trial_cells, "grid cells (fermi)");
  c_kin_trial->add_option("--length", trial_l, "box length (fermi)");
  c_kin_trial->add_option("--n", trial_n, "particle number (marchyoung)");
  c_kin_trial->add_option("--delta", trial_delta, "window width (layercake)");

  // ---- fock ----
  auto* c_fock = app.add_subcommand("fock", "lattice duality lab");
  auto* c_fock_dual = c_fock->add_subcommand("dual", "legendre dual of the lattice functional");
  std::string fock_density, fock_kernel = "riesz:0.5", fock_mode = "gc";
  int fock_sites = 6;
  double fock_g = 1.0, fock_tol = 1e-6;
  c_fock_dual->add_option("--sites", fock_sites, "ring sites (<= 12)")->required();
  c_fock_dual->add_option("--kernel", fock_kernel, "pair kernel");
  c_fock_dual->add_option("--g", fock_g, "coupling");
  c_fock_dual->add_option("--density", fock_density, "site occupation csv")->required();
  c_fock_dual->add_option("--mode", fock_mode, "gc|canonical");
  c_fock_dual->add_option("--tol", fock_tol, "gap tolerance");

  // ---- bounds ----
  auto* c_b = app.add_subcommand("bounds", "combined bound evaluators");
  auto* c_b_lda = c_b->add_subcommand("lda", "local-approximation error functional");
  std::string blda_density, blda_mode = "quantum";
  double blda_C = 1.0, blda_eps = 0.1;
  bool blda_opt = false;
  c_b_lda->add_option("--density", blda_density)->required();
  c_b_lda->add_option("--C", blda_C, "error-term constant");
  c_b_lda->add_option("--mode", blda_mode, "quantum|classical");
  c_b_lda->add_option("--eps", blda_eps, "epsilon (ignored with --optimize)");
  c_b_lda->add_flag("--optimize", blda_opt, "optimize over epsilon");
  auto* c_b_probe = c_b->add_subcommand("probe", "scaling exponent probe");
  std::string probe_mode = "quantum", probe_N = "1e3:1e9:10", probe_density;
  c_b_probe->add_option("--mode", probe_mode, "quantum|classical");
  c_b_probe->add_option("--N", probe_N, "start:end:count (geometric)");
  c_b_probe->add_option("--density", probe_density, "unit-mass profile csv (default: gaussian)");

  // ---- verify ----
  auto* c_ver = app.add_subcommand("verify", "run the acceptance gate");
  bool ver_light = false;
  c_ver->add_flag("--skip-heavy", ver_light, "skip the d=3 container runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 4;
  }

  try {
    set_thread_cap(ga.threads);
    std::map<std::string, std::string> config;
    if (!ga.config.empty()) config = load_config(ga.config);
    auto cfg = [&](const std::string& key, double fallback) {
      auto it = config.find(key);
      return it == config.end() ? fallback : std::stod(it->second);
    };
    Timer timer;
    RunMeta meta;
    meta.seed = 20240817ull;

    if (*c_const) {
      meta.subcommand = "constants";
      auto table = constants_table(dirac_order);
      Json rows = Json::array();
      for (const auto& r : table) {
        Json e;
        e["name"] = r.name;
        e["value"] = r.value;
        e["formula"] = r.formula;
        e["anchor"] = r.anchor;
        rows.push_back(e);
      }
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, Json::object(), Json{{"constants", rows}}), ga.out);
      return 0;
    }

    if (*c_zeta) {
      meta.subcommand = "zeta";
      meta.params = {{"lattice", z_lattice}, {"s", z_s}, {"tol", z_tol}, {"method", z_method}};
      ZetaMethod method = ZetaMethod::automatic;
      if (z_method == "direct") method = ZetaMethod::direct;
      if (z_method == "ewald") method = ZetaMethod::ewald;
      auto r = epstein_zeta(Lattice::from_name(z_lattice), z_s, z_tol, method, z_split);
      Json out;
      out["value"] = r.value;
      out["method"] = r.method;
      out["error_estimate"] = r.error_estimate;
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out, Json{{"tol", z_tol}}), ga.out);
      return 0;
    }

    if (*c_cr) {
      meta.subcommand = "crystal";
      auto kernel = cr_kernel.empty() ? InteractionKernel::riesz(cr_s) : parse_kernel(cr_kernel);
      auto Ls = parse_list(cr_L);
      CrystalMode mode = CrystalMode::floating;
      if (cr_mode == "clamped") mode = CrystalMode::clamped;
      else if (cr_mode == "modified") mode = CrystalMode::modified;
      else if (cr_mode != "floating") throw InputError("crystal: unknown mode " + cr_mode);
      meta.params = {{"mode", cr_mode}, {"lattice", cr_lattice}, {"kernel", kernel.name()},
                     {"L", Ls}, {"fit", cr_fit}, {"margin", cr_margin}, {"order", cr_order}};
      auto lattice = Lattice::from_name(cr_lattice);
      auto sweep = crystal_sweep(lattice, mode, kernel, Ls, cr_fit, cr_margin, cr_order);
      Json out;
      Json table = Json::array();
      for (std::size_t i = 0; i < Ls.size(); ++i)
        table.push_back(Json{{"L", Ls[i]}, {"per_volume", sweep.values[i]}});
      out["table"] = table;
      if (cr_fit) {
        out["limit"] = sweep.limit;
        out["slope"] = sweep.slope;
        out["fit_residual"] = sweep.residual;
      }
      if (!cr_csv.empty()) {
        std::ofstream f(cr_csv);
        f << "# columns: L,per_volume\n";
        char buf[80];
        for (std::size_t i = 0; i < Ls.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", Ls[i], sweep.values[i]);
          f << buf;
        }
      }
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out), ga.out);
      return 0;
    }

    if (*c_sce_solve) {
      meta.subcommand = "sce solve";
      auto kernel = parse_kernel(sce_kernel);
      auto rho = read_density_csv(sce_density);
      meta.params = {{"density", sce_density}, {"n", sce_n}, {"kernel", kernel.name()},
                     {"solver", sce_solver}, {"budget", sce_budget}};
      meta.input_digests[sce_density] = digest_file(sce_density);
      Json out;
      if (sce_solver == "lp") {
        MmotOptions opt;
        opt.budget = static_cast<long long>(cfg("sce.budget", double(sce_budget)));
        auto r = solve_mmot(rho, sce_n, kernel, opt);
        out["value"] = r.value;
        out["gap"] = r.lp_gap;
        out["iterations"] = r.iterations;
        Json tuples = Json::array();
        for (const auto& [t, p] : r.plan.entries) tuples.push_back(Json{{"cells", t}, {"mass", p}});
        out["plan"] = tuples;
        out["dual_potential"] = r.potential.v;
        out["dual_objective"] = r.potential.objective;
        if (!sce_emit.empty()) emit(out, sce_emit);
      } else if (sce_solver == "sinkhorn") {
        auto r = sinkhorn_mmot(rho, sce_n, kernel);
        out["value"] = r.value;
        out["marginal_error"] = r.marginal_error;
        out["eps_schedule"] = r.eps_schedule;
        out["iterations"] = r.iterations;
      } else {
        throw InputError("sce solve: unknown solver " + sce_solver);
      }
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out), ga.out);
      return 0;
    }

    if (*c_kin_tgc) {
      meta.subcommand = "kinetic tgc";
      auto rho = read_density_csv(kin_density, std::nullopt, Boundary::periodic);
      meta.params = {{"density", kin_density}, {"tol", kin_tol}};
      meta.input_digests[kin_density] = digest_file(kin_density);
      auto r = solve_tgc(rho, kin_tol);
      Json out;
      out["primal"] = r.report.primal;
      out["dual"] = r.report.dual;
      out["gap"] = r.report.gap;
      out["converged"] = r.report.converged;
      out["iterations"] = r.report.iterations;
      out["marginal_residual"] = r.report.marginal_residual;
      out["hoffmann_ostenhof_slack"] = hoffmann_ostenhof_slack(rho.grid(), r.gamma);
      out["lieb_thirring_slack"] = lieb_thirring_slack(rho.grid(), r.gamma);
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out, Json{{"tol", kin_tol}}), ga.out);
      return r.report.converged ? 0 : 3;
    }

    if (*c_kin_trial) {
      meta.subcommand = "kinetic trial";
      Json out;
      if (trial_mode == "fermi") {
        Grid g({std::size_t(trial_cells)}, {trial_l}, Boundary::periodic);
        auto ff = free_fermi(g, trial_rho0);
        out["energy"] = ff.energy;
        out["energy_per_volume"] = ff.energy / trial_l;
        out["modes"] = ff.modes;
      } else if (trial_mode == "marchyoung") {
        auto rho = read_density_csv(trial_density);
        meta.input_digests[trial_density] = digest_file(trial_density);
        auto my = march_young(rho, trial_n);
        out["value"] = my.value;
        out["tf_term"] = my.tf_term;
        out["gradient_term"] = my.gradient_term;
        out["orthonormality_error"] = my.orthonormality_error;
        out["phase_indices"] = my.phase_indices;
      } else if (trial_mode == "layercake") {
        auto rho = read_density_csv(trial_density, std::nullopt, Boundary::periodic);
        meta.input_digests[trial_density] = digest_file(trial_density);
        auto lc = layer_cake_dm(rho, trial_delta);
        out["energy"] = lc.energy;
        out["epsilon_theory"] = lc.epsilon_theory;
        out["gradient_coefficient"] = lc.gradient_coefficient;
        out["marginal_residual"] = lc.marginal_residual;
        out["eigenvalue_range"] = Json{lc.min_eigenvalue, lc.max_eigenvalue};
      } else {
        throw InputError("kinetic trial: unknown mode " + trial_mode);
      }
      meta.params = {{"mode", trial_mode}};
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out), ga.out);
      return 0;
    }

    if (*c_fock_dual) {
      meta.subcommand = "fock dual";
      auto kernel = parse_kernel(fock_kernel);
      auto rho_density = read_density_csv(fock_density);
      if (rho_density.size() != std::size_t(fock_sites))
        throw InputError("fock dual: density rows must equal --sites");
      std::vector<double> rho(rho_density.size());
      for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = rho_density.mass(i);
      auto sys = make_ring_system(fock_sites, kernel, fock_g);
      DualMode mode = fock_mode == "canonical" ? DualMode::canonical : DualMode::grand;
      auto r = levy_lieb_dual(sys, rho, mode, fock_tol);
      Json out;
      out["dual"] = r.dual;
      out["primal"] = r.primal;
      out["gap"] = r.gap;
      out["mixture_residual"] = r.mixture_residual;
      out["v"] = r.v;
      out["sector_weights"] = r.sector_weights;
      out["converged"] = r.converged;
      meta.params = {{"sites", fock_sites}, {"kernel", kernel.name()}, {"g", fock_g},
                     {"mode", fock_mode}, {"tol", fock_tol}};
      meta.input_digests[fock_density] = digest_file(fock_density);
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out, Json{{"tol", fock_tol}}), ga.out);
      return r.converged ? 0 : 3;
    }

    if (*c_b_lda) {
      meta.subcommand = "bounds lda";
      auto rho = read_density_csv(blda_density);
      meta.input_digests[blda_density] = digest_file(blda_density);
      LdaMode mode = blda_mode == "classical" ? LdaMode::classical : LdaMode::quantum;
      Json out;
      auto I = density_integrals(rho);
      out["integrals"] = Json{{"mass", I.mass},
                              {"rho_kin", I.rho_kin},
                              {"rho_sq", I.rho_sq},
                              {"grad_sqrt_sq", I.grad_sqrt_sq},
                              {"grad_sqrt_4", I.grad_sqrt_4},
                              {"grad_cbrt_4", I.grad_cbrt_4},
                              {"gradient_method", I.gradient_method}};
      if (blda_opt) {
        auto r = optimize_epsilon(rho, blda_C, mode);
        out["eps_star"] = r.eps_star;
        out["value"] = r.value;
        out["stationarity"] = r.stationarity;
      } else {
        out["eps"] = blda_eps;
        out["value"] = lda_error(rho, blda_eps, blda_C, mode);
      }
      meta.params = {{"C", blda_C}, {"mode", blda_mode}, {"optimize", blda_opt}};
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out), ga.out);
      return 0;
    }

    if (*c_b_probe) {
      meta.subcommand = "bounds probe";
      LdaMode mode = probe_mode == "classical" ? LdaMode::classical : LdaMode::quantum;
      DiscreteDensity profile = [&]() {
        if (!probe_density.empty()) return read_density_csv(probe_density);
        Grid g({10, 10, 10}, {2.0, 2.0, 2.0});
        auto raw = density_from_function(g, [](const std::vector<double>& x) {
          double r2 = 0.0;
          for (double c : x) r2 += (c - 1.0) * (c - 1.0);
          return std::exp(-2.0 * r2);
        });
        std::vector<double> m = raw.masses();
        double tot = raw.total_mass();
        for (auto& v : m) v /= tot;
        return DiscreteDensity(g, m);
      }();
      auto r = exponent_probe(profile, parse_range(probe_N), mode);
      Json out;
      out["slope"] = r.slope;
      Json table = Json::array();
      for (std::size_t i = 0; i < r.n_values.size(); ++i)
        table.push_back(Json{{"N", r.n_values[i]}, {"error", r.errors[i]}});
      out["table"] = table;
      meta.params = {{"mode", probe_mode}, {"N", probe_N}};
      meta.wall_time_s = timer.seconds();
      emit(result_envelope(meta, meta.params, out), ga.out);
      return 0;
    }

    if (*c_ver) {
      meta.subcommand = "verify";
      AcceptanceOptions opt;
      opt.heavy = !ver_light;
      auto rep = run_acceptance(opt, true);
      meta.wall_time_s = timer.seconds();
      Json envelope = result_envelope(meta, Json{{"skip_heavy", ver_light}}, rep.to_json());
      emit(envelope, ga.out.empty() ? "verify_report.json" : ga.out);
      return rep.all_passed ? 0 : 2;
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 4;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return 3;
  } catch (const ToleranceFailure& e) {
    std::fprintf(stderr, "tolerance failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
