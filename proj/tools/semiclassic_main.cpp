#include <CLI11.hpp>

#include <semiclassic/harness.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace semiclassic;

namespace {

// Keys any scenario may consume; per-scenario validation happens in
// run_scenario so a config cannot smuggle options into the wrong experiment.
const std::vector<std::string> kConfigKeys{
    "hbar", "tol", "m", "theta", "T", "n_particles", "a"};

int report(const RunManifest& man) {
  std::cout << (man.success ? "ok" : "FAILED") << ": " << man.scenario;
  if (!man.message.empty()) std::cout << " (" << man.message << ")";
  std::cout << "\n";
  for (const auto& [p, c] : man.files) std::cout << "  " << p << "\n";
  return man.success ? 0 : 1;
}

/// Plain-text sampled state: header "x0 dx hbar n" then n lines "re im".
SampledState load_state(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open state file " + path);
  SampledState s;
  std::size_t n = 0;
  if (!(f >> s.x0 >> s.dx >> s.hbar >> n))
    throw std::runtime_error("bad state header in " + path);
  s.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Real re, im;
    if (!(f >> re >> im)) throw std::runtime_error("truncated state file " + path);
    s.u[i] = Complex(re, im);
  }
  return s;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiclassical Schrodinger / Liouville experiment driver"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // -- run --------------------------------------------------------------
  auto* run = app.add_subcommand("run", "execute a named scenario");
  std::string scenario, config_path, out_dir = "out";
  double hbar_override = 0, tol_override = 0;
  int jobs = 1;
  run->add_option("scenario", scenario,
                  "eoc_doublewell | eoc_nonsmooth | adaptive_tdp | "
                  "split_noninterference | collide_interference | wkb_slice | "
                  "rate_c1a")
      ->required();
  run->add_option("--config", config_path, "key/value parameter file");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--hbar", hbar_override, "override hbar");
  run->add_option("--tol", tol_override, "override solver tolerance");
  run->add_option("--jobs", jobs, "worker count (single-process runs ignore it)");

  // -- eoc --------------------------------------------------------------
  auto* eoc_cmd = app.add_subcommand("eoc", "convergence-order table");
  std::string table;
  std::string eoc_out = "out";
  eoc_cmd->add_option("table", table, "doublewell | nonsmooth")->required();
  eoc_cmd->add_option("--out", eoc_out, "output directory");

  // -- emp-sweep --------------------------------------------------------
  auto* sweep = app.add_subcommand("emp-sweep",
                                   "excess-mass landscape over the theta grid");
  std::vector<double> sweep_hbars{1e-2};
  double sweep_tol = 0;
  std::string sweep_out = "out";
  sweep->add_option("--hbar", sweep_hbars, "hbar values");
  sweep->add_option("--tol", sweep_tol, "solver tolerance (0 = default ladder)");
  sweep->add_option("--out", sweep_out, "output directory");

  // -- rate -------------------------------------------------------------
  auto* rate = app.add_subcommand("rate", "quantum/classical discrepancy rate");
  double rate_a = 0.5;
  std::string rate_out = "out";
  rate->add_option("--a", rate_a, "Hoelder exponent of the saddle")->required();
  rate->add_option("--out", rate_out, "output directory");

  // -- transform --------------------------------------------------------
  auto* tf = app.add_subcommand("transform", "phase-space transform of a state");
  std::string state_path, kind = "swt", tf_out;
  double sx = 1.0, sk = 1.0;
  tf->add_option("state-file", state_path, "sampled state (x0 dx hbar n; re im rows)")
      ->required();
  tf->add_option("--kind", kind, "wigner | swt | husimi");
  tf->add_option("--sigma-x", sx, "x smoothing width");
  tf->add_option("--sigma-k", sk, "k smoothing width");
  tf->add_option("--out", tf_out, "output base path (default: state file + kind)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Scenario s;
      s.name = scenario;
      s.out_dir = out_dir;
      if (!config_path.empty()) s.params = parse_config_file(config_path, kConfigKeys);
      auto set = [&](const std::string& k, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        s.params[k] = os.str();
      };
      if (hbar_override > 0) set("hbar", hbar_override);
      if (tol_override > 0) set("tol", tol_override);
      return report(run_scenario(s));
    }
    if (*eoc_cmd) {
      if (table != "doublewell" && table != "nonsmooth")
        throw CLI::ValidationError("table must be doublewell or nonsmooth");
      Scenario s;
      s.name = "eoc_" + table;
      s.out_dir = eoc_out;
      return report(run_scenario(s));
    }
    if (*sweep) {
      const std::vector<Real> thetas{2 / 24.0,  3 / 24.0,  4 / 24.0,  6 / 24.0,
                                     8 / 24.0,  9 / 24.0,  12 / 24.0, 14 / 24.0,
                                     17 / 24.0, 18 / 24.0, 21 / 24.0, 23 / 24.0};
      std::vector<Real> hb(sweep_hbars.begin(), sweep_hbars.end());
      const auto rows = emp_sweep(thetas, hb, sweep_tol);
      std::filesystem::create_directories(sweep_out);
      const std::string csv = sweep_out + "/emp.csv";
      write_emp_csv(rows, csv);
      write_plot_script(csv, sweep_out + "/emp.gp", "excess mass vs theta", 1, 3);
      std::cout << "ok: emp-sweep (" << rows.size() << " rows)\n  " << csv << "\n";
      return 0;
    }
    if (*rate) {
      Scenario s;
      s.name = "rate_c1a";
      s.out_dir = rate_out;
      std::ostringstream os;
      os.precision(17);
      os << rate_a;
      s.params["a"] = os.str();
      return report(run_scenario(s));
    }
    if (*tf) {
      const SampledState s = load_state(state_path);
      PhaseSpaceField f;
      if (kind == "wigner")
        f = wigner(s);
      else if (kind == "swt")
        f = swt(s, sx, sk);
      else if (kind == "husimi")
        f = husimi(s);
      else
        throw CLI::ValidationError("kind must be wigner, swt or husimi");
      const std::string base = tf_out.empty() ? state_path + "." + kind : tf_out;
      save_field(f, base);
      std::cout << "ok: " << base << ".meta / .bin (" << f.x.size() << " x "
                << f.k.size() << ")\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
