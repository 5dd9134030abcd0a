#pragma once

#include <semiclassic/initial_data.hpp>
#include <semiclassic/liouville.hpp>
#include <semiclassic/observables.hpp>
#include <semiclassic/schrodinger.hpp>
#include <semiclassic/wigner.hpp>
#include <map>
#include <string>
#include <vector>

namespace semiclassic {

inline constexpr const char* kVersion = "semiclassic 1.0.0";

/// Flat key/value configuration ("key value" per line, # comments). Parsing
/// rejects keys outside the allowed set.
std::map<std::string, std::string> parse_config_file(
    const std::string& path, const std::vector<std::string>& allowed_keys);
std::map<std::string, std::string> parse_config_text(
    const std::string& text, const std::vector<std::string>& allowed_keys);

struct Scenario {
  std::string name; // eoc_doublewell, eoc_nonsmooth, adaptive_tdp,
                    // split_noninterference, collide_interference, wkb_slice,
                    // rate_c1a
  std::map<std::string, std::string> params; // overrides, validated per scenario
  std::string out_dir = "out";
};

struct RunManifest {
  std::string scenario;
  std::vector<std::pair<std::string, std::string>> params; // resolved
  std::string version = kVersion;
  Real wall_seconds = 0;
  std::vector<std::pair<std::string, std::string>> files; // path, checksum
  bool success = false;
  std::string message;
};

RunManifest run_scenario(const Scenario& s);
void write_manifest(const RunManifest& m, const std::string& path);

/// FNV-1a 64-bit over the file bytes, hex-encoded.
std::string file_checksum(const std::string& path);

// -- experiment drivers (also used directly by the acceptance suite) --

struct EocTable {
  std::vector<Real> space_sizes, es, eoc_s;
  std::vector<Real> time_sizes, et, eoc_t;
};
EocTable eoc_doublewell_table();
EocTable eoc_nonsmooth_table();
void write_eoc_csv(const EocTable& t, const std::string& path);

/// Full quantum/classical pipeline for the corner-potential studies:
/// adaptive solve, transform snapshots, particle sampling at t = 0,
/// partition, classical transport, paired moment-family measurements.
struct SplitOptions {
  Real hbar = 1e-2;
  Real m = 1.0;         // phase multiplier of the gaussian datum
  Real theta = 0.0;     // collision runs only
  bool collision = false;
  InitialFamily family = InitialFamily::gaussian_wkb; // collision overrides
  Real tol = 1e-2;
  Real T = 2.3577;
  std::vector<Real> snapshot_times; // defaults to the observation window
  Potential potential = Potential::corner_splitting();
  int n_particles = 40000;
};

struct SplitResult {
  bool success = false;
  std::string failure_reason;
  std::vector<MeasurementRow> rows; // one per (snapshot time, symbol)
  Real correlation = 0;             // quantum vs classical over t > 0 rows
  PartitionWeights weights;
  Real right_mass_final = 0;        // quantum mass on {x > 0} at T
  Real emp_quantum = 0, emp_classical = 0;
  Real emp_bound = 0;
  std::vector<InterferenceEvent> events;
  std::vector<Snapshot> snapshots;
  Real norm_U = 1;
};
SplitResult run_split(const SplitOptions& opt);

struct EmpRow {
  Real theta, hbar, emp_quantum, emp_classical, bound;
};
std::vector<EmpRow> emp_sweep(const std::vector<Real>& thetas,
                              const std::vector<Real>& hbars, Real tol = 0);
void write_emp_csv(const std::vector<EmpRow>& rows, const std::string& path);

/// Default tolerance ladder: 1e-2 for hbar >= 1e-2, 2e-2 below.
Real default_tol(Real hbar);

struct RateResult {
  std::vector<Real> hbars, D;
  Real slope = 0;
  bool monotone = false;
  bool fitted = false;
};
RateResult rate_experiment(Real a_hoelder, const std::vector<Real>& hbars,
                           const std::vector<TestFunction>& phis,
                           const Potential* potential_override = nullptr);
std::vector<TestFunction> default_rate_test_functions();
void write_rate_csv(const RateResult& r, const std::string& path);

/// <P, phi> = sum_j M_j phi(X_j, K_j) for a sampled test function.
Real pair_ensemble(const Ensemble& e, const TestFunction& phi);

/// Companion plotting script (gnuplot syntax) for an emitted CSV table.
void write_plot_script(const std::string& csv_path, const std::string& gp_path,
                       const std::string& title, int x_col, int y_col);

} // namespace semiclassic
