#pragma once

// Run configuration, experiment presets, diagnostics records, persistence
// (series.csv, snapshot_<t>.fld, summary.json, sweep.csv), and the four CLI
// commands: run, verify, sweep, plot.

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lyz/functionals.hpp"
#include "lyz/integrator.hpp"

namespace lyz {

enum class Formulation { surface, potential };
const char* to_string(Formulation f);

// One cosine term of inline initial data: amplitude * cos(2 pi m.x + phase).
struct InlineTerm {
  std::array<int, kMaxRealAxes> m{};
  double amplitude = 0.0;
  double phase = 0.0;
};

struct RunConfig {
  Formulation formulation = Formulation::surface;
  int n_complex = 1;
  int N = 32;
  double lambda = -1.0;
  double kappa = 2.0;
  double t_end = 1.0;
  Scheme scheme = Scheme::rk4;
  double dt = 1e-3;  // <= 0 (or "adaptive" in the file) selects adaptive
  int sample_stride = 10;
  double stop_tolerance = 0.0;
  double cfl_safety = 0.8;
  int snapshot_stride = 0;  // samples between snapshots; 0 = final state only
  std::string initial = "stationary";  // preset name or "inline"
  std::string output_dir = "out";
  unsigned seed = 1;
  double amplitude = 0.1;  // band noise sup-norm before admissibility rescale
  int max_mode = 8;        // band noise per-axis mode bound
  double phi0 = 0.0;       // constant presets: metric field value
  double tau0 = 1.0;       // constant presets: coupled field value
  double alpha_coeff = 0.0;  // 0 = use -lambda (class-matched)
  std::string resume_from;   // optional snapshot to continue from
  // Inline cosine terms per field name (phi, tau, varphi, F, alpha_u).
  std::map<std::string, std::vector<InlineTerm>> inline_fields;
};

// Shipped presets, one per acceptance protocol: stationary, perturbed-surface,
// perturbed-potential-n1, perturbed-potential-n2, kappa1-surface,
// constant-data-ode.
const std::vector<std::string>& preset_names();
RunConfig preset_config(const std::string& name);  // throws ConfigError

// Flat key = value text; sections [initial <field>] hold inline cosine terms
// (one per line: 2n mode indices, amplitude, phase). The `initial` key seeds
// defaults from the named preset before the file's own keys override them.
// Unknown keys and malformed values throw ConfigError with a 1-based line.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

// Deterministic band-limited noise: sum of cosines with per-axis modes in
// [-max_mode, max_mode], rescaled so the sup-norm equals amplitude.
Field band_noise(const Grid& g, unsigned seed, double amplitude, int max_mode);

// Initial data for a config (fields plus the closed form for potential runs).
// Potential noise is rescaled until the metric eigenvalue floor stays >= 0.5.
struct InitialData {
  Field a, b;
  ClosedForm alpha0;
  double t0 = 0.0;
};
InitialData make_initial(const RunConfig& cfg, const Grid& g);

// ---- diagnostics records ---------------------------------------------------

// One sample row of series.csv. Every field is a double; quantities that do
// not apply to the active formulation stay NaN.
struct DiagnosticsRecord {
  double t = 0.0;
  // functional values
  double E, E_hat, Q, I, J, mu, M;
  double dE_dt_theory, dE_hat_dt_theory, dM_dt_theory;
  double entropy, lower_bound_E, phi_mean;
  // monitors
  double tau_min, tau_max, r_min, r_max, combined_max, k_equiv;
  double r_residual, combined_residual;  // vs the previous sample (surface)
  double rhs_metric_sup, rhs_form_sup;
  double volume, gauss_bonnet, metric_min_eig;
  double phi_plus_F_sup, rhs_F_mean;  // potential only

  DiagnosticsRecord();
};

// Stable column order; first column is t.
const std::vector<std::string>& record_columns();
std::string record_header();
// Comma-separated row with 17 significant digits (lossless round-trip).
std::string record_row(const DiagnosticsRecord& r);
DiagnosticsRecord parse_record_row(const std::string& line);

// prev (may be null) supplies the across-sample residual diagnostics.
DiagnosticsRecord surface_record(const SurfaceState& s, const SurfaceParams& p,
                                 const SurfaceState* prev);
DiagnosticsRecord potential_record(const PotentialState& s, const FlowProblem& p);

// ---- snapshots ---------------------------------------------------------------

// snapshot_<t>.fld: one JSON header line {t, n_complex, N, fields} followed by
// raw little-endian float64 in row-major order, field by field.
struct Snapshot {
  double t = 0.0;
  int n_complex = 1;
  int N = 0;
  std::vector<std::string> field_names;
  std::vector<Field> fields;
};
void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

// ---- orchestration -----------------------------------------------------------

struct RunArtifacts {
  RunResult result;
  std::vector<DiagnosticsRecord> records;
  // Largest increase between consecutive samples of the run's monotone
  // functional (E for surface, M for potential); 0 when it never increased.
  double monotonicity_violation = 0.0;

  explicit RunArtifacts(RunResult r) : result(std::move(r)) {}
};

// Execute one configured run. With persist = true, cfg.output_dir receives
// series.csv, periodic snapshots, and summary.json.
RunArtifacts execute_run(const RunConfig& cfg, bool persist);

// ---- commands ------------------------------------------------------------------

// Exit codes: 0 success, 2 config/usage error, 3 runtime abort.
int cmd_run(const std::string& config_path);
// Pass/fail table of named invariant checks; exit 0 iff all pass (1 on
// failure, 2 for an unknown --only name). Empty `only` runs everything.
int cmd_verify(const std::string& only);
const std::vector<std::string>& verify_check_names();
// One child run per kappa (parallel, capped by LYZ_THREADS); writes sweep.csv.
int cmd_sweep(const std::string& config_path, const std::vector<double>& kappas);
// One SVG line chart per column (plot_<col>.svg beside the csv).
int cmd_plot(const std::string& csv_path, const std::vector<std::string>& columns,
             bool log_scale);

}  // namespace lyz
