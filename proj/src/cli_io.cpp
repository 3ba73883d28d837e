#include "lyz/cli_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "lyz/errors.hpp"
#include "lyz/geometry.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace lyz {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("expected a number, got '" + v + "'", line);
  return x;
}

long parse_long(const std::string& v, int line) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("expected an integer, got '" + v + "'", line);
  return x;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

}  // namespace

const char* to_string(Formulation f) {
  return f == Formulation::potential ? "potential" : "surface";
}

// ---- presets and initial data -----------------------------------------------

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "stationary",           "perturbed-surface", "perturbed-potential-n1",
      "perturbed-potential-n2", "kappa1-surface",    "constant-data-ode"};
  return names;
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.initial = name;
  c.output_dir = "out/" + name;
  if (name == "stationary") {
    c.N = 32;
    c.dt = 1e-3;
    c.t_end = 1.0;
    c.sample_stride = 10;
    c.stop_tolerance = 1e-9;
    c.amplitude = 0.0;
    c.max_mode = 0;
  } else if (name == "perturbed-surface" || name == "kappa1-surface") {
    c.N = 128;
    c.kappa = name == "kappa1-surface" ? 1.0 : 2.0;
    c.scheme = Scheme::imex;
    c.dt = 0.0;
    c.t_end = 50.0;
    c.sample_stride = 50;
    c.stop_tolerance = 1e-7;
    c.amplitude = 0.1;
    c.max_mode = 8;
    c.seed = name == "kappa1-surface" ? 777 : 1234;
  } else if (name == "perturbed-potential-n1") {
    c.formulation = Formulation::potential;
    c.N = 128;
    c.scheme = Scheme::imex;
    c.dt = 0.0;
    c.t_end = 50.0;
    c.sample_stride = 50;
    c.stop_tolerance = 1e-7;
    c.amplitude = 0.1;
    c.max_mode = 8;
    c.seed = 4321;
  } else if (name == "perturbed-potential-n2") {
    c.formulation = Formulation::potential;
    c.n_complex = 2;
    c.N = 16;
    c.scheme = Scheme::imex;
    c.dt = 0.0;
    c.t_end = 1.0;
    c.sample_stride = 10;
    c.amplitude = 0.02;
    c.max_mode = 3;
    c.seed = 999;
  } else if (name == "constant-data-ode") {
    c.N = 32;
    c.dt = 1e-3;
    c.t_end = 5.0;
    c.sample_stride = 100;
    c.amplitude = 0.0;
    c.max_mode = 0;
    c.tau0 = 0.5;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

Field band_noise(const Grid& g, unsigned seed, double amplitude, int max_mode) {
  if (amplitude == 0.0 || max_mode <= 0) return Field(g);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  const int axes = g.real_axes();
  Field out(g);
  for (int term = 0; term < 12; ++term) {
    std::array<int, kMaxRealAxes> m{};
    bool zero = true;
    while (zero) {
      zero = true;
      for (int a = 0; a < axes; ++a) {
        m[a] = mode(rng);
        if (m[a] != 0) zero = false;
      }
    }
    const double w = unit(rng), ph = pi * unit(rng);
    out += Field::sample(g, [&](const std::array<double, kMaxRealAxes>& x) {
      double arg = ph;
      for (int a = 0; a < axes; ++a) arg += 2.0 * pi * m[a] * x[a];
      return w * std::cos(arg);
    });
  }
  const double s = sup_norm(out);
  if (s > 0.0) out *= amplitude / s;
  return out;
}

namespace {

Field inline_field(const Grid& g, const std::vector<InlineTerm>& terms) {
  Field out(g);
  for (const InlineTerm& term : terms) {
    out += Field::sample(g, [&](const std::array<double, kMaxRealAxes>& x) {
      double arg = term.phase;
      for (int a = 0; a < g.real_axes(); ++a) arg += 2.0 * pi * term.m[a] * x[a];
      return term.amplitude * std::cos(arg);
    });
  }
  return out;
}

Field inline_or(const RunConfig& cfg, const Grid& g, const char* name, double fill) {
  auto it = cfg.inline_fields.find(name);
  if (it == cfg.inline_fields.end()) return Field(g, fill);
  Field f = inline_field(g, it->second);
  if (fill != 0.0) f += fill;
  return f;
}

// Rescale a candidate potential until the metric eigenvalue floor is >= 0.5.
// The floor is affine in the scale, so one correction is exact.
Field admissible_potential(Field v) {
  const double e = metric_min_eigenvalue(v);
  if (e < 0.5) v *= 0.5 / (1.0 - e);
  return v;
}

}  // namespace

InitialData make_initial(const RunConfig& cfg, const Grid& g) {
  const double c_alpha = cfg.alpha_coeff != 0.0 ? cfg.alpha_coeff : -cfg.lambda;
  Field u_alpha(g);
  if (auto it = cfg.inline_fields.find("alpha_u"); it != cfg.inline_fields.end())
    u_alpha = inline_field(g, it->second);
  InitialData init{Field(g), Field(g), ClosedForm(c_alpha, std::move(u_alpha)), 0.0};

  const bool potential = cfg.formulation == Formulation::potential;
  const std::string& kind = cfg.initial;
  if (kind == "inline") {
    if (potential) {
      init.a = inline_or(cfg, g, "varphi", 0.0);
      init.b = inline_or(cfg, g, "F", 0.0);
    } else {
      init.a = inline_or(cfg, g, "phi", 0.0);
      init.b = inline_or(cfg, g, "tau", cfg.tau0);
    }
  } else if (kind == "stationary") {
    if (!potential) {
      init.a = Field(g, cfg.phi0);
      init.b = Field(g, cfg.tau0);
    }
  } else if (kind == "constant-data-ode") {
    init.a = Field(g, cfg.phi0);
    init.b = Field(g, cfg.tau0);
  } else if (kind == "perturbed-surface" || kind == "kappa1-surface") {
    if (potential)
      throw ConfigError("preset '" + kind + "' needs formulation = surface");
    init.a = band_noise(g, cfg.seed, cfg.amplitude, cfg.max_mode);
    init.b = Field(g, 1.0) + band_noise(g, cfg.seed + 1, cfg.amplitude, cfg.max_mode);
    if (field_min(init.b) <= 0.0)
      throw ConfigError("preset noise amplitude drives tau nonpositive");
  } else if (kind == "perturbed-potential-n1" || kind == "perturbed-potential-n2") {
    if (!potential)
      throw ConfigError("preset '" + kind + "' needs formulation = potential");
    init.a = admissible_potential(band_noise(g, cfg.seed, cfg.amplitude, cfg.max_mode));
    Field f = 0.5 * band_noise(g, cfg.seed + 1, cfg.amplitude, cfg.max_mode);
    // Keep alpha_0 - i ddbar F inside the positive cone so the induced trace
    // starts positive.  The eigenvalue floor is affine in the scale of F when
    // the fixed part of alpha is a multiple of omega_0 (as in the presets),
    // so one correction lands on the target; the loop is a safety net for
    // inline alpha potentials.
    if (c_alpha > 0.0) {
      auto cone_floor = [&](const Field& F) {
        return metric_min_eigenvalue((1.0 / c_alpha) *
                                     (init.alpha0.potential_u - F));
      };
      const double e0 = cone_floor(Field(g));
      const double e1 = cone_floor(f);
      if (e0 > 0.5 && e1 < 0.5) {
        f *= (e0 - 0.5) / (e0 - e1);
        for (int i = 0; i < 30 && cone_floor(f) < 0.25; ++i) f *= 0.5;
      }
    }
    init.b = std::move(f);
  } else {
    throw ConfigError("unknown preset '" + kind + "'");
  }
  return init;
}

// ---- config parsing -----------------------------------------------------------

namespace {

struct RawKey {
  std::string key, value;
  int line = 0;
};

bool is_preset(const std::string& name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Scheme parse_scheme(const std::string& v, int line) {
  if (v == "rk4") return Scheme::rk4;
  if (v == "imex") return Scheme::imex;
  throw ConfigError("scheme must be rk4 or imex, got '" + v + "'", line);
}

Formulation parse_formulation(const std::string& v, int line) {
  if (v == "surface") return Formulation::surface;
  if (v == "potential") return Formulation::potential;
  throw ConfigError("formulation must be surface or potential, got '" + v + "'",
                    line);
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  std::vector<RawKey> keys;
  struct RawTerm {
    std::string text;
    int line;
  };
  std::map<std::string, std::vector<RawTerm>> sections;
  std::map<std::string, int> section_line;
  std::string cur_section;

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    const std::string line = trimmed(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("unterminated section header", lineno);
      std::istringstream hs(line.substr(1, line.size() - 2));
      std::string tag, field, extra;
      hs >> tag >> field;
      if (tag != "initial" || field.empty() || (hs >> extra))
        throw ConfigError("section header must be [initial <field>]", lineno);
      static const char* known[] = {"phi", "tau", "varphi", "F", "alpha_u"};
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
            return field == k;
          }) == std::end(known))
        throw ConfigError("unknown initial field '" + field + "'", lineno);
      cur_section = field;
      section_line[field] = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (cur_section.empty())
        throw ConfigError("expected key = value", lineno);
      sections[cur_section].push_back({line, lineno});
      continue;
    }
    cur_section.clear();
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", lineno);
    keys.push_back({key, value, lineno});
  }

  // The `initial` key picks the defaults everything else overrides.
  std::string init_name = "stationary";
  int init_line = 0;
  for (const RawKey& k : keys)
    if (k.key == "initial") {
      init_name = k.value;
      init_line = k.line;
    }
  RunConfig cfg;
  if (init_name == "inline")
    cfg.initial = "inline";
  else if (is_preset(init_name))
    cfg = preset_config(init_name);
  else
    throw ConfigError("unknown preset '" + init_name + "'", init_line);

  int n_complex_line = 0;
  for (const RawKey& k : keys) {
    const std::string& v = k.value;
    if (k.key == "initial") {
    } else if (k.key == "formulation") {
      cfg.formulation = parse_formulation(v, k.line);
    } else if (k.key == "n_complex") {
      cfg.n_complex = static_cast<int>(parse_long(v, k.line));
      n_complex_line = k.line;
    } else if (k.key == "N") {
      cfg.N = static_cast<int>(parse_long(v, k.line));
    } else if (k.key == "lambda") {
      cfg.lambda = parse_double(v, k.line);
    } else if (k.key == "kappa") {
      cfg.kappa = parse_double(v, k.line);
    } else if (k.key == "t_end") {
      cfg.t_end = parse_double(v, k.line);
    } else if (k.key == "scheme") {
      cfg.scheme = parse_scheme(v, k.line);
    } else if (k.key == "dt") {
      cfg.dt = v == "adaptive" ? 0.0 : parse_double(v, k.line);
    } else if (k.key == "sample_stride") {
      cfg.sample_stride = static_cast<int>(parse_long(v, k.line));
    } else if (k.key == "stop_tolerance") {
      cfg.stop_tolerance = parse_double(v, k.line);
    } else if (k.key == "cfl_safety") {
      cfg.cfl_safety = parse_double(v, k.line);
    } else if (k.key == "snapshot_stride") {
      cfg.snapshot_stride = static_cast<int>(parse_long(v, k.line));
    } else if (k.key == "output_dir") {
      cfg.output_dir = v;
    } else if (k.key == "seed") {
      cfg.seed = static_cast<unsigned>(parse_long(v, k.line));
    } else if (k.key == "amplitude") {
      cfg.amplitude = parse_double(v, k.line);
    } else if (k.key == "max_mode") {
      cfg.max_mode = static_cast<int>(parse_long(v, k.line));
    } else if (k.key == "phi0") {
      cfg.phi0 = parse_double(v, k.line);
    } else if (k.key == "tau0") {
      cfg.tau0 = parse_double(v, k.line);
    } else if (k.key == "alpha_coeff") {
      cfg.alpha_coeff = parse_double(v, k.line);
    } else if (k.key == "resume_from") {
      cfg.resume_from = v;
    } else if (k.key == "laplacian") {
      // Config-visible statement of the evolving-metric Laplacian; there is
      // no alternative implementation to select.
      if (v != "evolving")
        throw ConfigError("laplacian must be 'evolving', got '" + v + "'", k.line);
    } else {
      throw ConfigError("unknown key '" + k.key + "'", k.line);
    }
  }

  // Inline term sections need n_complex to know the arity.
  for (const auto& [field, terms] : sections) {
    const bool surface_field = field == "phi" || field == "tau";
    if (surface_field && cfg.formulation != Formulation::surface)
      throw ConfigError("field '" + field + "' belongs to the surface formulation",
                        section_line[field]);
    if (!surface_field && cfg.formulation != Formulation::potential)
      throw ConfigError("field '" + field + "' belongs to the potential formulation",
                        section_line[field]);
    for (const auto& t : terms) {
      std::istringstream ts(t.text);
      std::vector<std::string> tok;
      std::string piece;
      while (ts >> piece) tok.push_back(piece);
      const int want = 2 * cfg.n_complex + 2;
      if (static_cast<int>(tok.size()) != want)
        throw ConfigError("inline term needs " + std::to_string(2 * cfg.n_complex) +
                              " mode indices, amplitude, phase",
                          t.line);
      InlineTerm term;
      for (int a = 0; a < 2 * cfg.n_complex; ++a)
        term.m[a] = static_cast<int>(parse_long(tok[a], t.line));
      term.amplitude = parse_double(tok[want - 2], t.line);
      term.phase = parse_double(tok[want - 1], t.line);
      for (int a = 0; a < 2 * cfg.n_complex; ++a)
        if (std::abs(term.m[a]) > cfg.N / 2 - 1)
          throw ConfigError("mode index beyond the grid band", t.line);
      cfg.inline_fields[field].push_back(term);
    }
  }

  if (cfg.n_complex != 1 && cfg.n_complex != 2)
    throw ConfigError("n_complex must be 1 or 2", n_complex_line);
  if (cfg.formulation == Formulation::surface && cfg.n_complex != 1)
    throw ConfigError("surface formulation forces n_complex = 1", n_complex_line);
  auto line_of = [&](const char* key) {
    for (auto it = keys.rbegin(); it != keys.rend(); ++it)
      if (it->key == key) return it->line;
    return 0;
  };
  if (cfg.N < 8 || (cfg.N & (cfg.N - 1)) != 0)
    throw ConfigError("N must be a power of two >= 8", line_of("N"));
  if (!(cfg.kappa > 0.0)) throw ConfigError("kappa must be positive", line_of("kappa"));
  if (cfg.initial != "inline" && !(cfg.lambda < 0.0))
    throw ConfigError("presets need lambda < 0", line_of("lambda"));
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive", line_of("t_end"));
  if (cfg.sample_stride < 1)
    throw ConfigError("sample_stride must be >= 1", line_of("sample_stride"));
  if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
    throw ConfigError("cfl_safety must lie in (0, 1]", line_of("cfl_safety"));
  if (cfg.snapshot_stride < 0)
    throw ConfigError("snapshot_stride must be >= 0", line_of("snapshot_stride"));
  if (cfg.amplitude < 0.0)
    throw ConfigError("amplitude must be >= 0", line_of("amplitude"));
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

// ---- diagnostics records --------------------------------------------------------

namespace {

struct Column {
  const char* name;
  double DiagnosticsRecord::* member;
};

const std::vector<Column>& column_table() {
  static const std::vector<Column> cols = {
      {"t", &DiagnosticsRecord::t},
      {"E", &DiagnosticsRecord::E},
      {"E_hat", &DiagnosticsRecord::E_hat},
      {"Q", &DiagnosticsRecord::Q},
      {"I", &DiagnosticsRecord::I},
      {"J", &DiagnosticsRecord::J},
      {"mu", &DiagnosticsRecord::mu},
      {"M", &DiagnosticsRecord::M},
      {"dE_dt_theory", &DiagnosticsRecord::dE_dt_theory},
      {"dE_hat_dt_theory", &DiagnosticsRecord::dE_hat_dt_theory},
      {"dM_dt_theory", &DiagnosticsRecord::dM_dt_theory},
      {"entropy", &DiagnosticsRecord::entropy},
      {"lower_bound_E", &DiagnosticsRecord::lower_bound_E},
      {"phi_mean", &DiagnosticsRecord::phi_mean},
      {"tau_min", &DiagnosticsRecord::tau_min},
      {"tau_max", &DiagnosticsRecord::tau_max},
      {"R_min", &DiagnosticsRecord::r_min},
      {"R_max", &DiagnosticsRecord::r_max},
      {"combined_max", &DiagnosticsRecord::combined_max},
      {"K_equiv", &DiagnosticsRecord::k_equiv},
      {"r_residual", &DiagnosticsRecord::r_residual},
      {"combined_residual", &DiagnosticsRecord::combined_residual},
      {"rhs_metric_sup", &DiagnosticsRecord::rhs_metric_sup},
      {"rhs_form_sup", &DiagnosticsRecord::rhs_form_sup},
      {"volume", &DiagnosticsRecord::volume},
      {"gauss_bonnet", &DiagnosticsRecord::gauss_bonnet},
      {"metric_min_eig", &DiagnosticsRecord::metric_min_eig},
      {"phi_plus_F_sup", &DiagnosticsRecord::phi_plus_F_sup},
      {"rhs_F_mean", &DiagnosticsRecord::rhs_F_mean},
  };
  return cols;
}

}  // namespace

DiagnosticsRecord::DiagnosticsRecord() {
  for (const Column& c : column_table()) this->*(c.member) = kNaN;
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Column& c : column_table()) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

std::string record_header() {
  std::string out;
  for (const Column& c : column_table()) {
    if (!out.empty()) out += ',';
    out += c.name;
  }
  return out;
}

std::string record_row(const DiagnosticsRecord& r) {
  std::string out;
  for (const Column& c : column_table()) {
    if (!out.empty()) out += ',';
    out += fmt17(r.*(c.member));
  }
  return out;
}

DiagnosticsRecord parse_record_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    cells.push_back(line.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  const auto& cols = column_table();
  if (cells.size() != cols.size())
    throw ConfigError("record row has " + std::to_string(cells.size()) +
                      " cells, want " + std::to_string(cols.size()));
  DiagnosticsRecord r;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    char* end = nullptr;
    const double v = std::strtod(cells[i].c_str(), &end);
    if (end == cells[i].c_str())
      throw ConfigError("bad numeric cell '" + cells[i] + "' in record row");
    r.*(cols[i].member) = v;
  }
  return r;
}

namespace {

void copy_functionals(const FunctionalSample& f, DiagnosticsRecord& r) {
  r.t = f.t;
  r.E = f.E;
  r.E_hat = f.E_hat;
  r.Q = f.Q;
  r.I = f.I;
  r.J = f.J;
  r.mu = f.mu;
  r.M = f.M;
  r.dE_dt_theory = f.dE_dt_theory;
  r.dE_hat_dt_theory = f.dE_hat_dt_theory;
  r.dM_dt_theory = f.dM_dt_theory;
  r.entropy = f.entropy;
  r.lower_bound_E = f.lower_bound_E;
  r.phi_mean = f.phi_mean;
}

}  // namespace

DiagnosticsRecord surface_record(const SurfaceState& s, const SurfaceParams& p,
                                 const SurfaceState* prev) {
  DiagnosticsRecord r;
  r.t = s.t;
  try {
    copy_functionals(surface_sample(s, p), r);
  } catch (const NonPositiveTauError&) {
    // tau left the admissible cone; keep the monitors below so the series
    // shows where, and leave the entropy-based columns NaN
  }
  const MaxPrincipleRecord m = max_principle_monitors(s, p);
  r.tau_min = m.tau_min;
  r.tau_max = m.tau_max;
  r.r_min = m.r_min;
  r.r_max = m.r_max;
  r.combined_max = m.combined_max;
  r.k_equiv = k_equivalence_conformal(s.phi, s.tau);
  if (prev) {
    r.r_residual = r_evolution_residual(*prev, s, p);
    try {
      r.combined_residual = combined_heat_residual(*prev, s, p);
    } catch (const KappaOneError&) {
    }
  }
  Field dphi, dtau;
  surface_rhs(s, p, dphi, dtau);
  r.rhs_metric_sup = sup_norm(dphi);
  r.rhs_form_sup = sup_norm(dtau);
  const Field w = conformal_weight(s.phi);
  r.volume = integrate(w);
  r.gauss_bonnet = integrate(scalar_curvature_conformal_pointwise(s.phi), w);
  r.metric_min_eig = std::exp(field_min(s.phi));
  return r;
}

DiagnosticsRecord potential_record(const PotentialState& s, const FlowProblem& p) {
  DiagnosticsRecord r;
  copy_functionals(potential_sample(s, p), r);
  const Field rho = volume_density(s.varphi);
  const Field u_alpha = p.alpha0.potential_u - s.F;
  const Field tau = trace_form_potential_pointwise(s.varphi, p.alpha0.coeff, u_alpha);
  r.tau_min = field_min(tau);
  r.tau_max = field_max(tau);
  if (field_min(rho) > 0.0) {
    Field logrho(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) logrho[i] = std::log(rho[i]);
    const Field R = -1.0 * laplace_beltrami_potential_pointwise(logrho, s.varphi);
    r.r_min = field_min(R);
    r.r_max = field_max(R);
    r.gauss_bonnet = integrate(R, rho);
  }
  r.k_equiv = k_equivalence_potential(s.varphi, p.alpha0.coeff, u_alpha);
  Field dvarphi, dF;
  potential_rhs(s, p, dvarphi, dF);
  r.rhs_metric_sup = sup_norm(dvarphi);
  r.rhs_form_sup = sup_norm(dF);
  r.volume = integrate(rho);
  r.metric_min_eig = metric_min_eigenvalue(s.varphi);
  r.phi_plus_F_sup = phi_plus_F_sup(s);
  r.rhs_F_mean = rhs_F_mean(s, p);
  return r;
}

// ---- snapshots --------------------------------------------------------------------

void write_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write snapshot '" + path + "'");
  json header;
  header["t"] = s.t;
  header["n_complex"] = s.n_complex;
  header["N"] = s.N;
  header["fields"] = s.field_names;
  out << header.dump() << '\n';
  for (const Field& f : s.fields) {
    const auto v = f.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("short write on snapshot '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot '" + path + "'");
  std::string header_line;
  if (!std::getline(in, header_line))
    throw ConfigError("snapshot '" + path + "' has no header line");
  Snapshot s;
  try {
    const json header = json::parse(header_line);
    s.t = header.at("t").get<double>();
    s.n_complex = header.at("n_complex").get<int>();
    s.N = header.at("N").get<int>();
    s.field_names = header.at("fields").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError("snapshot '" + path + "' header: " + e.what());
  }
  Grid g(s.n_complex, s.N);
  for (std::size_t i = 0; i < s.field_names.size(); ++i) {
    Field f(g);
    auto v = f.values();
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
      throw ConfigError("snapshot '" + path + "' truncated");
    s.fields.push_back(std::move(f));
  }
  return s;
}

// ---- orchestration -------------------------------------------------------------------

RunArtifacts execute_run(const RunConfig& cfg, bool persist) {
  Grid g(cfg.n_complex, cfg.N);
  InitialData init = make_initial(cfg, g);
  if (!cfg.resume_from.empty()) {
    Snapshot snap = read_snapshot(cfg.resume_from);
    if (snap.n_complex != cfg.n_complex || snap.N != cfg.N)
      throw ConfigError("snapshot grid " + std::to_string(snap.N) +
                        " does not match config N " + std::to_string(cfg.N));
    if (snap.fields.size() != 2)
      throw ConfigError("snapshot must hold exactly two fields");
    init.a = snap.fields[0];
    init.b = snap.fields[1];
    init.t0 = snap.t;
  }

  std::ofstream series;
  if (persist) {
    fs::create_directories(cfg.output_dir);
    series.open(cfg.output_dir + "/series.csv");
    if (!series)
      throw ConfigError("cannot write '" + cfg.output_dir + "/series.csv'");
    series << record_header() << '\n';
  }

  StepperConfig scfg;
  scfg.scheme = cfg.scheme;
  scfg.dt = cfg.dt;
  scfg.cfl_safety = cfg.cfl_safety;
  scfg.t_end = cfg.t_end;
  scfg.sample_stride = cfg.sample_stride;
  scfg.stop_tolerance = cfg.stop_tolerance;

  const bool potential = cfg.formulation == Formulation::potential;
  const std::vector<std::string> names =
      potential ? std::vector<std::string>{"varphi", "F"}
                : std::vector<std::string>{"phi", "tau"};

  std::vector<DiagnosticsRecord> records;
  auto emit = [&](const DiagnosticsRecord& r, const Field& a, const Field& b) {
    records.push_back(r);
    if (!persist) return;
    series << record_row(r) << '\n';
    series.flush();
    if (cfg.snapshot_stride > 0 &&
        (records.size() - 1) % static_cast<std::size_t>(cfg.snapshot_stride) == 0) {
      Snapshot snap{r.t, cfg.n_complex, cfg.N, names, {a, b}};
      write_snapshot(cfg.output_dir + "/snapshot_" + fmt_short(r.t) + ".fld", snap);
    }
  };

  SurfaceParams sparams{cfg.lambda, cfg.kappa};
  RunResult result(init.a, init.b, init.t0);
  if (potential) {
    FlowProblem problem = make_problem(g, cfg.lambda, cfg.kappa, init.alpha0);
    PotentialSystem sys(problem);
    result = run(sys, init.a, init.b, init.t0, scfg,
                 [&](const Field& a, const Field& b, double t, long) {
                   emit(potential_record({a, b, t}, problem), a, b);
                 });
  } else {
    SurfaceSystem sys(g, sparams);
    SurfaceState prev{init.a, init.b, init.t0};
    bool have_prev = false;
    result = run(sys, init.a, init.b, init.t0, scfg,
                 [&](const Field& a, const Field& b, double t, long) {
                   SurfaceState s{a, b, t};
                   emit(surface_record(s, sparams, have_prev ? &prev : nullptr), a, b);
                   prev = std::move(s);
                   have_prev = true;
                 });
  }

  RunArtifacts art(std::move(result));
  art.records = std::move(records);
  double last = kNaN;
  for (const DiagnosticsRecord& r : art.records) {
    const double v = potential ? r.M : r.E;
    if (std::isfinite(last) && std::isfinite(v))
      art.monotonicity_violation = std::max(art.monotonicity_violation, v - last);
    last = v;
  }
  art.monotonicity_violation = std::max(art.monotonicity_violation, 0.0);

  if (persist) {
    Snapshot final_snap{art.result.t, cfg.n_complex, cfg.N, names,
                        {art.result.a, art.result.b}};
    write_snapshot(cfg.output_dir + "/snapshot_" + fmt_short(art.result.t) + ".fld",
                   final_snap);
    json summary;
    summary["termination"] = to_string(art.result.termination);
    summary["t_final"] = art.result.t;
    summary["steps"] = art.result.steps;
    summary["samples"] = art.result.sample_count;
    summary["max_monotonicity_violation"] = art.monotonicity_violation;
    if (!art.records.empty()) {
      json final_values;
      const DiagnosticsRecord& r = art.records.back();
      for (const Column& c : column_table()) {
        const double v = r.*(c.member);
        if (std::isfinite(v))
          final_values[c.name] = v;
        else
          final_values[c.name] = nullptr;
      }
      summary["final"] = final_values;
    }
    std::ofstream sj(cfg.output_dir + "/summary.json");
    sj << summary.dump(2) << '\n';
  }
  return art;
}

// ---- commands ----------------------------------------------------------------------------

int cmd_run(const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = parse_config_file(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ":" << e.line << ": " << e.what() << "\n";
    return 2;
  }
  try {
    const RunArtifacts art = execute_run(cfg, true);
    std::cout << "termination=" << to_string(art.result.termination)
              << " t=" << fmt_short(art.result.t) << " steps=" << art.result.steps
              << " samples=" << art.records.size()
              << " output=" << cfg.output_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << config_path << ":" << e.line << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return 3;
  }
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& kappas) {
  if (kappas.empty()) {
    std::cerr << "sweep: empty kappa list\n";
    return 2;
  }
  RunConfig base;
  try {
    base = parse_config_file(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ":" << e.line << ": " << e.what() << "\n";
    return 2;
  }

  struct SweepRow {
    double kappa = 0.0;
    double convergence_time = kNaN;
    double final_tau = kNaN;
    double final_Q = kNaN;
    std::string termination = "error";
    std::string error;
  };
  std::vector<SweepRow> rows(kappas.size());

  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (const char* env = std::getenv("LYZ_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) workers = static_cast<unsigned>(cap);
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(kappas.size()));

  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= kappas.size()) return;
      SweepRow& row = rows[i];
      row.kappa = kappas[i];
      RunConfig cfg = base;
      cfg.kappa = kappas[i];
      cfg.output_dir = base.output_dir + "/kappa_" + fmt_short(kappas[i]);
      try {
        const RunArtifacts art = execute_run(cfg, true);
        row.termination = to_string(art.result.termination);
        if (art.result.termination == Termination::Converged)
          row.convergence_time = art.result.t;
        if (!art.records.empty()) {
          const DiagnosticsRecord& last = art.records.back();
          row.final_tau = 0.5 * (last.tau_min + last.tau_max);
          row.final_Q = last.Q;
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();

  fs::create_directories(base.output_dir);
  std::ofstream out(base.output_dir + "/sweep.csv");
  out << "kappa,convergence_time,final_tau,final_Q,termination\n";
  bool ok = true;
  for (const SweepRow& row : rows) {
    out << fmt17(row.kappa) << ',' << fmt17(row.convergence_time) << ','
        << fmt17(row.final_tau) << ',' << fmt17(row.final_Q) << ','
        << row.termination << '\n';
    if (!row.error.empty()) {
      std::cerr << "kappa=" << fmt_short(row.kappa) << ": " << row.error << "\n";
      ok = false;
    }
  }
  std::cout << "sweep: " << kappas.size() << " runs, results in " << base.output_dir
            << "/sweep.csv\n";
  return ok ? 0 : 3;
}

// ---- plot -----------------------------------------------------------------------------------

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.columns.push_back(trimmed(cell));
  while (std::getline(in, line)) {
    if (trimmed(line).empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      row.push_back(end == cell.c_str() ? kNaN : v);
    }
    row.resize(t.columns.size(), kNaN);
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string svg_chart(const std::string& title, const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  const double W = 720, H = 440, L = 72, R = 20, T = 34, B = 46;
  double xmin = xs.front(), xmax = xs.front(), ymin = ys.front(), ymax = ys.front();
  for (double x : xs) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  for (double y : ys) {
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n"
      << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n"
      << "<text x='" << W / 2 << "' y='20' text-anchor='middle' "
      << "font-family='sans-serif' font-size='14'>" << title << "</text>\n";
  svg << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='"
      << H - B << "' stroke='black'/>\n"
      << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
      << "' stroke='black'/>\n";
  char buf[48];
  for (int k = 0; k <= 5; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 5.0;
    const double fy = ymin + (ymax - ymin) * k / 5.0;
    std::snprintf(buf, sizeof buf, "%.3g", fx);
    svg << "<text x='" << px(fx) << "' y='" << H - B + 18
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", fy);
    svg << "<text x='" << L - 6 << "' y='" << py(fy) + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << buf
        << "</text>\n"
        << "<line x1='" << L - 3 << "' y1='" << py(fy) << "' x2='" << L << "' y2='"
        << py(fy) << "' stroke='black'/>\n";
  }
  svg << "<polyline fill='none' stroke='#1f6fb4' stroke-width='1.5' points='";
  for (std::size_t i = 0; i < xs.size(); ++i)
    svg << px(xs[i]) << ',' << py(ys[i]) << ' ';
  svg << "'/>\n</svg>\n";
  return svg.str();
}

}  // namespace

int cmd_plot(const std::string& csv_path, const std::vector<std::string>& columns,
             bool log_scale) {
  Table table;
  try {
    table = read_csv(csv_path);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  auto index_of = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      if (table.columns[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int t_idx = index_of("t");
  if (t_idx < 0) {
    std::cerr << "plot: '" << csv_path << "' has no t column\n";
    return 2;
  }
  for (const std::string& col : columns) {
    const int c = index_of(col);
    if (c < 0) {
      std::cerr << "plot: unknown column '" << col << "'\n";
      return 2;
    }
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
      const double x = row[static_cast<std::size_t>(t_idx)];
      double y = row[static_cast<std::size_t>(c)];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_scale) {
        if (y <= 0.0) continue;
        y = std::log10(y);
      }
      xs.push_back(x);
      ys.push_back(y);
    }
    if (xs.empty()) {
      std::cerr << "plot: no finite data for column '" << col << "'\n";
      return 2;
    }
    const std::string title = log_scale ? col + " (log10)" : col;
    const fs::path out_path =
        fs::path(csv_path).parent_path() / ("plot_" + col + ".svg");
    std::ofstream out(out_path);
    out << svg_chart(title, xs, ys);
    std::cout << "wrote " << out_path.string() << "\n";
  }
  return 0;
}

}  // namespace lyz
