#include "czgrape/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "czgrape/errors.hpp"
#include "czgrape/io.hpp"

namespace czgrape {

namespace {

using toml::Table;
using toml::Value;

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& what) {
  throw ConfigError("[" + section + "] " + key + ": " + what);
}

std::string resolve_path(const std::string& dir, const std::string& path) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.is_absolute() || fs::exists(p) || dir.empty()) return path;
  fs::path joined = fs::path(dir) / p;
  if (fs::exists(joined)) return joined.string();
  return path;
}

/// Typed access to one section with defaults, plus mirroring of every
/// resolved value into the echo table.
struct SectionReader {
  const Table* table = nullptr;  // null: section absent, defaults apply
  std::string name;
  Table* echo = nullptr;

  const Value* find(const std::string& key) const {
    return table ? table->find(key) : nullptr;
  }
  bool has(const std::string& key) const { return find(key) != nullptr; }

  void echo_set(const std::string& key, Value v) const {
    if (echo) echo->set(name + "." + key, std::move(v));
  }

  double as_number(const Value& v, const std::string& key) const {
    if (!v.is_number()) fail(name, key, "expected a number");
    double x = v.number();
    if (!std::isfinite(x)) fail(name, key, "expected a finite number");
    return x;
  }

  double require_number(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ConfigError("[" + name + "] missing required key " + key);
    double x = as_number(*v, key);
    echo_set(key, Value::of_float(x));
    return x;
  }

  double number(const std::string& key, double def) const {
    const Value* v = find(key);
    double x = v ? as_number(*v, key) : def;
    echo_set(key, Value::of_float(x));
    return x;
  }

  std::optional<double> maybe_number(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return {};
    double x = as_number(*v, key);
    echo_set(key, Value::of_float(x));
    return x;
  }

  std::int64_t integer64(const std::string& key, std::int64_t def) const {
    const Value* v = find(key);
    std::int64_t x = def;
    if (v) {
      if (v->kind != Value::Kind::integer) fail(name, key, "expected an integer");
      x = v->i;
    }
    echo_set(key, Value::of_int(x));
    return x;
  }

  int integer(const std::string& key, int def) const {
    std::int64_t x = integer64(key, def);
    if (x < std::numeric_limits<int>::min() ||
        x > std::numeric_limits<int>::max())
      fail(name, key, "integer out of range");
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key, bool def) const {
    const Value* v = find(key);
    bool x = def;
    if (v) {
      if (v->kind != Value::Kind::boolean) fail(name, key, "expected a boolean");
      x = v->b;
    }
    echo_set(key, Value::of_bool(x));
    return x;
  }

  std::string string(const std::string& key, const std::string& def) const {
    const Value* v = find(key);
    std::string x = def;
    if (v) {
      if (v->kind != Value::Kind::string) fail(name, key, "expected a string");
      x = v->s;
    }
    echo_set(key, Value::of_string(x));
    return x;
  }

  std::string require_string(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ConfigError("[" + name + "] missing required key " + key);
    if (v->kind != Value::Kind::string) fail(name, key, "expected a string");
    echo_set(key, Value::of_string(v->s));
    return v->s;
  }
};

struct GridKeys {
  const char* array;
  const char* min;
  const char* max;
  const char* steps;
  bool allow_log = false;
};

/// A grid is either an explicit array or a min/max/steps triple (inclusive
/// endpoints, optionally log spaced). The echo always carries the explicit
/// values.
std::vector<double> read_grid(const SectionReader& r, const GridKeys& k) {
  const Value* arr = r.find(k.array);
  const Value* vmin = r.find(k.min);
  const Value* vmax = r.find(k.max);
  const Value* vsteps = r.find(k.steps);
  bool triple = vmin || vmax || vsteps;
  if (arr && triple)
    fail(r.name, k.array, std::string("give either ") + k.array + " or the " +
                              k.min + "/" + k.max + "/" + k.steps + " triple");
  std::vector<double> values;
  if (arr) {
    if (arr->kind != Value::Kind::array)
      fail(r.name, k.array, "expected an array");
    for (const auto& item : arr->items)
      values.push_back(r.as_number(item, k.array));
    if (values.empty()) fail(r.name, k.array, "grid must not be empty");
  } else if (triple) {
    if (!vmin || !vmax || !vsteps)
      fail(r.name, k.min, std::string(k.min) + ", " + k.max + " and " +
                              k.steps + " must be given together");
    double lo = r.as_number(*vmin, k.min);
    double hi = r.as_number(*vmax, k.max);
    if (vsteps->kind != Value::Kind::integer)
      fail(r.name, k.steps, "expected an integer");
    std::int64_t n = vsteps->i;
    if (n < 1) fail(r.name, k.steps, "need at least one step");
    bool log_spaced = false;
    if (k.allow_log) {
      const Value* sp = r.find("spacing");
      if (sp) {
        if (sp->kind != Value::Kind::string)
          fail(r.name, "spacing", "expected \"linear\" or \"log\"");
        if (sp->s == "log") log_spaced = true;
        else if (sp->s != "linear")
          fail(r.name, "spacing", "expected \"linear\" or \"log\"");
      }
    }
    if (n == 1) {
      if (lo != hi)
        fail(r.name, k.steps, "a single step needs equal endpoints");
      values.push_back(lo);
    } else if (log_spaced) {
      if (!(lo > 0.0) || !(hi > 0.0))
        fail(r.name, k.min, "log spacing needs positive endpoints");
      for (std::int64_t i = 0; i < n; ++i)
        values.push_back(lo * std::pow(hi / lo, static_cast<double>(i) /
                                                    static_cast<double>(n - 1)));
    } else {
      for (std::int64_t i = 0; i < n; ++i)
        values.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
    }
  } else {
    throw ConfigError("[" + r.name + "] missing grid: give " + k.array +
                      " or " + k.min + "/" + k.max + "/" + k.steps);
  }
  std::vector<Value> items;
  for (double v : values) items.push_back(Value::of_float(v));
  r.echo_set(k.array, Value::of_array(std::move(items)));
  return values;
}

double parse_coupling_ghz(const SectionReader& r, bool allow_zero = false) {
  bool has_g = r.has("g_mhz");
  bool has_swap = r.has("swap_time_ns");
  if (has_g == has_swap)
    throw ConfigError("[" + r.name +
                      "] give exactly one of g_mhz and swap_time_ns");
  if (has_g) {
    double g = r.require_number("g_mhz");
    if (!(g > 0.0) && !(allow_zero && g == 0.0))
      fail(r.name, "g_mhz", "must be positive");
    return g / 1000.0;
  }
  double t = r.require_number("swap_time_ns");
  if (!(t > 0.0)) fail(r.name, "swap_time_ns", "must be positive");
  return DeviceParams::g_from_swap_time_ns(t);
}

DeviceParams parse_device(const Table& dev, Table& echo,
                          const std::string& source_dir,
                          std::vector<std::string>& warnings) {
  SectionReader r{&dev, "device", &echo};
  DeviceParams p;
  p.omega_b_ghz = r.require_number("omega_b_ghz");
  for (int k = 0; k < 2; ++k) {
    std::string sub = "qubit" + std::to_string(k + 1);
    const Table* qt = dev.child(sub);
    if (!qt) throw ConfigError("[device." + sub + "] section is required");
    SectionReader q{qt, "device." + sub, &echo};
    QubitParams& qp = p.qubit[k];
    qp.omega_park_ghz = q.require_number("omega_park_ghz");
    qp.g_ghz = parse_coupling_ghz(q);
    bool has_const = q.has("anharmonicity_mhz");
    bool has_table = q.has("anharmonicity_table");
    if (has_const == has_table)
      throw ConfigError("[device." + sub +
                        "] give exactly one of anharmonicity_mhz and "
                        "anharmonicity_table");
    if (has_const) {
      qp.anharm =
          AnharmonicityModel::constant(q.require_number("anharmonicity_mhz") /
                                       1000.0);
    } else {
      std::string path = q.require_string("anharmonicity_table");
      qp.anharm = read_anharm_table_csv(resolve_path(source_dir, path));
    }
  }
  auto w = p.validate();
  warnings.insert(warnings.end(), w.begin(), w.end());
  return p;
}

OptimizationConfig parse_pulse_optimizer(const Table* pulse, const Table* opt,
                                         Table& echo,
                                         std::vector<std::string>& warnings) {
  OptimizationConfig cfg;
  SectionReader pr{pulse, "pulse", &echo};
  cfg.gate_time_ns = pr.require_number("gate_time_ns");
  if (!(cfg.gate_time_ns > 0.0)) fail("pulse", "gate_time_ns", "must be positive");
  cfg.dt_ns = pr.number("dt_ns", cfg.dt_ns);
  if (!(cfg.dt_ns > 0.0)) fail("pulse", "dt_ns", "must be positive");
  cfg.n_buffer = pr.integer("n_buffer", cfg.n_buffer);
  if (cfg.n_buffer < 0) fail("pulse", "n_buffer", "must be non-negative");
  for (int k = 0; k < 2; ++k) {
    std::string key = "delta_park" + std::to_string(k + 1) + "_ghz";
    if (auto v = pr.maybe_number(key)) cfg.parking_ghz[k] = *v;
  }
  if (auto v = pr.maybe_number("delta_min_ghz")) cfg.delta_min_ghz = *v;
  if (auto v = pr.maybe_number("delta_max_ghz")) cfg.delta_max_ghz = *v;
  if (!(cfg.delta_min_ghz < cfg.delta_max_ghz))
    fail("pulse", "delta_min_ghz", "must be below delta_max_ghz");
  long n_main = std::lround(cfg.gate_time_ns / cfg.dt_ns);
  if (n_main < 1) fail("pulse", "gate_time_ns", "shorter than one pixel");
  if (std::abs(n_main * cfg.dt_ns - cfg.gate_time_ns) >
      1e-9 * std::max(1.0, cfg.gate_time_ns))
    warnings.push_back("gate_time_ns is not a multiple of dt_ns; the main "
                       "window rounds to " +
                       std::to_string(n_main) + " pixels");

  SectionReader orr{opt, "optimizer", &echo};
  cfg.target_error = orr.number("target_error", cfg.target_error);
  if (!(cfg.target_error > 0.0))
    fail("optimizer", "target_error", "must be positive");
  cfg.max_iterations = orr.integer("max_iterations", cfg.max_iterations);
  if (cfg.max_iterations < 0)
    fail("optimizer", "max_iterations", "must be non-negative");
  cfg.grad_tol = orr.number("grad_tol", cfg.grad_tol);
  if (cfg.grad_tol < 0.0) fail("optimizer", "grad_tol", "must be non-negative");

  const Value* vs = orr.find("filter_sigma_ns");
  const Value* vf = orr.find("filter_f3db_mhz");
  if (vs && vf)
    throw ConfigError(
        "[optimizer] give at most one of filter_sigma_ns and filter_f3db_mhz");
  if (vf) {
    double f = orr.as_number(*vf, "filter_f3db_mhz");
    if (!(f > 0.0)) fail("optimizer", "filter_f3db_mhz", "must be positive");
    cfg.filter_sigma_ns = gaussian_sigma_for_cutoff(f / 1000.0);
    orr.echo_set("filter_f3db_mhz", Value::of_float(f));
  } else {
    double s = vs ? orr.as_number(*vs, "filter_sigma_ns") : 0.0;
    if (s < 0.0) fail("optimizer", "filter_sigma_ns", "must be non-negative");
    cfg.filter_sigma_ns = s;
    orr.echo_set("filter_sigma_ns", Value::of_float(s));
  }

  cfg.initial =
      initial_kind_from_string(orr.string("initial", to_string(cfg.initial)));
  int fred = orr.integer("fred_qubit", 2);
  if (fred != 1 && fred != 2) fail("optimizer", "fred_qubit", "must be 1 or 2");
  cfg.fred_qubit = fred - 1;
  cfg.nudge_depth = orr.number("nudge_depth", cfg.nudge_depth);
  if (!(cfg.nudge_depth > 0.0))
    fail("optimizer", "nudge_depth", "must be positive");
  std::int64_t seed = orr.integer64("seed", 0);
  if (seed < 0) fail("optimizer", "seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.first_step_cap_ghz =
      orr.number("first_step_cap_ghz", cfg.first_step_cap_ghz);
  if (cfg.first_step_cap_ghz < 0.0)
    fail("optimizer", "first_step_cap_ghz", "must be non-negative");
  cfg.max_step_ghz = orr.number("max_step_ghz", cfg.max_step_ghz);
  if (cfg.max_step_ghz < 0.0)
    fail("optimizer", "max_step_ghz", "must be non-negative");
  cfg.smoothness_weight = orr.number("smoothness_weight", cfg.smoothness_weight);
  if (cfg.smoothness_weight < 0.0)
    fail("optimizer", "smoothness_weight", "must be non-negative");
  cfg.stall_window = orr.integer("stall_window", cfg.stall_window);
  if (cfg.stall_window < 1) fail("optimizer", "stall_window", "must be >= 1");
  cfg.stall_rel = orr.number("stall_rel", cfg.stall_rel);
  if (cfg.stall_rel < 0.0) fail("optimizer", "stall_rel", "must be non-negative");
  return cfg;
}

QslScanSpec parse_qsl(const Table* t, Table& echo) {
  SectionReader r{t, "scan.qsl", &echo};
  QslScanSpec s;
  s.times_ns =
      read_grid(r, {"times_ns", "time_min_ns", "time_max_ns", "time_steps"});
  for (double v : s.times_ns)
    if (!(v > 0.0)) fail(r.name, "times_ns", "gate times must be positive");
  s.options.warm_start = r.boolean("warm_start", true);
  s.options.machine_precision_threshold =
      r.number("success_threshold", s.options.machine_precision_threshold);
  if (!(s.options.machine_precision_threshold > 0.0))
    fail(r.name, "success_threshold", "must be positive");
  return s;
}

NoiseScanSpec parse_noise(const Table* t, Table& echo) {
  SectionReader r{t, "scan.noise", &echo};
  NoiseScanSpec s;
  s.pulse_path = r.require_string("pulse");
  s.sigmas = read_grid(
      r, {"sigmas", "sigma_min", "sigma_max", "sigma_steps", true});
  for (double v : s.sigmas)
    if (v < 0.0) fail(r.name, "sigmas", "sigma must be non-negative");
  s.n_samples = r.integer("n_samples", s.n_samples);
  if (s.n_samples < 2) fail(r.name, "n_samples", "need at least two samples");
  std::int64_t seed = r.integer64("seed", 0);
  if (seed < 0) fail(r.name, "seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  return s;
}

CalibrationScanSpec parse_calibration(const Table* t, Table& echo) {
  SectionReader r{t, "scan.calibration", &echo};
  CalibrationScanSpec s;
  s.pulse_path = r.require_string("pulse");
  for (int k = 0; k < 2; ++k) {
    std::string idx = std::to_string(k + 1);
    std::string array = "offsets" + idx + "_mhz";
    std::string lo = "offset" + idx + "_min_mhz";
    std::string hi = "offset" + idx + "_max_mhz";
    std::string steps = "offset" + idx + "_steps";
    auto grid =
        read_grid(r, {array.c_str(), lo.c_str(), hi.c_str(), steps.c_str()});
    auto& dst = k == 0 ? s.offsets1_ghz : s.offsets2_ghz;
    for (double v : grid) dst.push_back(v / 1000.0);
  }
  return s;
}

TimingScanSpec parse_timing(const Table* t, Table& echo) {
  SectionReader r{t, "scan.timing", &echo};
  TimingScanSpec s;
  s.pulse_path = r.require_string("pulse");
  s.delays_ns =
      read_grid(r, {"delays_ns", "delay_min_ns", "delay_max_ns", "delay_steps"});
  return s;
}

ParameterScanSpec parse_params_scan(const Table* t, Table& echo) {
  SectionReader r{t, "scan.params", &echo};
  ParameterScanSpec s;
  s.pulse_path = r.require_string("pulse");
  s.g1_rel = read_grid(r, {"g1_rel", "g1_rel_min", "g1_rel_max", "g1_rel_steps"});
  s.anharm1_rel = read_grid(
      r, {"anharm1_rel", "anharm1_rel_min", "anharm1_rel_max", "anharm1_rel_steps"});
  for (double v : s.g1_rel)
    if (v <= -1.0) fail(r.name, "g1_rel", "relative error must exceed -1");
  return s;
}

JcSpec parse_jc(const Table& t, Table& echo) {
  SectionReader r{&t, "jc", &echo};
  JcSpec s;
  s.omega_b_ghz = r.require_number("omega_b_ghz");
  if (!(s.omega_b_ghz > 0.0)) fail("jc", "omega_b_ghz", "must be positive");
  s.g_ghz = parse_coupling_ghz(r, /*allow_zero=*/true);
  s.anharm_ghz = r.require_number("anharmonicity_mhz") / 1000.0;
  auto grid = read_grid(
      r, {"deltas_mhz", "delta_min_mhz", "delta_max_mhz", "delta_steps"});
  for (double v : grid) s.deltas_ghz.push_back(v / 1000.0);
  s.n_samples = r.integer("n_samples", s.n_samples);
  if (s.n_samples < 2) fail("jc", "n_samples", "need at least two samples");
  return s;
}

bool safe_basename(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

}  // namespace

RunConfig load_config_text(const std::string& text,
                           const std::string& source_name,
                           const std::string& source_dir,
                           const std::vector<std::string>& set_overrides,
                           std::optional<std::uint64_t> seed_override) {
  Table table = Table::parse(text, source_name);
  for (const auto& s : set_overrides) {
    size_t eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must look like key=value: " + s);
    table.set(s.substr(0, eq), toml::parse_scalar_lenient(s.substr(eq + 1)));
  }

  Table echo;
  RunConfig out;
  out.source_dir = source_dir;

  if (const Table* dev = table.child("device"))
    out.device = parse_device(*dev, echo, source_dir, out.warnings);

  const Table* pulse = table.child("pulse");
  const Table* opt = table.child("optimizer");
  if (opt && !pulse)
    throw ConfigError("[optimizer] requires a [pulse] section");
  if (pulse) {
    out.optimization = parse_pulse_optimizer(pulse, opt, echo, out.warnings);
    SectionReader orr{opt, "optimizer", &echo};
    if (orr.find("start_pulse")) {
      out.start_pulse_path = orr.require_string("start_pulse");
      if (out.start_pulse_path.empty())
        fail("optimizer", "start_pulse", "must not be empty");
    }
  }

  if (const Table* scan = table.child("scan")) {
    if (const Table* t = scan->child("qsl")) out.qsl = parse_qsl(t, echo);
    if (const Table* t = scan->child("noise")) out.noise = parse_noise(t, echo);
    if (const Table* t = scan->child("calibration"))
      out.calibration = parse_calibration(t, echo);
    if (const Table* t = scan->child("timing"))
      out.timing = parse_timing(t, echo);
    if (const Table* t = scan->child("params"))
      out.params_scan = parse_params_scan(t, echo);
  }

  if (const Table* jc = table.child("jc")) out.jc = parse_jc(*jc, echo);

  {
    SectionReader r{table.child("output"), "output", &echo};
    out.basename = r.string("basename", out.basename);
    if (!safe_basename(out.basename))
      fail("output", "basename", "use only letters, digits, '.', '_', '-'");
  }

  auto unknown = table.unconsumed();
  if (!unknown.empty()) {
    std::string joined;
    for (const auto& k : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += k;
    }
    throw ConfigError("unknown config keys: " + joined);
  }

  if (seed_override) {
    std::int64_t seed = static_cast<std::int64_t>(*seed_override);
    if (out.optimization) {
      out.optimization->seed = *seed_override;
      echo.set("optimizer.seed", Value::of_int(seed));
    }
    if (out.noise) {
      out.noise->seed = *seed_override;
      echo.set("scan.noise.seed", Value::of_int(seed));
    }
  }

  if (out.device && out.optimization) {
    for (int k = 0; k < 2; ++k) {
      double park = out.optimization->resolved_parking_ghz(k, *out.device);
      if (!out.device->qubit[k].anharm.in_range(park))
        throw ConfigError("parking detuning of qubit " + std::to_string(k + 1) +
                          " lies outside the anharmonicity table");
      if (park < out.optimization->delta_min_ghz ||
          park > out.optimization->delta_max_ghz)
        throw ConfigError("parking detuning of qubit " + std::to_string(k + 1) +
                          " lies outside delta_min_ghz..delta_max_ghz");
      echo.set("pulse.delta_park" + std::to_string(k + 1) + "_ghz",
               Value::of_float(park));
    }
  }

  out.resolved_text = echo.serialize();
  return out;
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& set_overrides,
                      std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return load_config_text(buf.str(), path, dir, set_overrides, seed_override);
}

std::string resolve_input_path(const RunConfig& cfg, const std::string& path) {
  return resolve_path(cfg.source_dir, path);
}

}  // namespace czgrape
