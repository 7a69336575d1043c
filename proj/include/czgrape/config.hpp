#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "czgrape/analysis.hpp"
#include "czgrape/model.hpp"
#include "czgrape/optimizer.hpp"
#include "czgrape/toml_lite.hpp"

namespace czgrape {

struct QslScanSpec {
  std::vector<double> times_ns;
  QslOptions options;
};

struct NoiseScanSpec {
  std::string pulse_path;
  std::vector<double> sigmas;  // relative, 0.01 = 1%
  int n_samples = 100;
  std::uint64_t seed = 0;
};

struct CalibrationScanSpec {
  std::string pulse_path;
  std::vector<double> offsets1_ghz;
  std::vector<double> offsets2_ghz;
};

struct TimingScanSpec {
  std::string pulse_path;
  std::vector<double> delays_ns;
};

struct ParameterScanSpec {
  std::string pulse_path;
  std::vector<double> g1_rel;
  std::vector<double> anharm1_rel;
};

struct JcSpec {
  double omega_b_ghz = 0.0;
  double g_ghz = 0.0;
  double anharm_ghz = 0.0;
  std::vector<double> deltas_ghz;
  int n_samples = 400;
};

/// Everything a run can describe. Sections are parsed and validated whenever
/// they are present, independent of the verb that will run; each verb then
/// checks that the sections it needs exist.
struct RunConfig {
  std::optional<DeviceParams> device;
  // Filled from [pulse] plus [optimizer]; present iff [pulse] is.
  std::optional<OptimizationConfig> optimization;
  std::optional<QslScanSpec> qsl;
  std::optional<NoiseScanSpec> noise;
  std::optional<CalibrationScanSpec> calibration;
  std::optional<TimingScanSpec> timing;
  std::optional<ParameterScanSpec> params_scan;
  std::optional<JcSpec> jc;
  // Optional CSV warm start for the optimizer; empty means none.
  std::string start_pulse_path;
  std::string basename = "run";
  std::vector<std::string> warnings;
  // Canonical rendering with every default materialized; written next to the
  // run's outputs.
  std::string resolved_text;
  std::string source_dir;
};

/// Parses a config file, applies `--set key=value` overrides and an optional
/// seed override, validates every present section and rejects unknown keys.
/// Throws ConfigError with file:line context.
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& set_overrides = {},
                      std::optional<std::uint64_t> seed_override = {});

/// Same, from already-parsed text (tests).
RunConfig load_config_text(const std::string& text,
                           const std::string& source_name,
                           const std::string& source_dir,
                           const std::vector<std::string>& set_overrides = {},
                           std::optional<std::uint64_t> seed_override = {});

/// Input-file lookup: absolute paths and paths valid from the working
/// directory win; otherwise the path is taken relative to the config file.
std::string resolve_input_path(const RunConfig& cfg, const std::string& path);

}  // namespace czgrape
