#pragma once

#include <string>

#include "czgrape/analysis.hpp"
#include "czgrape/anharmonicity.hpp"
#include "czgrape/dynamics.hpp"
#include "czgrape/optimizer.hpp"
#include "json.hpp"

namespace czgrape {

/// Pulse files are self-contained: a comment preamble carries dt, buffer
/// layout, parking values and the transfer-function sigma, so a scan needs
/// nothing but the CSV. Columns are pixel centers and per-channel detunings.
void write_pulse_csv(const std::string& path, const ControlPulse& pulse,
                     double filter_sigma_ns);

struct LoadedPulse {
  ControlPulse pulse;
  double filter_sigma_ns = 0.0;
};
LoadedPulse read_pulse_csv(const std::string& path);

/// Two-column table "delta_ghz,anharmonicity_ghz", strictly increasing
/// delta. Blank lines and # comments are skipped.
AnharmonicityModel read_anharm_table_csv(const std::string& path);

/// CSV with axis columns first, observable columns after, plus a JSON
/// sidecar holding axes, column names and metadata. Writes path.csv and
/// path.json.
void write_scan_result(const std::string& path_base, const ScanResult& r);

/// Per-pixel populations, one column per basis state.
void write_trajectory_csv(const std::string& path, const StateSpace& space,
                          const Trajectory& traj);

nlohmann::ordered_json optimization_result_json(const OptimizationResult& r);

void write_text_file(const std::string& path, const std::string& text);
void write_json_file(const std::string& path,
                     const nlohmann::ordered_json& j);

/// Round-trip-exact decimal rendering (CSV cells).
std::string csv_double(double x);

}  // namespace czgrape
