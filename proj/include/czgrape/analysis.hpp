#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "czgrape/optimizer.hpp"

namespace czgrape {

/// One scan axis: a named list of values with a unit tag.
struct Axis {
  std::string name;
  std::string unit;
  std::vector<double> values;
};

/// Long-format grid result: one row per grid point, columns in declared
/// order (axis columns first, then observables). Rows follow row-major order
/// over the axes regardless of which worker computed them.
struct ScanResult {
  std::vector<Axis> axes;
  std::vector<std::string> columns;        // observable column names
  std::vector<std::vector<double>> rows;   // axis values then observables
  std::map<std::string, std::string> metadata;
};

struct SpectrumResult {
  std::vector<double> frequency_ghz;                 // one-sided bins
  std::vector<std::vector<double>> magnitude;        // per channel, unit peak
  std::vector<double> power_fraction_above_cutoff;   // per channel, non-DC
  double cutoff_ghz = 0.0;
};

/// One-sided DFT of each channel with its parking baseline removed.
/// Bin spacing 1/(N dt). Magnitudes are normalized to unit peak; the power
/// fraction compares the energy above the cutoff to all non-DC energy.
SpectrumResult pulse_dft(const ControlPulse& pulse, double cutoff_ghz);

/// Best achieved error per gate time. Times are traversed as given (sorted
/// descending beforehand); each point warm-starts from the previous best
/// pulse, resampled onto the new main window. n_workers parallelizes the
/// independent first-pass optimizations only when warm start is disabled;
/// the warm-started sweep is inherently sequential.
struct QslOptions {
  bool warm_start = true;
  double machine_precision_threshold = 1e-10;
};
ScanResult qsl_scan(const std::vector<double>& gate_times_ns,
                    const OptimizationConfig& cfg, const DeviceParams& params,
                    const QslOptions& options = {});

/// Mean and spread of 1 - Phi under multiplicative Gaussian amplitude noise:
/// every optimizable pixel is scaled by (1 + sigma_E * xi) with xi ~ N(0,1).
/// Sample s of sigma index i uses seed = master_seed + i*n_samples + s, so
/// the result is independent of worker count.
ScanResult amplitude_noise_scan(const ControlPulse& raw,
                                const DeviceParams& params,
                                const GaussianFilter* filter,
                                const std::vector<double>& relative_sigmas,
                                int n_samples, std::uint64_t seed,
                                int n_workers = 1);

/// Fidelity and |U_{10,10}|^2 when the qubit-bus resonance is missed by a
/// constant offset per qubit: every pixel of the physical waveform (buffers
/// included) is shifted by delta_omega_k.
ScanResult calibration_scan(const ControlPulse& raw, const DeviceParams& params,
                            const GaussianFilter* filter,
                            const std::vector<double>& offsets1_ghz,
                            const std::vector<double>& offsets2_ghz,
                            int n_workers = 1);

/// Fidelity when channel 2 lags channel 1 by delta_tau (fractional pixels,
/// linear interpolation, parking padding).
ScanResult timing_scan(const ControlPulse& raw, const DeviceParams& params,
                       const GaussianFilter* filter,
                       const std::vector<double>& delays_ns,
                       int n_workers = 1);

/// Fidelity under relative errors of qubit 1's coupling and anharmonicity;
/// the pulse is NOT re-optimized.
ScanResult parameter_error_scan(const ControlPulse& raw,
                                const DeviceParams& params,
                                const GaussianFilter* filter,
                                const std::vector<double>& rel_errors_g1,
                                const std::vector<double>& rel_errors_delta1,
                                int n_workers = 1);

}  // namespace czgrape
