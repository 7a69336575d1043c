#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "czgrape/bfgs.hpp"
#include "czgrape/dynamics.hpp"
#include "czgrape/model.hpp"

namespace czgrape {

/// Target unitary embedded in the full basis: nonzero only on the
/// computational subspace.
struct TargetGate {
  Matrix embedded;

  /// CZ: diag(1, 1, 1, -1) over |00>, |01>, |10>, |11>, zero elsewhere.
  static TargetGate cz(const StateSpace& space);
};

/// Phi = |Tr(T' U)|^2 / 16 with T' the embedded target adjoint; the modulus
/// makes the global phase of U irrelevant, and leakage shows up as missing
/// trace weight.
double fidelity(const Matrix& u, const TargetGate& target);

/// Discrete Gaussian smoothing kernel with unit sum (unit DC gain).
/// Boundaries are padded with a caller-supplied constant (the parking value).
class GaussianFilter {
 public:
  GaussianFilter(double sigma_ns, double dt_ns);

  double sigma_ns() const { return sigma_ns_; }
  int radius() const { return radius_; }
  const std::vector<double>& kernel() const { return kernel_; }

  /// Convolution; output length equals input length. Throws ConfigError when
  /// the kernel support exceeds 10x the sequence length.
  std::vector<double> apply(const std::vector<double>& x, double pad) const;

  /// Adjoint of apply with respect to the interior samples (the constant
  /// padding carries no gradient): correlation with the same kernel.
  std::vector<double> adjoint(const std::vector<double>& g) const;

  /// Amplitude response |K(f)| of the discrete kernel at a given frequency.
  double attenuation(double f_ghz) const;

 private:
  double sigma_ns_;
  double dt_ns_;
  int radius_;
  std::vector<double> kernel_;
};

/// Standard deviation giving 3 dB amplitude attenuation at f3db (continuous
/// Gaussian: |K(f)| = exp(-2 pi^2 sigma^2 f^2)).
double gaussian_sigma_for_cutoff(double f3db_ghz);

enum class InitialKind { constant, random_smooth, asymmetric_nudge };

InitialKind initial_kind_from_string(const std::string& s);
std::string to_string(InitialKind kind);

struct OptimizationConfig {
  double gate_time_ns = 0.0;   // main window; buffers come on top
  double dt_ns = 0.5;
  int n_buffer = 5;
  // Parking detunings (GHz). NaN entries default to the device parking
  // delta omega_park - omega_b.
  std::array<double, 2> parking_ghz = {
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN()};
  // Waveform generator range for the raw pixels, enforced as a quadratic
  // penalty outside the box so the search stays in realizable territory
  // without hard rejections stalling the line search.
  double delta_min_ghz = -std::numeric_limits<double>::infinity();
  double delta_max_ghz = std::numeric_limits<double>::infinity();
  double target_error = 1e-4;
  int max_iterations = 5000;
  double grad_tol = 0.0;
  double filter_sigma_ns = 0.0;  // 0 disables the transfer function
  InitialKind initial = InitialKind::random_smooth;
  int fred_qubit = 1;            // channel nudged toward resonance (0-based)
  double nudge_depth = 1.0;      // fraction of the way to the anticrossing
  std::uint64_t seed = 0;
  double first_step_cap_ghz = 0.02;
  double max_step_ghz = 0.0;     // per-iteration |dx|_inf bound (0: none)
  // Curvature regularization: weight times the summed squared second
  // difference of each channel (buffers as fixed endpoints) is added to the
  // search objective. Biases the walk toward slowly varying pulses; the
  // reported error is always the plain infidelity. 0 disables.
  double smoothness_weight = 0.0;
  int stall_window = 50;
  double stall_rel = 1e-10;

  double resolved_parking_ghz(int k, const DeviceParams& params) const;
  int n_main_pixels() const;
};

enum class TerminationReason { target_reached, stalled, max_iterations };
std::string to_string(TerminationReason reason);

struct OptimizationResult {
  ControlPulse pulse;           // raw (what the waveform generator stores)
  ControlPulse filtered_pulse;  // after the transfer function; == pulse when
                                // filtering is off (n_buffer cleared: the
                                // smoothed buffers are no longer pinned)
  std::vector<double> error_history;  // 1 - Phi, initial point included
  std::vector<double> grad_norms;     // inf-norm per accepted iteration
  TerminationReason reason = TerminationReason::max_iterations;
  int iterations = 0;
  double final_error = 1.0;
  double final_grad_norm = 0.0;
  double wall_time_s = 0.0;
};

/// 1 - Phi of a raw pulse together with its exact gradient over the
/// optimizable (main) pixels, differentiated through the per-pixel matrix
/// exponentials and, when a filter is present, through the convolution.
class GrapeObjective {
 public:
  GrapeObjective(const HamiltonianDecomposition& h, const TargetGate& target,
                 ControlPulse base, const GaussianFilter* filter,
                 double delta_min_ghz =
                     -std::numeric_limits<double>::infinity(),
                 double delta_max_ghz =
                     std::numeric_limits<double>::infinity(),
                 double smoothness_weight = 0.0);

  int n_params() const { return 2 * base_.n_main(); }
  Eigen::VectorXd pack(const ControlPulse& pulse) const;
  ControlPulse unpack(const Eigen::VectorXd& x) const;
  ControlPulse filtered(const ControlPulse& raw) const;

  /// Returns +inf when the candidate runs outside the anharmonicity table
  /// (the line search treats that as an overlong step).
  double error(const Eigen::VectorXd& x) const;
  double error_and_gradient(const Eigen::VectorXd& x,
                            Eigen::VectorXd& grad) const;

  /// Gate infidelity alone, with no search penalties, at the point of the
  /// most recent error/error_and_gradient call (+inf if that was rejected).
  double last_pure_error() const { return last_pure_error_; }

 private:
  double bounds_penalty(const Eigen::VectorXd& x,
                        Eigen::VectorXd* grad) const;
  double smoothness_penalty(const Eigen::VectorXd& x,
                            Eigen::VectorXd* grad) const;

  const HamiltonianDecomposition* h_;
  const TargetGate* target_;
  ControlPulse base_;
  const GaussianFilter* filter_;
  double delta_min_ghz_;
  double delta_max_ghz_;
  double smoothness_weight_;
  mutable double last_pure_error_ = std::numeric_limits<double>::infinity();
};

/// Starting pulse of the requested kind. Deterministic in the seed.
ControlPulse initial_pulse(InitialKind kind, const OptimizationConfig& cfg,
                           const DeviceParams& params);

/// Full GRAPE + BFGS run. `start` overrides the initial pulse (used by warm
/// starts and filter restarts).
OptimizationResult optimize(const OptimizationConfig& cfg,
                            const DeviceParams& params,
                            const ControlPulse* start = nullptr);

}  // namespace czgrape
