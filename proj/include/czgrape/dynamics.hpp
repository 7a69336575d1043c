#pragma once

#include <array>
#include <optional>
#include <vector>

#include "czgrape/model.hpp"
#include "czgrape/statespace.hpp"

namespace czgrape {

/// Piecewise-constant two-channel detuning sequence. Each channel holds one
/// detuning value per pixel (linear GHz). The first and last n_buffer pixels
/// of each channel are buffers: they are pinned to buffer_value_ghz[k] and
/// excluded from optimization.
struct ControlPulse {
  double dt_ns = 0.5;
  int n_buffer = 0;
  std::array<double, 2> buffer_value_ghz = {0.0, 0.0};
  std::array<std::vector<double>, 2> channel_ghz;

  int n_pixels() const { return static_cast<int>(channel_ghz[0].size()); }
  int n_main() const { return n_pixels() - 2 * n_buffer; }
  bool is_buffer(int pixel) const {
    return pixel < n_buffer || pixel >= n_pixels() - n_buffer;
  }
  double main_duration_ns() const { return n_main() * dt_ns; }
  double total_duration_ns() const { return n_pixels() * dt_ns; }

  /// Throws ConfigError when the channels disagree in length, the buffer
  /// count leaves no main window, or buffer pixels deviate from their pinned
  /// value.
  void validate() const;
};

/// Per-pixel sampled populations for one initial state.
struct Trajectory {
  std::vector<double> times_ns;                  // pixel boundaries, 0 first
  std::vector<Eigen::VectorXd> populations;      // one basis-length row each
  std::vector<Matrix> unitaries;                 // cumulative, optional
  bool store_unitaries = false;
};

/// U = exp(-i H dt) for Hermitian H via eigendecomposition.
/// Rejects non-Hermitian input.
Matrix expm_hermitian(const Matrix& h, double dt_ns);

/// Eigen-decomposition of one Hamiltonian carried out sector by sector.
/// Cross-sector elements of the reassembled unitary are exactly zero: they
/// are simply never written.
struct SectorEigen {
  // One entry per excitation sector, in sector order.
  std::vector<Eigen::VectorXd> eigenvalues;
  std::vector<Matrix> eigenvectors;
};

SectorEigen sector_eigensystem(const StateSpace& space, const Matrix& h);

/// exp(-i H dt) assembled from a sector eigensystem.
Matrix sector_unitary(const StateSpace& space, const SectorEigen& es,
                      double dt_ns);

/// Total propagator of a pulse, buffers included:
/// U = U_N ... U_2 U_1 with U_j = exp(-i H(d1_j, d2_j) dt).
/// Throws PixelRangeError naming the offending channel and pixel when a
/// detuning leaves the anharmonicity table.
/// When trajectory is non-null it is filled with per-pixel populations of
/// `initial` (basis ordinal), plus cumulative unitaries if requested.
Matrix propagate(const ControlPulse& pulse, const HamiltonianDecomposition& h,
                 Trajectory* trajectory = nullptr, int initial = 0);

/// Result of the single-anticrossing Strauch analyses on the two-excitation
/// qubit-bus block (lab frame).
struct StrauchTrace {
  std::vector<double> time_over_t2pi;            // normalized time in [0, 1]
  std::vector<std::array<double, 3>> populations;  // |2,0>, |1,1>, |0,2>
  double t_2pi_ns = 0.0;                         // duration of the 2pi loop
  double max_leak_02 = 0.0;                      // peak |0,2> population
};

/// Propagates |1,1> through the block at delta = -anharm (the anticrossing)
/// for one 2pi rotation through |2,0>. t_2pi = sqrt(2) * T_swap with
/// T_swap = 1/(2g), the two-level value; the third level perturbs the loop
/// but the normalization time is kept at the ideal value.
StrauchTrace strauch_rotation_trace(double omega_b_ghz, double anharm_ghz,
                                    double g_ghz, int n_samples = 400);

struct StrauchPhase {
  std::vector<double> time_over_t2pi;
  std::vector<double> phase_rad;     // unwrapped deviation from the reference
  std::vector<bool> defined;         // false where |<11|U|11>| ~ 0
  double end_deviation_from_pi = 0.0;
};

/// Phase of <1,1|U(t)|1,1> against the reference exp(-i(2 omega_b - anharm)t),
/// unwrapped; end_deviation_from_pi is its value at t_2pi minus pi.
/// two_level drops the |0,2> row/column first (ideal Strauch limit).
StrauchPhase strauch_phase_deviation(double omega_b_ghz, double anharm_ghz,
                                     double g_ghz, bool two_level = false,
                                     int n_samples = 400);

}  // namespace czgrape
