#pragma once

#include <array>
#include <string>
#include <vector>

#include "czgrape/anharmonicity.hpp"
#include "czgrape/statespace.hpp"

namespace czgrape {

/// Parameters of one qubit. Linear frequency units throughout (GHz); the
/// conversion to angular units happens once, inside HamiltonianDecomposition.
struct QubitParams {
  double omega_park_ghz = 0.0;  // parking frequency
  double g_ghz = 0.0;           // qubit-bus coupling
  AnharmonicityModel anharm = AnharmonicityModel::constant(0.0);
};

struct DeviceParams {
  double omega_b_ghz = 0.0;  // bus frequency
  std::array<QubitParams, 2> qubit;

  /// delta_k at parking: omega_park_k - omega_b.
  double parking_delta_ghz(int k) const {
    return qubit[k].omega_park_ghz - omega_b_ghz;
  }

  /// g = 1/(2 T_swap) with T_swap in ns, g in GHz.
  static double g_from_swap_time_ns(double t_swap_ns);

  /// Throws ConfigError on hard violations (g <= 0); returns soft warnings
  /// (e.g. coupling too strong for the rotating-wave approximation).
  std::vector<std::string> validate() const;
};

/// Rotating-frame Hamiltonian split into drift and the two number-operator
/// controls:
///
///   H(d1, d2) = coupling + sum_k 2*pi*[ d_k n_k + Delta_k(d_k) P2_k ]
///
/// Inputs d_k are linear GHz; every matrix this class hands out is angular
/// (rad/ns). The coupling part is the only off-diagonal piece, so everything
/// detuning-dependent lives on the diagonal.
class HamiltonianDecomposition {
 public:
  HamiltonianDecomposition(const StateSpace& space, DeviceParams params);

  const StateSpace& space() const { return *space_; }
  const DeviceParams& params() const { return params_; }

  /// Off-diagonal coupling sum_k (g_k/2)(sigma+_k a + sigma-_k a+), angular.
  const Matrix& coupling() const { return coupling_; }

  /// Drift at zero detuning: coupling plus the anharmonic shifts Delta_k(0).
  Matrix drift() const { return at(0.0, 0.0); }

  /// Bare control operator 2*pi*n_k (angular response per GHz of detuning).
  const Matrix& control(int k) const { return control_[k]; }

  /// Full Hamiltonian at the given detunings (linear GHz in, angular out).
  Matrix at(double d1_ghz, double d2_ghz) const;

  /// Diagonal part of at() as a real vector (the coupling is excluded).
  Eigen::VectorXd diagonal_at(double d1_ghz, double d2_ghz) const;

  /// Diagonal of dH/dd_k at the given detuning of qubit k, in rad/ns per GHz:
  /// 2*pi*(n_k + Delta_k'(d_k) P2_k). For constant anharmonicity this is just
  /// the control(k) diagonal.
  Eigen::VectorXd control_derivative_diag(int k, double dk_ghz) const;

  /// Tangent-line split at the expansion point (d1, d2): on exit
  /// hd + d1*h1 + d2*h2 equals at(d1, d2) exactly, and h_k carries the local
  /// anharmonicity slope. For constant anharmonicity hd is the drift and h_k
  /// the bare controls, independent of the expansion point.
  void linearize(double d1_ghz, double d2_ghz, Matrix& hd, Matrix& h1,
                 Matrix& h2) const;

 private:
  const StateSpace* space_;
  DeviceParams params_;
  Matrix coupling_;
  std::array<Matrix, 2> control_;
  std::array<Eigen::VectorXd, 2> number_diag_;
  std::array<Eigen::VectorXd, 2> proj2_diag_;
};

/// Lab-frame two-excitation block of one qubit plus the bus over the bare
/// states |2,0>, |1,1>, |0,2> (qubit excitations first). Inputs linear GHz,
/// output angular rad/ns. The off-diagonals are sqrt(2)*g/2 as dictated by
/// the (g/2)(sigma+ a + sigma- a+) coupling.
Matrix jc_two_excitation_block(double omega_b_ghz, double delta_ghz,
                               double anharm_ghz, double g_ghz);

/// Eigenvalues of the two-excitation block across a detuning range. Returns
/// one row per detuning with the three branches sorted ascending by value
/// (branches swap identity at anticrossings; sorting by value keeps each
/// returned curve continuous). Values in linear GHz for plotting.
struct JcSpectrum {
  std::vector<double> delta_ghz;
  std::vector<std::array<double, 3>> branches_ghz;  // ascending per row
  std::vector<std::array<double, 3>> bare_ghz;      // uncoupled energies
};
JcSpectrum jc_spectrum(double omega_b_ghz, double anharm_ghz, double g_ghz,
                       const std::vector<double>& delta_range_ghz);

}  // namespace czgrape
