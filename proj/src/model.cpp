#include "czgrape/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "czgrape/errors.hpp"

namespace czgrape {

double DeviceParams::g_from_swap_time_ns(double t_swap_ns) {
  if (!(t_swap_ns > 0.0)) throw ConfigError("swap time must be positive");
  return 1.0 / (2.0 * t_swap_ns);
}

std::vector<std::string> DeviceParams::validate() const {
  if (!(omega_b_ghz > 0.0)) throw ConfigError("bus frequency must be positive");
  std::vector<std::string> warnings;
  for (int k = 0; k < 2; ++k) {
    const auto& q = qubit[k];
    if (!(q.g_ghz > 0.0))
      throw ConfigError("qubit " + std::to_string(k + 1) +
                        ": coupling strength must be positive");
    if (q.g_ghz > 0.1 * omega_b_ghz)
      warnings.push_back("qubit " + std::to_string(k + 1) +
                         ": g exceeds 0.1*omega_b, the rotating-wave "
                         "approximation is questionable");
    double park = parking_delta_ghz(k);
    if (!q.anharm.in_range(park))
      throw ConfigError("qubit " + std::to_string(k + 1) +
                        ": parking detuning outside the anharmonicity table");
  }
  return warnings;
}

HamiltonianDecomposition::HamiltonianDecomposition(const StateSpace& space,
                                                  DeviceParams params)
    : space_(&space), params_(std::move(params)) {
  const Mode modes[2] = {Mode::q1, Mode::q2};
  Matrix a_bus = space.lowering(Mode::bus);
  coupling_ = Matrix::Zero(space.dim(), space.dim());
  for (int k = 0; k < 2; ++k) {
    Matrix sp = space.raising(modes[k]);
    double g_ang = two_pi * params_.qubit[k].g_ghz;
    Matrix half = 0.5 * g_ang * sp * a_bus;
    coupling_ += half + half.adjoint();
    control_[k] = two_pi * space.number(modes[k]);
    number_diag_[k] = space.number_diagonal(modes[k]);
    proj2_diag_[k] = space.projector_level2_diagonal(modes[k]);
  }
}

Eigen::VectorXd HamiltonianDecomposition::diagonal_at(double d1_ghz,
                                                      double d2_ghz) const {
  const double d[2] = {d1_ghz, d2_ghz};
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(space_->dim());
  for (int k = 0; k < 2; ++k) {
    double anh = params_.qubit[k].anharm.value(d[k]);
    diag += two_pi * (d[k] * number_diag_[k] + anh * proj2_diag_[k]);
  }
  return diag;
}

Matrix HamiltonianDecomposition::at(double d1_ghz, double d2_ghz) const {
  Matrix h = coupling_;
  h.diagonal() += diagonal_at(d1_ghz, d2_ghz).cast<complexd>();
  return h;
}

Eigen::VectorXd HamiltonianDecomposition::control_derivative_diag(
    int k, double dk_ghz) const {
  double slope = params_.qubit[k].anharm.derivative(dk_ghz);
  return two_pi * (number_diag_[k] + slope * proj2_diag_[k]);
}

void HamiltonianDecomposition::linearize(double d1_ghz, double d2_ghz,
                                         Matrix& hd, Matrix& h1,
                                         Matrix& h2) const {
  const double d[2] = {d1_ghz, d2_ghz};
  Matrix* hk[2] = {&h1, &h2};
  for (int k = 0; k < 2; ++k) {
    *hk[k] = Matrix::Zero(space_->dim(), space_->dim());
    hk[k]->diagonal() = control_derivative_diag(k, d[k]).cast<complexd>();
  }
  // Anchor the affine part so the tangent model is exact at the expansion
  // point: hd = H(d) - d1 h1 - d2 h2.
  hd = at(d1_ghz, d2_ghz);
  hd.diagonal() -= (d[0] * hk[0]->diagonal() + d[1] * hk[1]->diagonal());
}

Matrix jc_two_excitation_block(double omega_b_ghz, double delta_ghz,
                               double anharm_ghz, double g_ghz) {
  Matrix h = Matrix::Zero(3, 3);
  double wb = omega_b_ghz, d = delta_ghz;
  h(0, 0) = 2 * wb + 2 * d + anharm_ghz;
  h(1, 1) = 2 * wb + d;
  h(2, 2) = 2 * wb;
  double v = std::sqrt(2.0) * g_ghz / 2.0;
  h(0, 1) = h(1, 0) = v;
  h(1, 2) = h(2, 1) = v;
  return two_pi * h;
}

JcSpectrum jc_spectrum(double omega_b_ghz, double anharm_ghz, double g_ghz,
                       const std::vector<double>& delta_range_ghz) {
  JcSpectrum out;
  out.delta_ghz = delta_range_ghz;
  out.branches_ghz.reserve(delta_range_ghz.size());
  out.bare_ghz.reserve(delta_range_ghz.size());
  for (double d : delta_range_ghz) {
    Matrix h = jc_two_excitation_block(omega_b_ghz, d, anharm_ghz, g_ghz);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("jc_spectrum: eigensolver failed");
    std::array<double, 3> row;
    for (int i = 0; i < 3; ++i) row[i] = es.eigenvalues()(i) / two_pi;
    std::sort(row.begin(), row.end());
    out.branches_ghz.push_back(row);
    out.bare_ghz.push_back({2 * omega_b_ghz + 2 * d + anharm_ghz,
                            2 * omega_b_ghz + d, 2 * omega_b_ghz});
  }
  return out;
}

}  // namespace czgrape
