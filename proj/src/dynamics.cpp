#include "czgrape/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "czgrape/errors.hpp"

namespace czgrape {

void ControlPulse::validate() const {
  if (channel_ghz[0].size() != channel_ghz[1].size())
    throw ConfigError("pulse channels differ in length");
  if (n_pixels() < 1) throw ConfigError("pulse has no pixels");
  if (!(dt_ns > 0.0)) throw ConfigError("pixel duration must be positive");
  if (n_buffer < 0) throw ConfigError("buffer pixel count must be >= 0");
  if (n_main() < 1)
    throw ConfigError("buffer pixels leave no main pulse window");
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < n_pixels(); ++j)
      if (is_buffer(j) && channel_ghz[k][j] != buffer_value_ghz[k])
        throw ConfigError("buffer pixel " + std::to_string(j) + " of channel " +
                          std::to_string(k + 1) +
                          " deviates from its pinned parking value");
}

static void check_hermitian(const Matrix& h) {
  double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  double res = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (res > 1e-9 * scale)
    throw std::invalid_argument("expm_hermitian: input is not Hermitian");
}

Matrix expm_hermitian(const Matrix& h, double dt_ns) {
  check_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("expm_hermitian: eigensolver failed");
  Vector phases(h.rows());
  for (int i = 0; i < h.rows(); ++i)
    phases(i) = std::polar(1.0, -es.eigenvalues()(i) * dt_ns);
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

SectorEigen sector_eigensystem(const StateSpace& space, const Matrix& h) {
  SectorEigen out;
  for (const auto& sector : space.sectors()) {
    const int m = static_cast<int>(sector.size());
    Matrix block(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) block(r, c) = h(sector[r], sector[c]);
    if (m == 1) {
      out.eigenvalues.push_back(Eigen::VectorXd::Constant(1, block(0, 0).real()));
      out.eigenvectors.push_back(Matrix::Identity(1, 1));
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(block);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("sector_eigensystem: eigensolver failed");
    out.eigenvalues.push_back(es.eigenvalues());
    out.eigenvectors.push_back(es.eigenvectors());
  }
  return out;
}

Matrix sector_unitary(const StateSpace& space, const SectorEigen& es,
                      double dt_ns) {
  Matrix u = Matrix::Zero(space.dim(), space.dim());
  const auto& sectors = space.sectors();
  for (size_t s = 0; s < sectors.size(); ++s) {
    const auto& sector = sectors[s];
    const int m = static_cast<int>(sector.size());
    Vector phases(m);
    for (int i = 0; i < m; ++i)
      phases(i) = std::polar(1.0, -es.eigenvalues[s](i) * dt_ns);
    Matrix block = es.eigenvectors[s] * phases.asDiagonal() *
                   es.eigenvectors[s].adjoint();
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) u(sector[r], sector[c]) = block(r, c);
  }
  return u;
}

Matrix propagate(const ControlPulse& pulse, const HamiltonianDecomposition& h,
                 Trajectory* trajectory, int initial) {
  pulse.validate();
  const StateSpace& space = h.space();
  const int n = pulse.n_pixels();

  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < n; ++j) {
      double v = pulse.channel_ghz[k][j];
      if (!h.params().qubit[k].anharm.in_range(v))
        throw PixelRangeError(
            k + 1, j, v,
            "pixel " + std::to_string(j) + " of channel " +
                std::to_string(k + 1) + " (" + std::to_string(v) +
                " GHz) is outside the anharmonicity table");
    }

  Matrix u = Matrix::Identity(space.dim(), space.dim());
  Vector psi;
  if (trajectory) {
    trajectory->times_ns.clear();
    trajectory->populations.clear();
    trajectory->unitaries.clear();
    psi = Vector::Zero(space.dim());
    psi(initial) = 1.0;
    trajectory->times_ns.push_back(0.0);
    trajectory->populations.push_back(psi.cwiseAbs2());
    if (trajectory->store_unitaries) trajectory->unitaries.push_back(u);
  }

  for (int j = 0; j < n; ++j) {
    Matrix hj = h.at(pulse.channel_ghz[0][j], pulse.channel_ghz[1][j]);
    SectorEigen es = sector_eigensystem(space, hj);
    Matrix uj = sector_unitary(space, es, pulse.dt_ns);
    u = uj * u;
    if (trajectory) {
      psi = uj * psi;
      trajectory->times_ns.push_back((j + 1) * pulse.dt_ns);
      trajectory->populations.push_back(psi.cwiseAbs2());
      if (trajectory->store_unitaries) trajectory->unitaries.push_back(u);
    }
  }
  return u;
}

static constexpr double pi = 3.14159265358979323846;

static double principal_angle(double x) {
  double y = std::remainder(x, two_pi);
  if (y <= -pi) y += two_pi;
  return y;
}

StrauchTrace strauch_rotation_trace(double omega_b_ghz, double anharm_ghz,
                                    double g_ghz, int n_samples) {
  Matrix h = jc_two_excitation_block(omega_b_ghz, -anharm_ghz, anharm_ghz,
                                     g_ghz);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector psi0 = Vector::Zero(3);
  psi0(1) = 1.0;  // |1,1>
  Vector c = es.eigenvectors().adjoint() * psi0;

  StrauchTrace out;
  out.t_2pi_ns = std::sqrt(2.0) / (2.0 * g_ghz);
  out.max_leak_02 = 0.0;
  for (int i = 0; i <= n_samples; ++i) {
    double x = static_cast<double>(i) / n_samples;
    double t = x * out.t_2pi_ns;
    Vector phased(3);
    for (int p = 0; p < 3; ++p)
      phased(p) = std::polar(1.0, -es.eigenvalues()(p) * t) * c(p);
    Vector psi = es.eigenvectors() * phased;
    out.time_over_t2pi.push_back(x);
    out.populations.push_back(
        {std::norm(psi(0)), std::norm(psi(1)), std::norm(psi(2))});
    out.max_leak_02 = std::max(out.max_leak_02, std::norm(psi(2)));
  }
  return out;
}

StrauchPhase strauch_phase_deviation(double omega_b_ghz, double anharm_ghz,
                                     double g_ghz, bool two_level,
                                     int n_samples) {
  Matrix h3 = jc_two_excitation_block(omega_b_ghz, -anharm_ghz, anharm_ghz,
                                      g_ghz);
  Matrix h = two_level ? Matrix(h3.topLeftCorner(2, 2)) : h3;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const int dim = static_cast<int>(h.rows());
  Vector psi0 = Vector::Zero(dim);
  psi0(1) = 1.0;
  Vector c = es.eigenvectors().adjoint() * psi0;

  double t_2pi = std::sqrt(2.0) / (2.0 * g_ghz);
  double ref_ghz = 2.0 * omega_b_ghz - anharm_ghz;

  StrauchPhase out;
  double prev = 0.0;
  bool have_prev = false;
  for (int i = 0; i <= n_samples; ++i) {
    double x = static_cast<double>(i) / n_samples;
    double t = x * t_2pi;
    complexd a = 0.0;
    for (int p = 0; p < dim; ++p)
      a += es.eigenvectors()(1, p) * std::polar(1.0, -es.eigenvalues()(p) * t) *
           c(p);
    out.time_over_t2pi.push_back(x);
    bool ok = std::abs(a) > 1e-12;
    out.defined.push_back(ok);
    if (!ok) {
      out.phase_rad.push_back(prev);
      continue;
    }
    // Rotate out the reference phase, then unwrap by continuity.
    complexd z = a * std::polar(1.0, two_pi * ref_ghz * t);
    double raw = std::arg(z);
    double theta;
    if (!have_prev) {
      theta = raw;
      have_prev = true;
    } else {
      double diff = raw - prev;
      diff -= two_pi * std::floor((diff + pi) / two_pi);
      theta = prev + diff;
    }
    out.phase_rad.push_back(theta);
    prev = theta;
  }
  out.end_deviation_from_pi =
      principal_angle(prev - pi);
  return out;
}

}  // namespace czgrape
