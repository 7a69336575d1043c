#pragma once

#include <vector>

namespace czgrape {

/// Anharmonicity of one transmon as a function of its flux-tuned detuning
/// from the bus, Delta_k(delta_k). Linear frequency units (GHz) on both axes.
///
/// Two flavors: a constant (detuning-independent) value, or a monotone cubic
/// interpolant through tabulated (delta, Delta) samples. The tabulated flavor
/// refuses queries outside the sampled range rather than extrapolating.
class AnharmonicityModel {
 public:
  static AnharmonicityModel constant(double delta_ghz);

  /// Fritsch-Carlson shape-preserving cubic through the given knots.
  /// Knots must be strictly increasing in delta; at least two are required.
  static AnharmonicityModel tabulated(std::vector<double> delta_ghz,
                                      std::vector<double> anharmonicity_ghz);

  double value(double delta_ghz) const;
  /// d(Delta)/d(delta), analytic derivative of the interpolant (0 for constant).
  double derivative(double delta_ghz) const;
  bool in_range(double delta_ghz) const;
  bool is_constant() const { return constant_; }

  /// Same curve with the dependent axis scaled by `factor` (used by sweeps
  /// that weaken or strengthen the anharmonicity wholesale).
  AnharmonicityModel scaled(double factor) const;

  double min_delta() const;
  double max_delta() const;

 private:
  AnharmonicityModel() = default;
  int interval_of(double x) const;

  bool constant_ = true;
  double const_value_ = 0.0;
  std::vector<double> x_;   // knot abscissae
  std::vector<double> y_;   // knot values
  std::vector<double> d_;   // knot derivatives (Fritsch-Carlson limited)
};

}  // namespace czgrape
