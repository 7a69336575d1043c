#include "czgrape/anharmonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "czgrape/errors.hpp"

namespace czgrape {

AnharmonicityModel AnharmonicityModel::constant(double delta_ghz) {
  AnharmonicityModel m;
  m.constant_ = true;
  m.const_value_ = delta_ghz;
  return m;
}

AnharmonicityModel AnharmonicityModel::tabulated(std::vector<double> delta_ghz,
                                                std::vector<double> anharmonicity_ghz) {
  if (delta_ghz.size() != anharmonicity_ghz.size())
    throw ConfigError("anharmonicity table: delta and value counts differ");
  if (delta_ghz.size() < 2)
    throw ConfigError("anharmonicity table: need at least two knots");
  for (size_t i = 1; i < delta_ghz.size(); ++i)
    if (!(delta_ghz[i] > delta_ghz[i - 1]))
      throw ConfigError("anharmonicity table: knots must be strictly increasing");

  AnharmonicityModel m;
  m.constant_ = false;
  m.x_ = std::move(delta_ghz);
  m.y_ = std::move(anharmonicity_ghz);

  // Fritsch-Carlson: secant slopes, then derivative limiting so the cubic
  // preserves monotonicity on every interval.
  const size_t n = m.x_.size();
  std::vector<double> h(n - 1), s(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = m.x_[i + 1] - m.x_[i];
    s[i] = (m.y_[i + 1] - m.y_[i]) / h[i];
  }
  m.d_.assign(n, 0.0);
  m.d_[0] = s[0];
  m.d_[n - 1] = s[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (s[i - 1] * s[i] <= 0.0) {
      m.d_[i] = 0.0;
    } else {
      double w1 = 2.0 * h[i] + h[i - 1];
      double w2 = h[i] + 2.0 * h[i - 1];
      m.d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
    }
  }
  for (size_t i = 0; i + 1 < n; ++i) {
    if (s[i] == 0.0) {
      m.d_[i] = 0.0;
      m.d_[i + 1] = 0.0;
      continue;
    }
    double a = m.d_[i] / s[i];
    double b = m.d_[i + 1] / s[i];
    double r = a * a + b * b;
    if (r > 9.0) {
      double t = 3.0 / std::sqrt(r);
      m.d_[i] = t * a * s[i];
      m.d_[i + 1] = t * b * s[i];
    }
  }
  return m;
}

bool AnharmonicityModel::in_range(double delta_ghz) const {
  if (constant_) return true;
  return delta_ghz >= x_.front() && delta_ghz <= x_.back();
}

double AnharmonicityModel::min_delta() const {
  return constant_ ? -std::numeric_limits<double>::infinity() : x_.front();
}

double AnharmonicityModel::max_delta() const {
  return constant_ ? std::numeric_limits<double>::infinity() : x_.back();
}

int AnharmonicityModel::interval_of(double x) const {
  if (!in_range(x))
    throw ConfigError("anharmonicity query outside tabulated range");
  // upper_bound lands one past the containing interval's left knot.
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  int i = static_cast<int>(it - x_.begin()) - 1;
  if (i < 0) i = 0;
  if (i > static_cast<int>(x_.size()) - 2) i = static_cast<int>(x_.size()) - 2;
  return i;
}

double AnharmonicityModel::value(double delta_ghz) const {
  if (constant_) return const_value_;
  int i = interval_of(delta_ghz);
  double h = x_[i + 1] - x_[i];
  double t = (delta_ghz - x_[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1;
  double h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2;
  double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double AnharmonicityModel::derivative(double delta_ghz) const {
  if (constant_) return 0.0;
  int i = interval_of(delta_ghz);
  double h = x_[i + 1] - x_[i];
  double t = (delta_ghz - x_[i]) / h;
  double t2 = t * t;
  double dh00 = (6 * t2 - 6 * t) / h;
  double dh10 = 3 * t2 - 4 * t + 1;
  double dh01 = (-6 * t2 + 6 * t) / h;
  double dh11 = 3 * t2 - 2 * t;
  return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

AnharmonicityModel AnharmonicityModel::scaled(double factor) const {
  AnharmonicityModel m = *this;
  if (constant_) {
    m.const_value_ *= factor;
    return m;
  }
  for (auto& v : m.y_) v *= factor;
  for (auto& v : m.d_) v *= factor;
  return m;
}

}  // namespace czgrape
