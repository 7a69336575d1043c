#include "czgrape/statespace.hpp"

#include <cmath>
#include <stdexcept>

namespace czgrape {

int BasisState::level(Mode m) const {
  switch (m) {
    case Mode::q1: return n1;
    case Mode::q2: return n2;
    case Mode::bus: return nb;
  }
  return 0;
}

BasisState BasisState::with_level(Mode m, int n) const {
  BasisState s = *this;
  switch (m) {
    case Mode::q1: s.n1 = n; break;
    case Mode::q2: s.n2 = n; break;
    case Mode::bus: s.nb = n; break;
  }
  return s;
}

std::string BasisState::label() const {
  return std::to_string(n1) + std::to_string(n2) + std::to_string(nb);
}

StateSpace::StateSpace(int max_excitations, int levels_per_mode)
    : max_exc_(max_excitations), levels_(levels_per_mode) {
  if (max_excitations < 0 || levels_per_mode < 1)
    throw std::invalid_argument("StateSpace: nonsensical truncation");
  for (int n1 = 0; n1 < levels_; ++n1)
    for (int n2 = 0; n2 < levels_; ++n2)
      for (int nb = 0; nb < levels_; ++nb) {
        BasisState s{n1, n2, nb};
        if (s.total() <= max_exc_) states_.push_back(s);
      }

  sectors_.resize(max_exc_ + 1);
  for (int i = 0; i < dim(); ++i) sectors_[states_[i].total()].push_back(i);

  const BasisState comp[4] = {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0}};
  for (const auto& s : comp) {
    int idx = index_of(s);
    if (idx >= 0) comp_idx_.push_back(idx);
  }
}

const StateSpace& StateSpace::two_quanta() {
  static const StateSpace space(2, 3);
  return space;
}

int StateSpace::index_of(const BasisState& s) const {
  if (s.n1 < 0 || s.n2 < 0 || s.nb < 0) return -1;
  if (s.n1 >= levels_ || s.n2 >= levels_ || s.nb >= levels_) return -1;
  if (s.total() > max_exc_) return -1;
  // Lexicographic enumeration makes a scan cheap at dim 10; no need for a map.
  for (int i = 0; i < dim(); ++i)
    if (states_[i] == s) return i;
  return -1;
}

Matrix StateSpace::lowering(Mode m) const {
  Matrix a = Matrix::Zero(dim(), dim());
  for (int j = 0; j < dim(); ++j) {
    int n = states_[j].level(m);
    if (n == 0) continue;
    int i = index_of(states_[j].with_level(m, n - 1));
    if (i >= 0) a(i, j) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

Matrix StateSpace::raising(Mode m) const { return lowering(m).adjoint(); }

Matrix StateSpace::number(Mode m) const {
  Matrix n = Matrix::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) n(i, i) = states_[i].level(m);
  return n;
}

Matrix StateSpace::projector_level2(Mode m) const {
  Matrix p = Matrix::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    if (states_[i].level(m) == 2) p(i, i) = 1.0;
  return p;
}

Matrix StateSpace::computational_projector() const {
  Matrix p = Matrix::Zero(dim(), dim());
  for (int idx : comp_idx_) p(idx, idx) = 1.0;
  return p;
}

Eigen::VectorXd StateSpace::number_diagonal(Mode m) const {
  Eigen::VectorXd d(dim());
  for (int i = 0; i < dim(); ++i) d(i) = states_[i].level(m);
  return d;
}

Eigen::VectorXd StateSpace::projector_level2_diagonal(Mode m) const {
  Eigen::VectorXd d(dim());
  for (int i = 0; i < dim(); ++i) d(i) = states_[i].level(m) == 2 ? 1.0 : 0.0;
  return d;
}

}  // namespace czgrape
