#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace czgrape {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using complexd = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// The three modes of the qubit-bus-qubit system.
enum class Mode { q1 = 0, q2 = 1, bus = 2 };

/// Occupation triple (n1, n2, nb), one entry per mode.
struct BasisState {
  int n1 = 0;
  int n2 = 0;
  int nb = 0;

  int total() const { return n1 + n2 + nb; }
  int level(Mode m) const;
  BasisState with_level(Mode m, int n) const;
  bool operator==(const BasisState&) const = default;

  /// Compact occupation label, e.g. "110" for (1,1,0).
  std::string label() const;
};

/// Excitation-truncated product basis together with the operator matrices the
/// Hamiltonian and the fidelity projector are assembled from.
///
/// Ordering is lexicographic by (n1, n2, nb); it is deterministic and stable
/// across runs. The truncation keeps every state with total() <= max_excitations
/// and drops the rest (rows/columns are projected out, ladder factors are not
/// renormalized).
class StateSpace {
 public:
  StateSpace(int max_excitations, int levels_per_mode);

  /// The space used throughout: at most 2 quanta, 3 levels per mode, dim 10.
  static const StateSpace& two_quanta();

  int dim() const { return static_cast<int>(states_.size()); }
  int max_excitations() const { return max_exc_; }
  int levels_per_mode() const { return levels_; }

  const std::vector<BasisState>& states() const { return states_; }
  const BasisState& state(int i) const { return states_[i]; }

  /// Ordinal of a state, or -1 when it falls outside the truncation.
  int index_of(const BasisState& s) const;

  /// Ordinals grouped by total excitation number, ascending in N.
  /// For the two-quanta space the sector sizes are 1, 3, 6.
  const std::vector<std::vector<int>>& sectors() const { return sectors_; }

  /// <.., n-1, ..| a |.., n, ..> = sqrt(n); zero whenever source or target
  /// leaves the truncation.
  Matrix lowering(Mode m) const;
  /// Exact conjugate transpose of lowering().
  Matrix raising(Mode m) const;
  /// Diagonal occupation-number operator of one mode.
  Matrix number(Mode m) const;
  /// Diagonal indicator of the mode sitting in its second excited level.
  Matrix projector_level2(Mode m) const;
  /// Diagonal indicator of the computational subspace: both qubits at most
  /// singly excited and the bus empty.
  Matrix computational_projector() const;

  /// Ordinals of the computational states, ordered |00>, |01>, |10>, |11>.
  const std::vector<int>& computational_indices() const { return comp_idx_; }

  /// Diagonal of number(m) as a real vector (handy for control operators).
  Eigen::VectorXd number_diagonal(Mode m) const;
  Eigen::VectorXd projector_level2_diagonal(Mode m) const;

 private:
  int max_exc_;
  int levels_;
  std::vector<BasisState> states_;
  std::vector<std::vector<int>> sectors_;
  std::vector<int> comp_idx_;
};

}  // namespace czgrape
