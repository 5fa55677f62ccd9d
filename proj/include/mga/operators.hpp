#pragma once

#include <Eigen/Dense>

#include "mga/trigpoly.hpp"

namespace mga {

enum class Space { Plus, Full };

// Cut-off compression of an operator on l^2(Z>=0) (Plus, indices 0..L-1) or
// l^2(Z) (Full, indices -L..L).  Entry (row j, col k) is <E_j, a E_k> in the
// canonical basis.  Identities involving shifts hold only on an interior
// mask whose width is the word length of the expression; tests declare
// their mask.
struct TruncatedOperator {
  Space space = Space::Plus;
  int L = 0;
  Eigen::MatrixXcd mat;

  TruncatedOperator() = default;
  TruncatedOperator(Space s, int l) : space(s), L(l) {
    mat = Eigen::MatrixXcd::Zero(dim(), dim());
  }

  int dim() const { return space == Space::Plus ? L : 2 * L + 1; }
  int min_index() const { return space == Space::Plus ? 0 : -L; }
  int max_index() const { return space == Space::Plus ? L - 1 : L; }
  int pos(int idx) const { return space == Space::Plus ? idx : idx + L; }

  cplx& at(int j, int k) { return mat(pos(j), pos(k)); }
  cplx at(int j, int k) const { return mat(pos(j), pos(k)); }

  bool index_ok(int idx) const { return idx >= min_index() && idx <= max_index(); }

  TruncatedOperator& operator+=(const TruncatedOperator& o) {
    require_same_shape(o);
    mat += o.mat;
    return *this;
  }
  TruncatedOperator& operator-=(const TruncatedOperator& o) {
    require_same_shape(o);
    mat -= o.mat;
    return *this;
  }
  TruncatedOperator& operator*=(cplx s) {
    mat *= s;
    return *this;
  }

  friend TruncatedOperator operator+(TruncatedOperator a, const TruncatedOperator& b) { return a += b; }
  friend TruncatedOperator operator-(TruncatedOperator a, const TruncatedOperator& b) { return a -= b; }
  friend TruncatedOperator operator*(cplx s, TruncatedOperator a) { return a *= s; }

  friend TruncatedOperator operator*(const TruncatedOperator& a, const TruncatedOperator& b) {
    a.require_same_shape(b);
    TruncatedOperator out(a.space, a.L);
    out.mat.noalias() = a.mat * b.mat;
    return out;
  }

  TruncatedOperator adjoint() const {
    TruncatedOperator out(space, L);
    out.mat = mat.adjoint();
    return out;
  }

  void require_same_shape(const TruncatedOperator& o) const {
    if (space != o.space || L != o.L)
      fail_input("ShapeMismatch", "operators live on different truncations");
  }
};

inline TruncatedOperator commutator(const TruncatedOperator& a, const TruncatedOperator& b) {
  a.require_same_shape(b);
  TruncatedOperator out(a.space, a.L);
  out.mat.noalias() = a.mat * b.mat;
  out.mat.noalias() -= b.mat * a.mat;
  return out;
}

inline TruncatedOperator make_zero(Space space, int L) { return TruncatedOperator(space, L); }

inline TruncatedOperator make_identity(Space space, int L) {
  TruncatedOperator out(space, L);
  out.mat.setIdentity();
  return out;
}

// U^power on Plus (negative power = (U*)^|power|) or V^power on Full.
// Entries whose source or target falls outside the range are dropped.
inline TruncatedOperator make_shift(Space space, int power, int L) {
  if (std::abs(power) > L) fail_input("BadShift", "|power| exceeds the truncation size");
  TruncatedOperator out(space, L);
  for (int k = out.min_index(); k <= out.max_index(); ++k) {
    int j = k + power;
    if (out.index_ok(j)) out.at(j, k) = 1.0;
  }
  return out;
}

// Diagonal f(x_k) over the index range.
inline TruncatedOperator make_mult(const GroupSpec& g, const TrigPoly& f, Space space, int L) {
  TruncatedOperator out(space, L);
  for (int k = out.min_index(); k <= out.max_index(); ++k) out.at(k, k) = evaluate_at_orbit(g, f, k);
  return out;
}

// Label operator: diag(k) on Plus, diag(l), l in [-L,L], on Full.
inline TruncatedOperator make_label(Space space, int L) {
  TruncatedOperator out(space, L);
  for (int k = out.min_index(); k <= out.max_index(); ++k) out.at(k, k) = static_cast<double>(k);
  return out;
}

// Rank-one matrix unit E_{k_to} <E_{k_from}, .> = U^{k_to} P_0 (U*)^{k_from}.
inline TruncatedOperator make_projection(int k_from, int k_to, int L) {
  if (k_from < 0 || k_to < 0 || k_from >= L || k_to >= L)
    fail_input("BadProjection", "projection indices out of range");
  TruncatedOperator out(Space::Plus, L);
  out.at(k_to, k_from) = 1.0;
  return out;
}

// Toeplitz compression T(b) = P_+ b s: the corner submatrix on indices 0..L-1.
inline TruncatedOperator toeplitz_map(const TruncatedOperator& b) {
  if (b.space != Space::Full) fail_input("BadSpace", "toeplitz_map expects a Full-space operator");
  TruncatedOperator out(Space::Plus, b.L);
  out.mat = b.mat.block(b.L, b.L, b.L, b.L);
  return out;
}

// Circle action: entry (j,k) picks up exp(i theta (j-k)).
inline TruncatedOperator rho_theta(const TruncatedOperator& a, double theta) {
  TruncatedOperator out(a.space, a.L);
  int n = a.dim();
  Eigen::VectorXcd ph(n);
  for (int r = 0; r < n; ++r) ph(r) = std::polar(1.0, theta * static_cast<double>(r));
  out.mat = ph.asDiagonal() * a.mat * ph.conjugate().asDiagonal();
  return out;
}

// The weight-n spectral piece: entries with row - col = n.
// Equals (1/2pi) int e^{i n theta} rho_theta^{-1}(a) d theta.
inline TruncatedOperator band_extract(const TruncatedOperator& a, int n) {
  TruncatedOperator out(a.space, a.L);
  int d = a.dim();
  for (int c = 0; c < d; ++c) {
    int r = c + n;
    if (r >= 0 && r < d) out.mat(r, c) = a.mat(r, c);
  }
  return out;
}

inline double hs_norm(const TruncatedOperator& a) { return a.mat.norm(); }

// Largest singular value of the truncation.
inline double op_norm(const TruncatedOperator& a) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.mat);
  return svd.singularValues()(0);
}

// --- interior masking -------------------------------------------------------
//
// Plus space: index 0 is a genuine boundary of l^2(Z>=0); only the top edge
// (indices > L-1-margin) is truncation artifact.  Full space: both edges.

inline bool index_interior(const TruncatedOperator& a, int idx, int margin) {
  if (a.space == Space::Plus) return idx <= a.L - 1 - margin;
  return idx >= -a.L + margin && idx <= a.L - margin;
}

inline TruncatedOperator masked(const TruncatedOperator& a, int margin) {
  TruncatedOperator out = a;
  for (int j = a.min_index(); j <= a.max_index(); ++j)
    for (int k = a.min_index(); k <= a.max_index(); ++k)
      if (!index_interior(a, j, margin) || !index_interior(a, k, margin)) out.at(j, k) = 0.0;
  return out;
}

// max |a - b| over entries whose row and column are interior.
inline double max_abs_interior(const TruncatedOperator& a, const TruncatedOperator& b, int margin) {
  a.require_same_shape(b);
  double m = 0.0;
  for (int j = a.min_index(); j <= a.max_index(); ++j) {
    if (!index_interior(a, j, margin)) continue;
    for (int k = a.min_index(); k <= a.max_index(); ++k) {
      if (!index_interior(a, k, margin)) continue;
      m = std::max(m, std::abs(a.at(j, k) - b.at(j, k)));
    }
  }
  return m;
}

inline double hs_norm_interior(const TruncatedOperator& a, int margin) {
  return hs_norm(masked(a, margin));
}

}  // namespace mga
