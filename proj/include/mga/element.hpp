#pragma once

#include "mga/operators.hpp"

namespace mga {

// ---------------------------------------------------------------------------
// Diagonal symbols a(K) + M_f
// ---------------------------------------------------------------------------

// A diagonal operator split into a finitely supported sequence part and a
// trigonometric-polynomial part.  The split is kept symbolically; it is never
// inferred from matrices.
struct DiagSymbol {
  std::map<std::int64_t, cplx> seq;  // k >= 0 -> a(k), finite support
  TrigPoly poly;

  bool is_zero() const { return seq.empty() && poly.is_zero(); }

  void add_seq(std::int64_t k, cplx v) {
    if (k < 0) fail_input("BadSymbol", "diagonal sequence index must be >= 0");
    auto it = seq.find(k);
    if (it == seq.end()) {
      if (std::abs(v) > kPruneTol) seq.emplace(k, v);
    } else {
      it->second += v;
      if (std::abs(it->second) <= kPruneTol) seq.erase(it);
    }
  }

  cplx seq_value(std::int64_t k) const {
    auto it = seq.find(k);
    return it == seq.end() ? cplx{0.0, 0.0} : it->second;
  }

  cplx value(const GroupSpec& g, std::int64_t k) const {
    return seq_value(k) + evaluate_at_orbit(g, poly, k);
  }

  std::int64_t seq_extent() const { return seq.empty() ? 0 : seq.rbegin()->first + 1; }

  DiagSymbol& operator+=(const DiagSymbol& o) {
    for (const auto& [k, v] : o.seq) add_seq(k, v);
    poly += o.poly;
    return *this;
  }
  DiagSymbol& operator*=(cplx s) {
    if (std::abs(s) <= kPruneTol) {
      seq.clear();
      poly = TrigPoly::zero();
      return *this;
    }
    for (auto& [k, v] : seq) v *= s;
    poly *= s;
    return *this;
  }

  DiagSymbol conjugate() const {
    DiagSymbol out;
    for (const auto& [k, v] : seq) out.seq.emplace(k, std::conj(v));
    out.poly = poly.conjugate();
    return out;
  }
};

// Pointwise product; sequence-by-polynomial cross terms are absorbed into the
// sequence part, so the split survives multiplication exactly.
inline DiagSymbol diag_mul(const GroupSpec& g, const DiagSymbol& a, const DiagSymbol& b) {
  DiagSymbol out;
  out.poly = a.poly * b.poly;
  for (const auto& [k, v] : a.seq) out.add_seq(k, v * b.value(g, k));
  for (const auto& [k, v] : b.seq) out.add_seq(k, v * evaluate_at_orbit(g, a.poly, k));
  return out;
}

// D |-> D(.+m), the symbol with D U^m = U^m translate(D,m)
// and (U*)^m D = translate(D,m) (U*)^m, for m >= 0.  Exact.
inline DiagSymbol diag_translate(const GroupSpec& g, const DiagSymbol& d, std::int64_t m) {
  DiagSymbol out;
  out.poly = compose_phi(g, d.poly, m);
  for (const auto& [k, v] : d.seq)
    if (k >= m) out.add_seq(k - m, v);
  return out;
}

// U^m D (U*)^m: value D(k-m) for k >= m, zero below m.  The polynomial part
// becomes f.phi^{-m} and the killed entries below m move into the sequence.
inline DiagSymbol diag_conjugate_up(const GroupSpec& g, const DiagSymbol& d, std::int64_t m) {
  DiagSymbol out;
  out.poly = compose_phi(g, d.poly, -m);
  for (const auto& [k, v] : d.seq) out.add_seq(k + m, v);
  for (std::int64_t k = 0; k < m; ++k) out.add_seq(k, -evaluate_at_orbit(g, out.poly, k));
  return out;
}

// ---------------------------------------------------------------------------
// Normal-form elements
// ---------------------------------------------------------------------------

// Plus space:  sum over n>=0 of U^n (a_n(K) + M_{f_n})
//            + sum over n<0  of (a_n(K) + M_{f_n}) (U*)^{-n}.
// Full space:  V^n M_{f_n} for n>=0, M_{f_n} V^n for n<0 (sequence parts absent).
struct AlgebraElement {
  Space space = Space::Plus;
  std::map<int, DiagSymbol> terms;

  explicit AlgebraElement(Space s = Space::Plus) : space(s) {}

  bool is_zero() const { return terms.empty(); }

  void add_term(int n, DiagSymbol d) {
    if (space == Space::Full && !d.seq.empty())
      fail_input("BadElement", "Full-space elements carry no sequence parts");
    auto it = terms.find(n);
    if (it == terms.end()) {
      if (!d.is_zero()) terms.emplace(n, std::move(d));
    } else {
      it->second += d;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  int max_band() const {
    int m = 0;
    for (const auto& [n, d] : terms) m = std::max(m, std::abs(n));
    return m;
  }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    if (space != o.space) fail_input("BadElement", "space mismatch");
    for (const auto& [n, d] : o.terms) add_term(n, d);
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    if (space != o.space) fail_input("BadElement", "space mismatch");
    for (const auto& [n, d] : o.terms) {
      DiagSymbol neg = d;
      neg *= cplx{-1.0, 0.0};
      add_term(n, std::move(neg));
    }
    return *this;
  }
  AlgebraElement& operator*=(cplx s) {
    if (std::abs(s) <= kPruneTol) {
      terms.clear();
      return *this;
    }
    for (auto& [n, d] : terms) d *= s;
    return *this;
  }

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(cplx s, AlgebraElement a) { return a *= s; }
};

// --- constructors -----------------------------------------------------------

inline AlgebraElement element_one(const GroupSpec& g, Space space) {
  AlgebraElement a(space);
  DiagSymbol d;
  d.poly = TrigPoly::constant(g, 1.0);
  a.add_term(0, std::move(d));
  return a;
}

// U^n / (U*)^{-n} on Plus, V^n on Full.
inline AlgebraElement element_shift(const GroupSpec& g, Space space, int n) {
  AlgebraElement a(space);
  DiagSymbol d;
  d.poly = TrigPoly::constant(g, 1.0);
  a.add_term(n, std::move(d));
  return a;
}

inline AlgebraElement element_mult(const TrigPoly& f, Space space) {
  AlgebraElement a(space);
  DiagSymbol d;
  d.poly = f;
  a.add_term(0, std::move(d));
  return a;
}

// Finitely supported diagonal a(K); Plus space only.
inline AlgebraElement element_diag_seq(const std::map<std::int64_t, cplx>& seq) {
  AlgebraElement a(Space::Plus);
  DiagSymbol d;
  d.seq = seq;
  a.add_term(0, std::move(d));
  return a;
}

// Matrix unit E_{k_to} <E_{k_from}, .> = U^{k_to} P_0 (U*)^{k_from}.
inline AlgebraElement element_unit(int k_from, int k_to) {
  AlgebraElement a(Space::Plus);
  DiagSymbol d;
  int n = k_to - k_from;
  d.add_seq(std::min(k_from, k_to), 1.0);
  a.add_term(n, std::move(d));
  return a;
}

// --- multiplication ---------------------------------------------------------

namespace detail {

// Product of two Plus-space normal-form terms; lands at band n + m.
inline void mul_plus_terms(const GroupSpec& g, int n, const DiagSymbol& D, int m,
                           const DiagSymbol& E, AlgebraElement& out) {
  int band = n + m;
  if (n >= 0 && m >= 0) {
    out.add_term(band, diag_mul(g, diag_translate(g, D, m), E));
  } else if (n >= 0 && m < 0) {
    int q = -m;
    DiagSymbol F = diag_mul(g, D, E);
    if (n >= q)
      out.add_term(band, diag_conjugate_up(g, F, q));
    else
      out.add_term(band, diag_conjugate_up(g, F, n));
  } else if (n < 0 && m >= 0) {
    int p = -n;
    if (m >= p)
      out.add_term(band, diag_mul(g, diag_translate(g, D, m - p), E));
    else
      out.add_term(band, diag_mul(g, D, diag_translate(g, E, p - m)));
  } else {
    int p = -n;
    out.add_term(band, diag_mul(g, D, diag_translate(g, E, p)));
  }
}

}  // namespace detail

inline AlgebraElement mul(const GroupSpec& g, const AlgebraElement& a, const AlgebraElement& b) {
  if (a.space != b.space) fail_input("BadElement", "space mismatch");
  AlgebraElement out(a.space);
  if (a.space == Space::Plus) {
    for (const auto& [n, D] : a.terms)
      for (const auto& [m, E] : b.terms) detail::mul_plus_terms(g, n, D, m, E, out);
    return out;
  }
  // Full space: convert the mixed convention to V-first, multiply, convert back.
  for (const auto& [n, D] : a.terms) {
    TrigPoly h = n >= 0 ? D.poly : compose_phi(g, D.poly, n);
    for (const auto& [m, E] : b.terms) {
      TrigPoly k = m >= 0 ? E.poly : compose_phi(g, E.poly, m);
      int band = n + m;
      TrigPoly prod = compose_phi(g, h, m) * k;  // V^n M_h V^m M_k = V^{n+m} M_{h.phi^m k}
      DiagSymbol d;
      d.poly = band >= 0 ? prod : compose_phi(g, prod, -band);
      out.add_term(band, std::move(d));
    }
  }
  return out;
}

inline AlgebraElement adjoint(const AlgebraElement& a) {
  AlgebraElement out(a.space);
  for (const auto& [n, d] : a.terms) out.add_term(-n, d.conjugate());
  return out;
}

// --- realization ------------------------------------------------------------

// Compression-exact per term: the truncated matrix of each normal-form term
// coincides with the compression of the infinite operator.
inline TruncatedOperator realize(const GroupSpec& g, const AlgebraElement& a, int L) {
  TruncatedOperator out(a.space, L);
  if (a.space == Space::Plus) {
    for (const auto& [n, d] : a.terms) {
      if (n >= 0) {
        for (int k = 0; k + n <= L - 1; ++k) out.at(k + n, k) = d.value(g, k);
      } else {
        int p = -n;
        for (int k = 0; k + p <= L - 1; ++k) out.at(k, k + p) = d.value(g, k);
      }
    }
    return out;
  }
  for (const auto& [n, d] : a.terms) {
    for (int l = out.min_index(); l <= out.max_index(); ++l) {
      int r = l + n;
      if (!out.index_ok(r)) continue;
      out.at(r, l) = n >= 0 ? evaluate_at_orbit(g, d.poly, l) : evaluate_at_orbit(g, d.poly, r);
    }
  }
  return out;
}

// --- maps between the algebras ---------------------------------------------

// T on symbols: V^n M_f -> U^n M_f^+ and M_f V^n -> M_f^+ (U*)^{-n}.
inline AlgebraElement toeplitz_element(const AlgebraElement& b) {
  if (b.space != Space::Full) fail_input("BadElement", "toeplitz_element expects a Full-space element");
  AlgebraElement out(Space::Plus);
  for (const auto& [n, d] : b.terms) {
    DiagSymbol nd;
    nd.poly = d.poly;
    out.add_term(n, std::move(nd));
  }
  return out;
}

// Quotient by the compacts: sequence parts vanish, polynomial parts survive.
inline AlgebraElement quotient_element(const AlgebraElement& a) {
  if (a.space != Space::Plus) fail_input("BadElement", "quotient_element expects a Plus-space element");
  AlgebraElement out(Space::Full);
  for (const auto& [n, d] : a.terms) {
    DiagSymbol nd;
    nd.poly = d.poly;
    out.add_term(n, std::move(nd));
  }
  return out;
}

}  // namespace mga
