#pragma once

#include <algorithm>
#include <map>

#include "mga/group.hpp"

namespace mga {

// Finite linear combination of characters; the dense subalgebra of C(G).
// Characters are stored canonically and zero coefficients are pruned.
struct TrigPoly {
  std::map<Character, cplx> terms;

  TrigPoly() = default;

  static TrigPoly zero() { return {}; }

  static TrigPoly constant(const GroupSpec& g, cplx c) {
    TrigPoly f;
    f.add_term(trivial_character(g), c);
    return f;
  }

  static TrigPoly character(const Character& chi, cplx c = {1.0, 0.0}) {
    TrigPoly f;
    f.add_term(chi, c);
    return f;
  }

  bool is_zero() const { return terms.empty(); }

  void add_term(const Character& chi, cplx c) {
    auto it = terms.find(chi);
    if (it == terms.end()) {
      if (std::abs(c) > kPruneTol) terms.emplace(chi, c);
    } else {
      it->second += c;
      if (std::abs(it->second) <= kPruneTol) terms.erase(it);
    }
  }

  TrigPoly& operator+=(const TrigPoly& o) {
    for (const auto& [chi, c] : o.terms) add_term(chi, c);
    return *this;
  }
  TrigPoly& operator-=(const TrigPoly& o) {
    for (const auto& [chi, c] : o.terms) add_term(chi, -c);
    return *this;
  }
  TrigPoly& operator*=(cplx s) {
    if (std::abs(s) <= kPruneTol) {
      terms.clear();
      return *this;
    }
    for (auto& [chi, c] : terms) c *= s;
    return *this;
  }

  friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
  friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
  friend TrigPoly operator*(cplx s, TrigPoly a) { return a *= s; }

  // Pointwise product; character products are canonicalized.
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly out;
    for (const auto& [ca, va] : a.terms)
      for (const auto& [cb, vb] : b.terms) out.add_term(char_mul(ca, cb), va * vb);
    return out;
  }

  TrigPoly conjugate() const {
    TrigPoly out;
    for (const auto& [chi, c] : terms) out.add_term(char_inverse(chi), std::conj(c));
    return out;
  }

  bool same_terms(const TrigPoly& o, double tol = 0.0) const {
    if (tol == 0.0) {
      if (terms.size() != o.terms.size()) return false;
      for (const auto& [chi, c] : terms) {
        auto it = o.terms.find(chi);
        if (it == o.terms.end() || c != it->second) return false;
      }
      return true;
    }
    TrigPoly d = *this - o;
    for (const auto& [chi, c] : d.terms)
      if (std::abs(c) > tol) return false;
    return true;
  }
};

inline cplx evaluate(const GroupSpec& g, const TrigPoly& f, const GroupPoint& x) {
  cplx out{0.0, 0.0};
  for (const auto& [chi, c] : f.terms) out += c * character_eval(g, chi, x);
  return out;
}

// f(x_k) via exact orbit phases.
inline cplx evaluate_at_orbit(const GroupSpec& g, const TrigPoly& f, std::int64_t k) {
  cplx out{0.0, 0.0};
  for (const auto& [chi, c] : f.terms) out += c * character_at_orbit(g, chi, k);
  return out;
}

// Haar mean: the coefficient of the trivial character.
inline cplx mean(const GroupSpec& g, const TrigPoly& f) {
  auto it = f.terms.find(trivial_character(g));
  return it == f.terms.end() ? cplx{0.0, 0.0} : it->second;
}

// f . phi^n : each coefficient is multiplied by chi(x_n).
inline TrigPoly compose_phi(const GroupSpec& g, const TrigPoly& f, std::int64_t n) {
  TrigPoly out;
  for (const auto& [chi, c] : f.terms) out.add_term(chi, c * character_at_orbit(g, chi, n));
  return out;
}

// Solve f = g.phi - g for mean-zero f; coefficients divide by chi(x_1) - 1.
inline TrigPoly cocycle_solve(const GroupSpec& g, const TrigPoly& f) {
  if (std::abs(mean(g, f)) > 1e-14)
    fail_input("MeanNotZero", "cocycle equation needs a mean-zero right-hand side");
  TrigPoly out;
  for (const auto& [chi, c] : f.terms) {
    if (is_trivial(chi)) continue;  // coefficient is below the mean tolerance
    cplx denom = character_at_orbit(g, chi, 1) - cplx{1.0, 0.0};
    if (std::abs(denom) == 0.0)
      fail_input("DegenerateCharacter", "nontrivial character with chi(x_1) = 1; corrupted group data");
    out.add_term(chi, c / denom);
  }
  return out;
}

}  // namespace mga
