#pragma once

#include <vector>

#include "mga/operators.hpp"

namespace mga {

// Banded coefficient data a_n(k) for a = sum U^n a_n(K) + sum a_n(K)(U*)^{-n}
// (Plus space; bands n >= 0 are column-indexed, n < 0 row-indexed, both from
// k = 0).  On the Full space band n holds the diagonal of V^n a_n(L), indexed
// by column l with l = offset at position 0.
struct BandSymbol {
  Space space = Space::Plus;
  std::map<int, std::vector<cplx>> bands;  // n -> a_n(k), k = 0,1,...
  int full_offset = 0;                     // Full space: column index of entry 0

  void set_band(int n, std::vector<cplx> v) {
    while (!v.empty() && std::abs(v.back()) == 0.0) v.pop_back();
    if (!v.empty()) bands[n] = std::move(v);
  }

  cplx at(int n, std::int64_t k) const {
    auto it = bands.find(n);
    if (it == bands.end()) return {0.0, 0.0};
    if (k < 0 || k >= static_cast<std::int64_t>(it->second.size())) return {0.0, 0.0};
    return it->second[k];
  }
};

// Integral kernel of the band expansion: entry (row r, col c) is
// a_{r-c}(min{r,c}).
inline TruncatedOperator symbol_to_operator(const BandSymbol& s, int L) {
  TruncatedOperator out(s.space, L);
  if (s.space == Space::Plus) {
    for (const auto& [n, v] : s.bands) {
      if (std::abs(n) > L) fail_input("BadBand", "band index exceeds the truncation");
      if (n >= 0) {
        for (int k = 0; k + n <= L - 1; ++k) out.at(k + n, k) = s.at(n, k);
      } else {
        for (int k = 0; k - n <= L - 1; ++k) out.at(k, k - n) = s.at(n, k);
      }
    }
    return out;
  }
  for (const auto& [n, v] : s.bands) {
    if (std::abs(n) > 2 * L) fail_input("BadBand", "band index exceeds the truncation");
    for (std::size_t i = 0; i < v.size(); ++i) {
      int c = s.full_offset + static_cast<int>(i);
      int r = c + n;
      if (out.index_ok(c) && out.index_ok(r)) out.at(r, c) = v[i];
    }
  }
  return out;
}

inline BandSymbol operator_to_symbol(const TruncatedOperator& a, int maxband) {
  BandSymbol s;
  s.space = a.space;
  if (a.space == Space::Plus) {
    for (int n = -maxband; n <= maxband; ++n) {
      std::vector<cplx> v;
      if (n >= 0) {
        for (int k = 0; k + n <= a.L - 1; ++k) v.push_back(a.at(k + n, k));
      } else {
        for (int k = 0; k - n <= a.L - 1; ++k) v.push_back(a.at(k, k - n));
      }
      s.set_band(n, std::move(v));
    }
    return s;
  }
  s.full_offset = -a.L;
  for (int n = -maxband; n <= maxband; ++n) {
    std::vector<cplx> v;
    for (int c = -a.L; c <= a.L; ++c) {
      int r = c + n;
      v.push_back(a.index_ok(r) ? a.at(r, c) : cplx{0.0, 0.0});
    }
    s.set_band(n, std::move(v));
  }
  return s;
}

// The truncated double sum matching the entries kept by symbol_to_operator.
inline double hs_norm_sq_symbol(const BandSymbol& s, int L) {
  double out = 0.0;
  for (const auto& [n, v] : s.bands) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (s.space == Space::Plus) {
        if (static_cast<int>(i) + std::abs(n) > L - 1) break;
      } else {
        int c = s.full_offset + static_cast<int>(i);
        if (c < -L || c > L || c + n < -L || c + n > L) continue;
      }
      out += std::norm(v[i]);
    }
  }
  return out;
}

}  // namespace mga
