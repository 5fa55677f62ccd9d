#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "mga/common.hpp"

namespace mga {

// Formal product over primes p^eps with eps in {0,1,...} or infinity.
// Only nonzero exponents are stored; kInfExp marks an infinite exponent.
struct SupernaturalNumber {
  static constexpr int kInfExp = -1;

  std::map<std::uint64_t, int> exponents;  // prime -> exponent (kInfExp = infinity)

  bool is_finite() const {
    for (const auto& [p, e] : exponents)
      if (e == kInfExp) return false;
    return true;
  }

  int exponent_of(std::uint64_t p) const {
    auto it = exponents.find(p);
    return it == exponents.end() ? 0 : it->second;
  }

  void set_exponent(std::uint64_t p, int e) {
    if (e == 0)
      exponents.erase(p);
    else
      exponents[p] = e;
  }

  // Raise exponent of p to at least e.
  void absorb(std::uint64_t p, int e) {
    int cur = exponent_of(p);
    if (cur == kInfExp) return;
    if (e == kInfExp || e > cur) set_exponent(p, e);
  }

  bool operator==(const SupernaturalNumber& o) const { return exponents == o.exponents; }

  std::string to_string() const {
    if (exponents.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (const auto& [p, e] : exponents) {
      if (!first) os << "*";
      first = false;
      os << p;
      if (e == kInfExp)
        os << "^inf";
      else if (e != 1)
        os << "^" << e;
    }
    return os.str();
  }
};

inline std::map<std::uint64_t, int> factorize(std::uint64_t n) {
  std::map<std::uint64_t, int> out;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    while (n % p == 0) {
      ++out[p];
      n /= p;
    }
  }
  if (n > 1) ++out[n];
  return out;
}

// Does the finite integer m divide the supernatural number N?
inline bool divides(std::uint64_t m, const SupernaturalNumber& N) {
  if (m == 0) return false;
  for (const auto& [p, e] : factorize(m)) {
    int eN = N.exponent_of(p);
    if (eN != SupernaturalNumber::kInfExp && e > eN) return false;
  }
  return true;
}

// A stored prefix s_1 < s_2 < ... < s_m of a scale, s_i | s_{i+1}.
struct Scale {
  std::vector<std::int64_t> terms;

  Scale() = default;
  explicit Scale(std::vector<std::int64_t> t) : terms(std::move(t)) { validate(); }

  void validate() const {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (terms[i] < 1) fail_input("BadScale", "scale terms must be positive");
      if (i > 0) {
        if (terms[i] % terms[i - 1] != 0)
          fail_input("BadScale", "s_m divides s_{m+1} violated at position " + std::to_string(i + 1));
        if (terms[i] <= terms[i - 1])
          fail_input("BadScale", "scale must be strictly increasing");
      }
    }
  }

  bool empty() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }
  std::int64_t last() const { return terms.back(); }
};

// The supernatural number lim s_m determined by the stored prefix:
// each prime exponent is the maximum seen among the terms.  Prefix-partial:
// a longer prefix can only raise exponents.
inline SupernaturalNumber scale_limit(const Scale& scale) {
  SupernaturalNumber N;
  for (std::int64_t s : scale.terms)
    for (const auto& [p, e] : factorize(static_cast<std::uint64_t>(s))) N.absorb(p, e);
  return N;
}

// s_1 = b_1, s_n = s_{n-1} * b_n.
inline Scale multibase_to_scale(const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> terms;
  std::int64_t acc = 1;
  for (std::int64_t bi : b) {
    if (bi < 2) fail_input("BadMultibase", "multibase entries must be >= 2");
    acc *= bi;
    terms.push_back(acc);
  }
  return Scale(std::move(terms));
}

}  // namespace mga
