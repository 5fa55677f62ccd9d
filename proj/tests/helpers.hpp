#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "mga/sampling.hpp"

namespace mgatest {

using namespace mga;

// Z/2^inf with scale prefix (2, 4, ..., 2^len).
inline GroupSpec z2inf(int len = 8) {
  SupernaturalNumber N;
  N.set_exponent(2, SupernaturalNumber::kInfExp);
  std::vector<std::int64_t> terms;
  std::int64_t s = 1;
  for (int i = 0; i < len; ++i) terms.push_back(s *= 2);
  return make_odometer_group(N, Scale(terms));
}

// The 2.3.5... odometer used for mixed-prime coverage.
inline GroupSpec mixed_odometer() {
  SupernaturalNumber N;
  N.set_exponent(2, SupernaturalNumber::kInfExp);
  N.set_exponent(3, 1);
  N.set_exponent(5, 1);
  return make_odometer_group(N, Scale(std::vector<std::int64_t>{2, 6, 30, 60, 120}));
}

// T^1 with the golden rotation.
inline GroupSpec golden_torus() { return make_torus_group({0.61803398874989484820458683436563811772L}); }

inline double cdist(mga::cplx a, mga::cplx b) { return std::abs(a - b); }

inline std::vector<std::int64_t> residues(const GroupPoint& p) {
  return std::get<OdometerPoint>(p).residues;
}

}  // namespace mgatest
