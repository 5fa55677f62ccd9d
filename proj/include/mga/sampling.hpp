#pragma once

#include <random>

#include "mga/derivation.hpp"

namespace mga {

// Seeded generators for the randomized property suites.
struct Sampler {
  std::mt19937_64 rng;

  explicit Sampler(std::uint64_t seed) : rng(seed) {}

  double real(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  cplx coeff() { return {real(), real()}; }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  Character character(const GroupSpec& g, int max_freq = 3) {
    if (g.is_odometer()) {
      const auto& terms = g.scale.terms;
      std::int64_t M = terms[static_cast<std::size_t>(integer(0, static_cast<int>(terms.size()) - 1))];
      return make_odo_char(integer(0, static_cast<int>(M) - 1), M);
    }
    TorusChar c;
    c.m.resize(static_cast<std::size_t>(g.torus_dim()));
    for (auto& v : c.m) v = integer(-max_freq, max_freq);
    return c;
  }

  TrigPoly trig_poly(const GroupSpec& g, int max_terms = 5) {
    TrigPoly f;
    int n = integer(1, max_terms);
    for (int i = 0; i < n; ++i) f.add_term(character(g), coeff());
    return f;
  }

  TrigPoly mean_zero_poly(const GroupSpec& g, int max_terms = 4) {
    TrigPoly f = trig_poly(g, max_terms);
    f.add_term(trivial_character(g), -mean(g, f));
    return f;
  }

  // Normal-form element with small band and sequence support.
  AlgebraElement element(const GroupSpec& g, Space space, int max_band = 3, int max_seq = 4,
                         int max_chars = 2) {
    AlgebraElement a(space);
    int nbands = integer(1, 3);
    for (int i = 0; i < nbands; ++i) {
      int band = integer(-max_band, max_band);
      DiagSymbol d;
      if (space == Space::Plus && integer(0, 1) == 1) {
        int support = integer(1, max_seq);
        for (int k = 0; k < support; ++k)
          if (integer(0, 1) == 1) d.add_seq(k, coeff());
      }
      if (integer(0, 2) > 0) d.poly = trig_poly(g, max_chars);
      a.add_term(band, std::move(d));
    }
    return a;
  }

  DerivationSpec derivation(const GroupSpec& g, Space space, int max_band = 3) {
    DerivationSpec d;
    d.space = space;
    d.c0 = coeff();
    if (space == Space::Full && g.is_torus()) {
      d.partial_rates.assign(static_cast<std::size_t>(g.torus_dim()), cplx{0.0, 0.0});
      for (auto& r : d.partial_rates) r = coeff();
    }
    int nbands = integer(1, 3);
    for (int i = 0; i < nbands; ++i) {
      int n = integer(-max_band, max_band);
      InnerBand band;
      band.f = trig_poly(g, 2);
      if (space == Space::Plus) {
        int support = integer(0, 4);
        for (int k = 0; k < support; ++k) band.beta0.push_back(coeff());
      }
      while (!band.beta0.empty() && std::abs(band.beta0.back()) <= kPruneTol) band.beta0.pop_back();
      if (!band.is_zero()) {
        auto& tgt = d.inner[n];
        tgt.f += band.f;
        if (tgt.beta0.size() < band.beta0.size()) tgt.beta0.resize(band.beta0.size());
        for (std::size_t k = 0; k < band.beta0.size(); ++k) tgt.beta0[k] += band.beta0[k];
      }
    }
    return d;
  }

  // Finite-support B-derivation of the lifting test family: |n| <= max_band,
  // at most max_terms nonzero single-character coefficients.
  DerivationSpec lift_source(const GroupSpec& g, int max_band = 8, int max_terms = 4) {
    DerivationSpec d;
    d.space = Space::Full;
    int nterms = integer(1, max_terms);
    for (int i = 0; i < nterms; ++i) {
      int n = 0;
      while (n == 0) n = integer(-max_band, max_band);
      InnerBand band;
      band.f = TrigPoly::character(character(g), coeff());
      auto& tgt = d.inner[n];
      tgt.f += band.f;
    }
    for (auto it = d.inner.begin(); it != d.inner.end();)
      it = it->second.is_zero() ? d.inner.erase(it) : std::next(it);
    return d;
  }
};

}  // namespace mga
