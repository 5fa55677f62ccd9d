#pragma once

#include <vector>

#include "mga/element.hpp"

namespace mga {

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct GeneratorKey {
  enum class Tag { Shift, ShiftInv, MChar };  // Shift = U on A, V on B

  Tag tag = Tag::Shift;
  Character chi;  // only for MChar

  friend bool operator<(const GeneratorKey& a, const GeneratorKey& b) {
    if (a.tag != b.tag) return a.tag < b.tag;
    if (a.tag != Tag::MChar) return false;
    return a.chi < b.chi;
  }
};

inline GeneratorKey gen_shift() { return {GeneratorKey::Tag::Shift, {}}; }
inline GeneratorKey gen_shift_inv() { return {GeneratorKey::Tag::ShiftInv, {}}; }
inline GeneratorKey gen_mchar(const Character& chi) { return {GeneratorKey::Tag::MChar, chi}; }

// Homogeneous degree under the circle action.
inline int generator_degree(const GeneratorKey& k) {
  switch (k.tag) {
    case GeneratorKey::Tag::Shift: return 1;
    case GeneratorKey::Tag::ShiftInv: return -1;
    default: return 0;
  }
}

inline AlgebraElement generator_element(const GroupSpec& g, Space space, const GeneratorKey& k) {
  switch (k.tag) {
    case GeneratorKey::Tag::Shift: return element_shift(g, space, 1);
    case GeneratorKey::Tag::ShiftInv: return element_shift(g, space, -1);
    default: return element_mult(TrigPoly::character(k.chi), space);
  }
}

// ---------------------------------------------------------------------------
// DerivationSpec: the symbol form
// ---------------------------------------------------------------------------

struct InnerBand {
  TrigPoly f;                // trig-poly part of the band symbol
  std::vector<cplx> beta0;   // finitely supported sequence part (Plus only)

  bool is_zero() const { return f.is_zero() && beta0.empty(); }
};

// d = c0 [K, .]  +  delta_partial  +  [ sum_{n>=0} U^n beta_n(K)
//                                      + sum_{n<0} beta_n(K) (U*)^{-n} , . ]
// with beta_n(K) = beta_{n,0}(K) + M_{f_n}; on the Full space the commutator
// symbol is sum V^n M_{f_n} (n>=0) + M_{f_n} V^n (n<0) and sequence parts are
// absent.  partial_rates r_j give the phi-invariant derivation on C(T^d):
// M_chi_m -> 2 pi i (sum_j m_j r_j) M_chi_m.
struct DerivationSpec {
  Space space = Space::Plus;
  cplx c0{0.0, 0.0};
  std::vector<cplx> partial_rates;
  std::map<int, InnerBand> inner;

  int max_band() const {
    int m = 0;
    for (const auto& [n, b] : inner) m = std::max(m, std::abs(n));
    return m;
  }

  bool has_partial() const {
    for (const auto& r : partial_rates)
      if (std::abs(r) > kPruneTol) return true;
    return false;
  }

  void validate() const {
    if (space == Space::Full) {
      for (const auto& [n, b] : inner)
        if (!b.beta0.empty())
          fail_input("BadDerivation", "Full-space derivations carry no sequence parts");
    } else if (!partial_rates.empty()) {
      fail_input("BadDerivation", "partial table is only defined on the quotient algebra");
    }
  }
};

inline DerivationSpec spec_add(const DerivationSpec& a, const DerivationSpec& b) {
  if (a.space != b.space) fail_input("BadDerivation", "space mismatch");
  DerivationSpec out = a;
  out.c0 += b.c0;
  if (out.partial_rates.size() < b.partial_rates.size())
    out.partial_rates.resize(b.partial_rates.size(), cplx{0.0, 0.0});
  for (std::size_t j = 0; j < b.partial_rates.size(); ++j) out.partial_rates[j] += b.partial_rates[j];
  for (const auto& [n, band] : b.inner) {
    auto& tgt = out.inner[n];
    tgt.f += band.f;
    if (tgt.beta0.size() < band.beta0.size()) tgt.beta0.resize(band.beta0.size(), cplx{0.0, 0.0});
    for (std::size_t k = 0; k < band.beta0.size(); ++k) tgt.beta0[k] += band.beta0[k];
    if (tgt.is_zero()) out.inner.erase(n);
  }
  return out;
}

inline DerivationSpec spec_scale(DerivationSpec d, cplx s) {
  d.c0 *= s;
  for (auto& r : d.partial_rates) r *= s;
  for (auto& [n, band] : d.inner) {
    band.f *= s;
    for (auto& v : band.beta0) v *= s;
  }
  return d;
}

// The commutator generator U^n(beta_{n,0}(K)+M_{f_n}) resp. ...(U*)^{-n}.
inline AlgebraElement inner_generator_element(const DerivationSpec& d, int n) {
  auto it = d.inner.find(n);
  AlgebraElement out(d.space);
  if (it == d.inner.end()) return out;
  DiagSymbol sym;
  sym.poly = it->second.f;
  for (std::size_t k = 0; k < it->second.beta0.size(); ++k)
    sym.add_seq(static_cast<std::int64_t>(k), it->second.beta0[k]);
  out.add_term(n, std::move(sym));
  return out;
}

// ---------------------------------------------------------------------------
// Constructors for the named derivations
// ---------------------------------------------------------------------------

// d_K = [K, .] on A resp. delta_L = [L, .] on B.
inline DerivationSpec make_d_K(Space space) {
  DerivationSpec d;
  d.space = space;
  d.c0 = 1.0;
  return d;
}

// d_alpha(U) = U alpha(K), d_alpha(diagonals) = 0.  With finitely supported
// alpha this is the commutator with beta(K), beta(k) = sum_{j<k} alpha(j);
// subtracting the limiting constant (which is central) keeps the stored
// sequence finitely supported.
inline DerivationSpec make_d_alpha(const std::vector<cplx>& alpha) {
  cplx total{0.0, 0.0};
  for (const auto& v : alpha) total += v;
  DerivationSpec d;
  d.space = Space::Plus;
  InnerBand band;
  band.beta0.resize(alpha.size(), cplx{0.0, 0.0});
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    band.beta0[k] = acc - total;  // beta(k) - beta(inf)
    acc += alpha[k];
  }
  while (!band.beta0.empty() && std::abs(band.beta0.back()) <= kPruneTol) band.beta0.pop_back();
  if (!band.is_zero()) d.inner[0] = std::move(band);
  return d;
}

// The inner approximants x_N = beta^N(K) of Lemma-style truncation,
// normalized by the central constant so the symbol is finitely supported.
inline AlgebraElement d_alpha_approximant(const std::vector<cplx>& alpha, int N) {
  std::map<std::int64_t, cplx> seq;
  cplx total{0.0, 0.0};
  for (std::size_t j = 0; j < alpha.size() && j < static_cast<std::size_t>(N); ++j) total += alpha[j];
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < alpha.size() && k < static_cast<std::size_t>(N); ++k) {
    if (std::abs(acc - total) > kPruneTol) seq[static_cast<std::int64_t>(k)] = acc - total;
    acc += alpha[k];
  }
  return element_diag_seq(seq);
}

// d_f(U) = U M_f for mean-zero f: the commutator with M_g, g the cocycle
// solution, which is exact for trigonometric polynomials.
inline DerivationSpec make_d_f(const GroupSpec& g, const TrigPoly& f) {
  DerivationSpec d;
  d.space = Space::Plus;
  InnerBand band;
  band.f = cocycle_solve(g, f);
  if (!band.is_zero()) d.inner[0] = std::move(band);
  return d;
}

inline DerivationSpec make_delta_L() { return make_d_K(Space::Full); }

// delta_f(V) = V M_f on B, same cocycle mechanism.
inline DerivationSpec make_delta_f(const GroupSpec& g, const TrigPoly& f) {
  DerivationSpec d;
  d.space = Space::Full;
  InnerBand band;
  band.f = cocycle_solve(g, f);
  if (!band.is_zero()) d.inner[0] = std::move(band);
  return d;
}

// delta_partial with partial = coeff * d/dx in every torus coordinate:
// delta(V) = 0, delta(M_chi_m) = coeff 2 pi i <m> M_chi_m.
inline DerivationSpec make_delta_partial(const GroupSpec& g, cplx coeff) {
  if (!g.is_torus())
    fail_obstruction("NoInvariantDerivation",
                     "odometer groups admit no nontrivial phi-invariant derivation on C(G)");
  DerivationSpec d;
  d.space = Space::Full;
  d.partial_rates.assign(static_cast<std::size_t>(g.torus_dim()), coeff);
  return d;
}

// Single-band commutator derivation [U^n(beta(K)+M_f), .].
inline DerivationSpec make_inner(Space space, int n, std::vector<cplx> beta0, TrigPoly f) {
  DerivationSpec d;
  d.space = space;
  InnerBand band;
  band.f = std::move(f);
  band.beta0 = std::move(beta0);
  while (!band.beta0.empty() && std::abs(band.beta0.back()) <= kPruneTol) band.beta0.pop_back();
  if (!band.is_zero()) d.inner[n] = std::move(band);
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// Applying a DerivationSpec
// ---------------------------------------------------------------------------

// The coefficient of the partial derivation on a character.
inline cplx partial_rate_of(const GroupSpec& g, const DerivationSpec& d, const Character& chi) {
  if (!std::holds_alternative<TorusChar>(chi))
    fail_input("BadCharacter", "partial table applies to torus characters");
  const auto& m = std::get<TorusChar>(chi).m;
  cplx s{0.0, 0.0};
  for (std::size_t j = 0; j < m.size() && j < d.partial_rates.size(); ++j)
    s += static_cast<double>(m[j]) * d.partial_rates[j];
  return cplx{0.0, kTwoPi} * s;
}

// delta_partial applied termwise: each band polynomial f_n goes to its image
// under the invariant derivation of C(G); exact on symbols.
inline AlgebraElement apply_partial_symbolic(const GroupSpec& g, const DerivationSpec& d,
                                             const AlgebraElement& a) {
  AlgebraElement out(a.space);
  for (const auto& [n, sym] : a.terms) {
    DiagSymbol ns;
    for (const auto& [chi, c] : sym.poly.terms) ns.poly.add_term(chi, c * partial_rate_of(g, d, chi));
    out.add_term(n, std::move(ns));
  }
  return out;
}

inline TruncatedOperator apply(const GroupSpec& g, const DerivationSpec& d, const AlgebraElement& a,
                               int L) {
  if (d.space != a.space) fail_input("BadDerivation", "derivation and element live on different spaces");
  d.validate();
  TruncatedOperator aL = realize(g, a, L);
  TruncatedOperator out(a.space, L);
  if (std::abs(d.c0) > 0.0) out += d.c0 * commutator(make_label(a.space, L), aL);
  for (const auto& [n, band] : d.inner) {
    TruncatedOperator X = realize(g, inner_generator_element(d, n), L);
    out += commutator(X, aL);
  }
  if (d.has_partial()) {
    if (!g.is_torus()) fail_input("BadDerivation", "partial table on a non-torus group");
    out += realize(g, apply_partial_symbolic(g, d, a), L);
  }
  return out;
}

// ---------------------------------------------------------------------------
// GeneratorTable: the image form
// ---------------------------------------------------------------------------

// Images of generators as truncated matrices at a fixed L, extended to
// normal-form elements by the Leibniz rule.  Pure sequence diagonals are
// annihilated (the invariant-derivation rule) unless a table says otherwise.
struct GeneratorTable {
  Space space = Space::Plus;
  int L = 0;
  std::map<GeneratorKey, TruncatedOperator> images;
  bool missing_mchar_is_zero = false;

  const TruncatedOperator* find(const GeneratorKey& k) const {
    auto it = images.find(k);
    return it == images.end() ? nullptr : &it->second;
  }
};

inline GeneratorTable table_of_spec(const GroupSpec& g, const DerivationSpec& d,
                                    const std::vector<Character>& chars, int L) {
  GeneratorTable t;
  t.space = d.space;
  t.L = L;
  t.images.emplace(gen_shift(), apply(g, d, element_shift(g, d.space, 1), L));
  t.images.emplace(gen_shift_inv(), apply(g, d, element_shift(g, d.space, -1), L));
  for (const auto& chi : chars)
    t.images.emplace(gen_mchar(chi), apply(g, d, element_mult(TrigPoly::character(chi), d.space), L));
  return t;
}

// d(S*) = -S* d(S) S*, from d(S S*) = 0 resp. d(S* S) = 0.
inline TruncatedOperator derived_shift_inv_image(const GeneratorTable& t) {
  const TruncatedOperator* dS = t.find(gen_shift());
  if (!dS) fail_input("UncoveredGenerator", "table lacks the shift image");
  TruncatedOperator Sinv = make_shift(t.space, -1, t.L);
  TruncatedOperator out(t.space, t.L);
  out.mat.noalias() = -(Sinv.mat * dS->mat * Sinv.mat);
  return out;
}

// Max interior entry of image(S*) + S* d(S) S*; the consistency residual.
inline double table_consistency_residual(const GeneratorTable& t, int margin) {
  const TruncatedOperator* dSinv = t.find(gen_shift_inv());
  if (!dSinv) return 0.0;
  return max_abs_interior(*dSinv, derived_shift_inv_image(t), margin);
}

inline TruncatedOperator apply(const GroupSpec& g, const GeneratorTable& t, const AlgebraElement& a) {
  if (t.space != a.space) fail_input("BadDerivation", "table and element live on different spaces");
  int L = t.L;
  auto mchar_image = [&](const Character& chi) -> TruncatedOperator {
    if (const TruncatedOperator* img = t.find(gen_mchar(chi))) return *img;
    if (t.missing_mchar_is_zero) return make_zero(t.space, L);
    fail_input("UncoveredGenerator", "table lacks the image of a character generator");
  };
  auto diag_image = [&](const DiagSymbol& sym) -> TruncatedOperator {
    TruncatedOperator out(t.space, L);
    for (const auto& [chi, c] : sym.poly.terms) out += c * mchar_image(chi);
    return out;  // sequence part is annihilated
  };

  const TruncatedOperator* dS = t.find(gen_shift());
  TruncatedOperator dSinv =
      t.find(gen_shift_inv()) ? *t.find(gen_shift_inv()) : derived_shift_inv_image(t);

  TruncatedOperator out(t.space, L);
  for (const auto& [n, sym] : a.terms) {
    TruncatedOperator D(t.space, L);
    for (int k = t.space == Space::Plus ? 0 : -L; k <= (t.space == Space::Plus ? L - 1 : L); ++k)
      D.at(k, k) = sym.value(g, k);
    if (n >= 0) {
      // d(S^n D) = sum_i S^i d(S) S^{n-1-i} D + S^n d(D)
      if (n > 0 && !dS) fail_input("UncoveredGenerator", "table lacks the shift image");
      TruncatedOperator Sn = make_shift(t.space, n, L);
      for (int i = 0; i < n; ++i) {
        TruncatedOperator piece = make_shift(t.space, i, L) * (*dS) * make_shift(t.space, n - 1 - i, L);
        out += piece * D;
      }
      out += Sn * diag_image(sym);
    } else {
      // d(D S^n) = d(D) S^n + D sum_i S^{-i} d(S^{-1}) S^{n+1+i}   (n < 0)
      int p = -n;
      TruncatedOperator Sp = make_shift(t.space, n, L);
      out += diag_image(sym) * Sp;
      TruncatedOperator acc(t.space, L);
      for (int i = 0; i < p; ++i)
        acc += make_shift(t.space, -i, L) * dSinv * make_shift(t.space, -(p - 1 - i), L);
      out += D * acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fourier components and Cesaro means
// ---------------------------------------------------------------------------

// The n-th Fourier component on a generator set: for a generator of
// homogeneous degree m the component is the band n+m of the image.
inline GeneratorTable fourier_component(const GroupSpec& g, const DerivationSpec& d, int n,
                                        const std::vector<GeneratorKey>& gens, int L) {
  GeneratorTable t;
  t.space = d.space;
  t.L = L;
  for (const auto& key : gens) {
    TruncatedOperator img = apply(g, d, generator_element(g, d.space, key), L);
    t.images.emplace(key, band_extract(img, n + generator_degree(key)));
  }
  return t;
}

// The n-covariant piece of a DerivationSpec.
inline DerivationSpec component_spec(const DerivationSpec& d, int n) {
  DerivationSpec out;
  out.space = d.space;
  if (n == 0) {
    out.c0 = d.c0;
    out.partial_rates = d.partial_rates;
  }
  auto it = d.inner.find(n);
  if (it != d.inner.end()) out.inner[n] = it->second;
  return out;
}

// Cesaro mean of the partial band sums of d(a):
// (1/(M+1)) sum_{j=0..M} sum_{|n|<=j} d_n(a); the weight of the n-covariant
// piece is (M+1-|n|)/(M+1) for |n| <= M.
inline TruncatedOperator cesaro_sum(const GroupSpec& g, const DerivationSpec& d,
                                    const AlgebraElement& a, int M, int L) {
  TruncatedOperator out(d.space, L);
  DerivationSpec invariant = component_spec(d, 0);
  out += apply(g, invariant, a, L);  // weight 1
  for (const auto& [n, band] : d.inner) {
    if (n == 0 || std::abs(n) > M) continue;
    double w = static_cast<double>(M + 1 - std::abs(n)) / static_cast<double>(M + 1);
    out += cplx{w, 0.0} * apply(g, component_spec(d, n), a, L);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification of invariant derivations
// ---------------------------------------------------------------------------

struct ClassifyResult {
  cplx c0{0.0, 0.0};
  std::map<Character, cplx> partial;  // lambda with D(M_chi) = lambda M_chi
  std::vector<cplx> alpha0;           // decaying part of the shift-image diagonal
  TrigPoly f0;                        // fitted trig part (trivial character carries c0)
  DerivationSpec residual;            // D - c0 d_K - delta_partial
  double fit_residual = 0.0;
};

namespace detail {

struct ClassifyImages {
  Space space;
  int L;
  TruncatedOperator shift_img;
  std::map<Character, TruncatedOperator> mchar_imgs;
};

inline ClassifyResult classify_core(const GroupSpec& g, const ClassifyImages& im,
                                    const std::vector<Character>& dict, double invariance_tol,
                                    double fit_tol) {
  const int L = im.L;
  const int margin = 2;
  // Invariance: the shift image sits on band +1, character images on band 0.
  {
    TruncatedOperator off = im.shift_img - band_extract(im.shift_img, 1);
    if (hs_norm_interior(off, margin) > invariance_tol * (1.0 + hs_norm(im.shift_img)))
      fail_numerical("NotInvariant", "shift image has weight outside band 1");
    for (const auto& [chi, img] : im.mchar_imgs) {
      TruncatedOperator off0 = img - band_extract(img, 0);
      if (hs_norm_interior(off0, margin) > invariance_tol * (1.0 + hs_norm(img)))
        fail_numerical("NotInvariant", "character image has weight outside band 0");
    }
  }

  // Diagonal of S* D(S): alpha_0(k) + f_0(x_k).
  TruncatedOperator F = make_shift(im.space, -1, L) * im.shift_img;
  int kmin = im.space == Space::Plus ? 0 : -L + 1;
  int kmax = im.space == Space::Plus ? L - 2 : L - 1;
  std::vector<cplx> v;
  for (int k = kmin; k <= kmax; ++k) v.push_back(F.at(k, k));

  // Least squares over the dictionary on a tail window where the decaying
  // part has died out (Plus) or everywhere (Full: no decaying part).
  std::vector<Character> chars = dict;
  {
    Character triv = trivial_character(g);
    bool has = false;
    for (const auto& c : chars)
      if (!(c < triv) && !(triv < c)) has = true;
    if (!has) chars.insert(chars.begin(), triv);
  }
  int wlo = im.space == Space::Plus ? (2 * (kmax - kmin)) / 3 : 0;
  int whi = kmax - kmin;
  int rows = whi - wlo + 1;
  if (rows < static_cast<int>(chars.size()) * 4)
    fail_input("BadArgument", "truncation too small for the classification window");
  Eigen::MatrixXcd A(rows, static_cast<int>(chars.size()));
  Eigen::VectorXcd rhs(rows);
  for (int r = 0; r < rows; ++r) {
    int k = kmin + wlo + r;
    for (std::size_t c = 0; c < chars.size(); ++c)
      A(r, static_cast<int>(c)) = character_at_orbit(g, chars[c], k);
    rhs(r) = v[static_cast<std::size_t>(wlo + r)];
  }
  Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(rhs);
  double resid = (A * coef - rhs).lpNorm<Eigen::Infinity>();

  ClassifyResult out;
  out.f0 = TrigPoly();
  for (std::size_t c = 0; c < chars.size(); ++c) out.f0.add_term(chars[c], coef(static_cast<int>(c)));
  out.c0 = mean(g, out.f0);
  out.fit_residual = resid;

  double scale = 1.0;
  for (const auto& x : v) scale = std::max(scale, std::abs(x));
  if (resid > fit_tol * scale)
    fail_numerical("FitResidualTooLarge",
                   "diagonal fit leaves unexplained mass; enlarge the character dictionary");

  for (int k = kmin; k <= kmax; ++k)
    out.alpha0.push_back(v[static_cast<std::size_t>(k - kmin)] - evaluate_at_orbit(g, out.f0, k));

  // Action on the diagonal generators: D(M_chi) = lambda_chi M_chi.
  for (const auto& [chi, img] : im.mchar_imgs) {
    if (is_trivial(chi)) continue;
    cplx acc{0.0, 0.0};
    int cnt = 0;
    for (int k = kmin + wlo; k <= kmin + whi; ++k) {
      acc += img.at(k, k) * std::conj(character_at_orbit(g, chi, k));
      ++cnt;
    }
    cplx lambda = acc / static_cast<double>(cnt);
    TruncatedOperator model = make_mult(g, TrigPoly::character(chi, lambda), im.space, L);
    if (max_abs_interior(img, model, margin) > fit_tol)
      fail_numerical("FitResidualTooLarge", "character image is not proportional to the character");
    if (std::abs(lambda) > 1e-12) out.partial.emplace(chi, lambda);
  }
  return out;
}

}  // namespace detail

inline ClassifyResult classify_invariant(const GroupSpec& g, const DerivationSpec& d,
                                         const std::vector<Character>& dict, int L,
                                         double invariance_tol = 1e-10, double fit_tol = 1e-6) {
  detail::ClassifyImages im;
  im.space = d.space;
  im.L = L;
  im.shift_img = apply(g, d, element_shift(g, d.space, 1), L);
  for (const auto& chi : dict)
    if (!is_trivial(chi))
      im.mchar_imgs.emplace(chi, apply(g, d, element_mult(TrigPoly::character(chi), d.space), L));
  ClassifyResult out = detail::classify_core(g, im, dict, invariance_tol, fit_tol);
  out.residual = d;
  out.residual.c0 = 0.0;
  out.residual.partial_rates.clear();
  return out;
}

inline ClassifyResult classify_invariant(const GroupSpec& g, const GeneratorTable& t,
                                         const std::vector<Character>& dict,
                                         double invariance_tol = 1e-10, double fit_tol = 1e-6) {
  detail::ClassifyImages im;
  im.space = t.space;
  im.L = t.L;
  const TruncatedOperator* dS = t.find(gen_shift());
  if (!dS) fail_input("UncoveredGenerator", "table lacks the shift image");
  im.shift_img = *dS;
  for (const auto& chi : dict) {
    if (is_trivial(chi)) continue;
    if (const TruncatedOperator* img = t.find(gen_mchar(chi)))
      im.mchar_imgs.emplace(chi, *img);
    else if (t.missing_mchar_is_zero)
      im.mchar_imgs.emplace(chi, make_zero(t.space, t.L));
    else
      fail_input("UncoveredGenerator", "dictionary character not covered by the table");
  }
  ClassifyResult out = detail::classify_core(g, im, dict, invariance_tol, fit_tol);
  // Reconstruct the residual in commutator form from the fitted data.
  out.residual.space = t.space;
  TrigPoly ftilde = out.f0;
  ftilde.add_term(trivial_character(g), -out.c0);
  InnerBand band;
  band.f = cocycle_solve(g, ftilde);
  if (t.space == Space::Plus) {
    cplx total{0.0, 0.0};
    for (const auto& a : out.alpha0) total += a;
    cplx acc{0.0, 0.0};
    band.beta0.clear();
    for (const auto& a : out.alpha0) {
      band.beta0.push_back(acc - total);
      acc += a;
    }
    while (!band.beta0.empty() && std::abs(band.beta0.back()) <= 1e-12) band.beta0.pop_back();
  }
  if (!band.is_zero()) out.residual.inner[0] = std::move(band);
  return out;
}

// ---------------------------------------------------------------------------
// Covariant derivations: symbol recovery
// ---------------------------------------------------------------------------

// Read the band symbol beta of an n-covariant derivation (n != 0) from its
// shift images: d(U) determines the successive differences of beta and d(U*)
// pins the k = 0 value when n > 0.
inline std::vector<cplx> covariant_beta(const GroupSpec& g, const GeneratorTable& t, int n,
                                        double tol = 1e-10) {
  if (n == 0) fail_input("BadArgument", "covariant_beta needs n != 0");
  const TruncatedOperator* dU = t.find(gen_shift());
  if (!dU) fail_input("UncoveredGenerator", "table lacks the shift image");
  int L = t.L;
  {
    TruncatedOperator off = *dU - band_extract(*dU, n + 1);
    if (hs_norm_interior(off, std::abs(n) + 2) > tol * (1.0 + hs_norm(*dU)))
      fail_numerical("NotCovariant", "shift image has weight outside band n+1");
  }
  std::vector<cplx> alpha;
  if (n > 0) {
    const TruncatedOperator* dUs = t.find(gen_shift_inv());
    if (!dUs) fail_input("UncoveredGenerator", "table lacks the adjoint shift image");
    TruncatedOperator offs = *dUs - band_extract(*dUs, n - 1);
    if (hs_norm_interior(offs, std::abs(n) + 2) > tol * (1.0 + hs_norm(*dUs)))
      fail_numerical("NotCovariant", "adjoint shift image has weight outside band n-1");
    alpha.push_back(-dUs->at(n - 1, 0));
    for (int k = 0; k + n + 1 <= L - 1; ++k) alpha.push_back(dU->at(k + n + 1, k));
  } else {
    int p = -n;
    for (int k = 0; k + p - 1 <= L - 1; ++k) alpha.push_back(dU->at(k, k + p - 1));
  }
  std::vector<cplx> beta;
  cplx acc{0.0, 0.0};
  for (const auto& a : alpha) {
    acc += a;
    beta.push_back(acc);
  }
  // Trim the edge contamination of the truncated commutator.
  int drop = std::abs(n) + 2;
  if (static_cast<int>(beta.size()) > drop) beta.resize(beta.size() - static_cast<std::size_t>(drop));
  while (!beta.empty() && std::abs(beta.back()) <= tol) beta.pop_back();
  return beta;
}

// ---------------------------------------------------------------------------
// Quotient and compactness
// ---------------------------------------------------------------------------

// [d]: drop the compact data; c0 survives ([d_K] = delta_L), sequence parts
// vanish, band polynomials survive.
inline DerivationSpec quotient_derivation(const DerivationSpec& d) {
  if (d.space != Space::Plus) fail_input("BadDerivation", "quotient_derivation expects an A-derivation");
  DerivationSpec out;
  out.space = Space::Full;
  out.c0 = d.c0;
  for (const auto& [n, band] : d.inner) {
    if (band.f.is_zero()) continue;
    InnerBand nb;
    nb.f = band.f;
    out.inner[n] = std::move(nb);
  }
  return out;
}

struct CompactCheck {
  std::string label;
  int rank = 0;
  std::vector<std::pair<int, double>> tail_mass;  // corner size -> Frobenius mass outside
};

struct CompactReport {
  std::vector<CompactCheck> checks;
  double max_tail_at_32 = 0.0;
};

// d(P_0) and d(P_{k,l}) stay compact (finite rank at desk scale); report the
// numerical rank and the Frobenius mass outside leading corners.
inline CompactReport check_compact_preservation(const GroupSpec& g, const DerivationSpec& d, int L) {
  CompactReport rep;
  std::vector<std::pair<std::string, AlgebraElement>> probes;
  probes.emplace_back("P0", element_unit(0, 0));
  probes.emplace_back("P_{0,1}", element_unit(0, 1));
  probes.emplace_back("P_{2,1}", element_unit(2, 1));
  for (auto& [label, el] : probes) {
    TruncatedOperator img = apply(g, d, el, L);
    CompactCheck chk;
    chk.label = label;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(img.mat);
    double s0 = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-10 * std::max(1.0, s0)) ++chk.rank;
    for (int corner = 8; corner <= L; corner *= 2) {
      double mass = 0.0;
      for (int j = 0; j < L; ++j)
        for (int k = 0; k < L; ++k)
          if (j >= corner || k >= corner) mass += std::norm(img.at(j, k));
      chk.tail_mass.emplace_back(corner, std::sqrt(mass));
      if (corner == 32) rep.max_tail_at_32 = std::max(rep.max_tail_at_32, std::sqrt(mass));
    }
    rep.checks.push_back(std::move(chk));
  }
  return rep;
}

}  // namespace mga
