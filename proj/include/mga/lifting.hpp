#pragma once

#include <random>

#include "mga/derivation.hpp"

namespace mga {

// ---------------------------------------------------------------------------
// Scale decomposition n = s_m n'
// ---------------------------------------------------------------------------

// Largest m >= 0 with s_m | n (convention s_0 = 1), requiring s_{m+1} not | n.
inline int scale_index(std::int64_t n, const Scale& scale) {
  if (n == 0) fail_input("BadArgument", "scale_index needs n != 0");
  int m = 0;
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (n % scale.terms[i] == 0)
      m = static_cast<int>(i) + 1;
    else
      return m;
  }
  fail_input("PrefixExhausted", "n is divisible by every stored scale term");
}

// The ramp sequence beta(k) = -fval (N-k)/N on 0 <= k < N.
inline std::vector<cplx> ramp_beta(int N, cplx fval) {
  if (N < 1) fail_input("BadArgument", "ramp length must be >= 1");
  std::vector<cplx> out;
  if (std::abs(fval) == 0.0) return out;
  out.reserve(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k)
    out.push_back(-fval * (static_cast<double>(N - k) / static_cast<double>(N)));
  return out;
}

// Per-index aggregates tail_m = sum over {n : scale_index(n) = m} of
// |f_n(x_{-1})|^2 for the finitely many nonzero coefficients of delta.
inline std::map<int, double> scale_tails(const GroupSpec& g, const DerivationSpec& delta,
                                         const Scale& scale) {
  std::map<int, double> tails;
  for (std::size_t m = 0; m < scale.size(); ++m) tails[static_cast<int>(m)] = 0.0;
  for (const auto& [n, band] : delta.inner) {
    if (n == 0 || band.f.is_zero()) continue;
    tails[scale_index(n, scale)] += std::norm(evaluate_at_orbit(g, band.f, -1));
  }
  return tails;
}

// Deterministic cutoff rule: C_m is the smallest power of two with
// tail_m / C_m <= target / 2^{m+1}; then II <= sum_m target/2^{m+1} <= target.
inline std::map<int, int> choose_cutoffs(const GroupSpec& g, const DerivationSpec& delta,
                                         const Scale& scale, double target) {
  if (target <= 0.0) fail_input("BadArgument", "target must be positive");
  std::map<int, int> cutoffs;
  for (const auto& [m, tail] : scale_tails(g, delta, scale)) {
    double budget = target / std::ldexp(1.0, m + 1);
    int C = 1;
    while (tail / static_cast<double>(C) > budget) C *= 2;
    cutoffs[m] = C;
  }
  return cutoffs;
}

// ---------------------------------------------------------------------------
// Lift plans and closed-form defect norms
// ---------------------------------------------------------------------------

struct LiftPlan {
  Scale scale;
  std::map<int, int> cutoffs;               // m -> C_m
  std::map<int, std::vector<cplx>> ramps;   // n -> beta_{n,0}
  DerivationSpec source;                    // the B-derivation delta
  double target_defect = 0.0;

  int max_cutoff() const {
    int c = 1;
    for (const auto& [m, C] : cutoffs) c = std::max(c, C);
    return c;
  }
};

// II = ||d(U) - T(delta(V))||_HS^2 from the stored ramps:
// per band, sum over k >= 1 of |beta(k)-beta(k-1)|^2, plus for bands n < 0 the
// boundary term |beta(0) + f_n(x_{-1})|^2.  With the ramp choice this
// collapses to sum |f_n(x_{-1})|^2 / N_n over nonzero coefficients.
inline double closed_defect_U(const GroupSpec& g, const LiftPlan& plan, bool adjoint_side = false) {
  double out = 0.0;
  for (const auto& [n, band] : plan.source.inner) {
    cplx fval = evaluate_at_orbit(g, band.f, -1);
    std::vector<cplx> beta;
    if (auto it = plan.ramps.find(n); it != plan.ramps.end()) beta = it->second;
    auto beta_at = [&](std::int64_t k) -> cplx {
      return (k >= 0 && k < static_cast<std::int64_t>(beta.size())) ? beta[static_cast<std::size_t>(k)]
                                                                    : cplx{0.0, 0.0};
    };
    std::int64_t S = static_cast<std::int64_t>(beta.size());
    for (std::int64_t k = 1; k <= S; ++k) out += std::norm(beta_at(k) - beta_at(k - 1));
    bool boundary = adjoint_side ? (n > 0) : (n < 0);
    if (boundary) out += std::norm(beta_at(0) + fval);
  }
  return out;
}

inline double defect_II(const GroupSpec& g, const LiftPlan& plan) { return closed_defect_U(g, plan); }

// I(chi) = sum_n sum_k |beta_{n,0}(k)|^2 |chi(x_k) - chi(x_{k+n})|^2; for
// odometer characters the difference is k-independent: |1 - chi(x_n)|.
inline double defect_I(const GroupSpec& g, const LiftPlan& plan, const Character& chi) {
  double out = 0.0;
  for (const auto& [n, beta] : plan.ramps) {
    if (n == 0) continue;
    double factor = std::norm(cplx{1.0, 0.0} - character_at_orbit(g, chi, n));
    double ramp_sq = 0.0;
    for (const auto& v : beta) ramp_sq += std::norm(v);
    out += ramp_sq * factor;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Building the lift
// ---------------------------------------------------------------------------

struct Lift {
  LiftPlan plan;
  DerivationSpec d;  // the A-derivation
};

// Theorem-style construction: same c0, band polynomials carried over, ramp
// sequences sized by the scale decomposition.  The n = 0 band lifts exactly
// with no ramp.
inline Lift build_lift(const GroupSpec& g, const DerivationSpec& delta, const Scale& scale,
                       double target) {
  if (delta.space != Space::Full)
    fail_input("BadDerivation", "build_lift expects a derivation on the quotient algebra");
  if (delta.has_partial())
    fail_obstruction("Obstructed",
                     "a nonzero partial table cannot be lifted: the Toeplitz relation "
                     "M_f P_0 = f(x_0) P_0 forces every lift of a diagonal action to vanish");
  if (!g.is_odometer())
    fail_obstruction("UnsupportedGroup",
                     "lifting is implemented for odometer groups only; the torus case is open");
  Lift out;
  out.plan.scale = scale;
  out.plan.source = delta;
  out.plan.target_defect = target;
  out.plan.cutoffs = choose_cutoffs(g, delta, scale, target);
  out.d.space = Space::Plus;
  out.d.c0 = delta.c0;
  for (const auto& [n, band] : delta.inner) {
    if (band.f.is_zero()) continue;
    InnerBand nb;
    nb.f = band.f;
    if (n != 0) {
      int m = scale_index(n, scale);
      int N = out.plan.cutoffs.at(m);
      nb.beta0 = ramp_beta(N, evaluate_at_orbit(g, band.f, -1));
      out.plan.ramps[n] = nb.beta0;
    }
    out.d.inner[n] = std::move(nb);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification: matrix defects vs closed forms
// ---------------------------------------------------------------------------

struct CharDefect {
  Character chi;
  double closed = 0.0;
  double matrix_sq = 0.0;
  std::int64_t enclosing_scale_term = 0;  // smallest s_q with M | s_q
};

struct DefectReport {
  int L = 0;
  int mask_margin = 0;
  std::map<int, int> cutoffs;
  double II_closed = 0.0;
  double II_matrix_U_sq = 0.0;       // ||d(U) - T(delta(V))||_HS^2 on the masked range
  double II_matrix_Ustar_sq = 0.0;   // same for U*
  double II_closed_Ustar = 0.0;      // boundary terms sit on the other side
  std::vector<CharDefect> characters;
  double support_leak = 0.0;         // largest entry outside the predicted supports
  bool finite_support = true;        // Eq.-(4.1)-style condition is automatic here
  std::map<int, double> tails;       // tail_m aggregates
  double agreement_tol = 1e-9;
  bool agrees = false;
};

// d(U) - T(delta(V)) etc. as truncated matrices, compared entry-honestly with
// the closed forms on a shared interior range.
inline DefectReport verify_lift(const GroupSpec& g, const Lift& lift,
                                const std::vector<Character>& chars, int L,
                                double agreement_tol = 1e-9) {
  const DerivationSpec& d = lift.d;
  const DerivationSpec& delta = lift.plan.source;
  int maxband = std::max(d.max_band(), delta.max_band());
  int margin = maxband + 2;
  int maxcut = lift.plan.max_cutoff();
  if (L <= 2 * maxcut)
    fail_input("TruncationTooSmall", "need L > 2 * max cutoff = " + std::to_string(2 * maxcut) +
                                         "; rerun with a larger --L");
  int needed = maxcut + 2 * margin + 2;
  if (L < needed)
    fail_input("TruncationTooSmall",
               "need L >= " + std::to_string(needed) + " to separate supports from the boundary");

  DefectReport rep;
  rep.L = L;
  rep.mask_margin = margin;
  rep.cutoffs = lift.plan.cutoffs;
  rep.tails = scale_tails(g, delta, lift.plan.scale);
  rep.agreement_tol = agreement_tol;

  auto defect_matrix = [&](const AlgebraElement& a_plus, const AlgebraElement& b_full) {
    TruncatedOperator da = apply(g, d, a_plus, L);
    TruncatedOperator tb = toeplitz_map(apply(g, delta, b_full, L));
    return masked(da - tb, margin);
  };

  // Closed forms are read off the ramps actually present in d, so a plan with
  // hand-modified betas (e.g. the naive zero-ramp lift) stays consistent.
  LiftPlan actual = lift.plan;
  actual.ramps.clear();
  for (const auto& [n, band] : d.inner)
    if (!band.beta0.empty()) actual.ramps[n] = band.beta0;

  TruncatedOperator defU =
      defect_matrix(element_shift(g, Space::Plus, 1), element_shift(g, Space::Full, 1));
  TruncatedOperator defUstar =
      defect_matrix(element_shift(g, Space::Plus, -1), element_shift(g, Space::Full, -1));
  rep.II_matrix_U_sq = hs_norm(defU) * hs_norm(defU);
  rep.II_matrix_Ustar_sq = hs_norm(defUstar) * hs_norm(defUstar);
  rep.II_closed = closed_defect_U(g, actual, false);
  rep.II_closed_Ustar = closed_defect_U(g, actual, true);

  // Entries of the U-defect live on bands n+1 (n >= 0) / -(|n|-1) with
  // k-support inside the ramp ranges; everything else should vanish.
  {
    double leak = 0.0;
    int K = maxcut + 1;  // ramp support plus the step at k = N
    for (int j = 0; j < L; ++j)
      for (int k = 0; k < L; ++k) {
        if (std::min(j, k) <= K) continue;
        leak = std::max({leak, std::abs(defU.at(j, k)), std::abs(defUstar.at(j, k))});
      }
    rep.support_leak = leak;
  }

  bool ok = std::abs(rep.II_matrix_U_sq - rep.II_closed) <= agreement_tol &&
            std::abs(rep.II_matrix_Ustar_sq - rep.II_closed_Ustar) <= agreement_tol;

  for (const auto& chi : chars) {
    CharDefect cd;
    cd.chi = chi;
    if (g.is_odometer() && std::holds_alternative<OdoChar>(chi)) {
      std::int64_t M = std::get<OdoChar>(chi).M;
      for (std::int64_t s : lift.plan.scale.terms)
        if (s % M == 0) {
          cd.enclosing_scale_term = s;
          break;
        }
    }
    AlgebraElement ma = element_mult(TrigPoly::character(chi), Space::Plus);
    AlgebraElement mb = element_mult(TrigPoly::character(chi), Space::Full);
    TruncatedOperator defM = defect_matrix(ma, mb);
    cd.matrix_sq = hs_norm(defM) * hs_norm(defM);
    cd.closed = defect_I(g, actual, chi);
    ok = ok && std::abs(cd.matrix_sq - cd.closed) <= agreement_tol;
    rep.characters.push_back(std::move(cd));
  }
  rep.agrees = ok;
  return rep;
}

// ---------------------------------------------------------------------------
// The torus obstruction, at the level the artifact can test
// ---------------------------------------------------------------------------

struct ObstructionReport {
  cplx c0{0.0, 0.0};
  cplx partial_chi1{0.0, 0.0};
  double max_inner_action_on_diagonals = 0.0;  // over sampled invariant symbols
  bool obstructed = false;
};

// classify delta_{c d/dx}: c0 = 0 and partial(chi_1) = 2 pi i c != 0, while
// every inner invariant A-derivation annihilates the diagonal generators.
inline ObstructionReport torus_obstruction_demo(const GroupSpec& g, cplx coeff, int L,
                                                std::uint64_t seed = 12345) {
  if (!g.is_torus()) fail_input("BadGroup", "the obstruction demo runs on torus groups");
  DerivationSpec delta = make_delta_partial(g, coeff);
  TorusChar chi1;
  chi1.m.assign(static_cast<std::size_t>(g.torus_dim()), 0);
  chi1.m[0] = 1;
  std::vector<Character> dict{trivial_character(g), chi1};
  ClassifyResult cls = classify_invariant(g, delta, dict, L);

  ObstructionReport rep;
  rep.c0 = cls.c0;
  auto it = cls.partial.find(Character{chi1});
  rep.partial_chi1 = it == cls.partial.end() ? cplx{0.0, 0.0} : it->second;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  TruncatedOperator mchi = make_mult(g, TrigPoly::character(chi1), Space::Plus, L);
  for (int trial = 0; trial < 20; ++trial) {
    TruncatedOperator sym(Space::Plus, L);
    for (int k = 0; k < L; ++k) sym.at(k, k) = cplx{unif(rng), unif(rng)};
    rep.max_inner_action_on_diagonals =
        std::max(rep.max_inner_action_on_diagonals, hs_norm(commutator(sym, mchi)));
  }
  rep.obstructed = std::abs(rep.partial_chi1) > 1e-12;
  return rep;
}

}  // namespace mga
