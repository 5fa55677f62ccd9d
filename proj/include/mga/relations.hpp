#pragma once

#include "mga/sampling.hpp"

namespace mga {

// Interior-masked checks of the defining operator relations and the Toeplitz
// identities on random trigonometric polynomials.  With the concrete
// operators U E_k = E_{k+1}, V E_l = E_{l+1}, M_f E_l = f(x_l) E_l and
// x_l = l x_1, conjugation by the shift implements the inverse translation:
// V^{-1} M_f V = M_{f.phi} and M_f U = U M_{f.phi}.  Every check records the
// mask it uses.
struct RelationCheck {
  std::string name;
  double max_err = 0.0;
  int margin = 0;
};

struct RelationReport {
  std::vector<RelationCheck> checks;
  double worst = 0.0;
  bool pass(double tol) const { return worst <= tol; }
};

inline RelationReport run_relation_suite(const GroupSpec& g, int L, int npolys,
                                         std::uint64_t seed) {
  Sampler smp(seed);
  RelationReport rep;
  auto record = [&](const std::string& name, double err, int margin) {
    for (auto& c : rep.checks)
      if (c.name == name) {
        c.max_err = std::max(c.max_err, err);
        rep.worst = std::max(rep.worst, err);
        return;
      }
    rep.checks.push_back({name, err, margin});
    rep.worst = std::max(rep.worst, err);
  };

  TruncatedOperator U = make_shift(Space::Plus, 1, L);
  TruncatedOperator Ustar = make_shift(Space::Plus, -1, L);
  TruncatedOperator V = make_shift(Space::Full, 1, L);
  TruncatedOperator Vinv = make_shift(Space::Full, -1, L);
  TruncatedOperator P0 = make_projection(0, 0, L);

  // [U*, U] = P0 away from the last index.
  record("[U*,U]=P0", max_abs_interior(commutator(Ustar, U), P0, 2), 2);
  // U U* = I - P0 holds on the whole truncation.
  record("UU*=I-P0", max_abs_interior(U * Ustar, make_identity(Space::Plus, L) - P0, 0), 0);
  record("T(I)=I",
         max_abs_interior(toeplitz_map(make_identity(Space::Full, L)), make_identity(Space::Plus, L), 0),
         0);

  for (int t = 0; t < npolys; ++t) {
    TrigPoly f = smp.trig_poly(g, 5);
    TrigPoly fphi = compose_phi(g, f, 1);
    TruncatedOperator Mf = make_mult(g, f, Space::Full, L);
    TruncatedOperator Mfphi = make_mult(g, fphi, Space::Full, L);
    TruncatedOperator MfP = make_mult(g, f, Space::Plus, L);
    TruncatedOperator MfphiP = make_mult(g, fphi, Space::Plus, L);

    // Shift conjugation implements the translation: V M_{f.phi} V^{-1} = M_f.
    record("VM_{f.phi}V^{-1}=M_f", max_abs_interior(V * Mfphi * Vinv, Mf, 3), 3);
    // Intertwining on the forward orbit: M_f U = U M_{f.phi}.
    record("M_fU=UM_{f.phi}", max_abs_interior(MfP * U, U * MfphiP, 2), 2);
    // M_f P_0 = P_0 M_f = f(x_0) P_0: exact at any truncation.
    cplx f0 = evaluate_at_orbit(g, f, 0);
    record("M_fP0=f(x0)P0", max_abs_interior(MfP * P0, f0 * P0, 0), 0);
    record("P0M_f=f(x0)P0", max_abs_interior(P0 * MfP, f0 * P0, 0), 0);

    // Toeplitz identities of the compression map on a random element.
    AlgebraElement b = smp.element(g, Space::Full, 3, 0, 2);
    TruncatedOperator bM = realize(g, b, L);
    int n = smp.integer(0, 3);
    int margin = b.max_band() + n + 1;
    TruncatedOperator Un = make_shift(Space::Plus, n, L);
    TruncatedOperator Usn = make_shift(Space::Plus, -n, L);
    record("T(bV^n)=T(b)U^n",
           max_abs_interior(toeplitz_map(bM * make_shift(Space::Full, n, L)), toeplitz_map(bM) * Un,
                            margin),
           margin);
    record("T(V^{-n}b)=(U*)^nT(b)",
           max_abs_interior(toeplitz_map(make_shift(Space::Full, -n, L) * bM), Usn * toeplitz_map(bM),
                            margin),
           margin);
    record("T(bM_f)=T(b)M_f",
           max_abs_interior(toeplitz_map(bM * Mf), toeplitz_map(bM) * MfP, b.max_band() + 1),
           b.max_band() + 1);
    record("T(M_fb)=M_fT(b)",
           max_abs_interior(toeplitz_map(Mf * bM), MfP * toeplitz_map(bM), b.max_band() + 1),
           b.max_band() + 1);
  }
  return rep;
}

}  // namespace mga
