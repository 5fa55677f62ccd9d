#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "mga/supernatural.hpp"

namespace mga {

// ---------------------------------------------------------------------------
// Group points
// ---------------------------------------------------------------------------

// Inverse-limit coordinates (y_1,...,y_m) with y_{i+1} = y_i (mod s_i),
// relative to a stored scale prefix.
struct OdometerPoint {
  std::vector<std::int64_t> residues;

  bool operator==(const OdometerPoint& o) const { return residues == o.residues; }
};

// Coordinates of T^n in [0,1), kept in extended precision.
struct TorusPoint {
  std::vector<long double> coords;
};

using GroupPoint = std::variant<OdometerPoint, TorusPoint>;

inline long double mod1(long double x) {
  long double r = std::fmod(x, 1.0L);
  if (r < 0.0L) r += 1.0L;
  if (r >= 1.0L) r -= 1.0L;  // fmod can land exactly on 1 after the adjustment
  return r;
}

inline std::int64_t mod_pos(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// ---------------------------------------------------------------------------
// Characters
// ---------------------------------------------------------------------------

// Odometer character chi(x_k) = exp(2 pi i j k / M), stored gcd-reduced.
struct OdoChar {
  std::int64_t j = 0;
  std::int64_t M = 1;

  auto operator<=>(const OdoChar&) const = default;
};

// Torus character chi_m(x) = exp(2 pi i m.x).
struct TorusChar {
  std::vector<std::int64_t> m;

  auto operator<=>(const TorusChar&) const = default;
};

using Character = std::variant<OdoChar, TorusChar>;

inline bool operator<(const Character& a, const Character& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (std::holds_alternative<OdoChar>(a))
    return std::get<OdoChar>(a) < std::get<OdoChar>(b);
  return std::get<TorusChar>(a) < std::get<TorusChar>(b);
}

inline OdoChar make_odo_char(std::int64_t j, std::int64_t M) {
  if (M < 1) fail_input("BadCharacter", "character modulus must be positive");
  j = mod_pos(j, M);
  if (j == 0) return OdoChar{0, 1};
  std::int64_t g = std::gcd(j, M);
  return OdoChar{j / g, M / g};
}

inline bool is_trivial(const Character& chi) {
  if (std::holds_alternative<OdoChar>(chi)) {
    const auto& c = std::get<OdoChar>(chi);
    return c.j == 0;
  }
  const auto& c = std::get<TorusChar>(chi);
  return std::all_of(c.m.begin(), c.m.end(), [](std::int64_t v) { return v == 0; });
}

// Pointwise product of characters, canonicalized.
inline Character char_mul(const Character& a, const Character& b) {
  if (a.index() != b.index()) fail_input("BadCharacter", "mixing odometer and torus characters");
  if (std::holds_alternative<OdoChar>(a)) {
    const auto& ca = std::get<OdoChar>(a);
    const auto& cb = std::get<OdoChar>(b);
    std::int64_t M = std::lcm(ca.M, cb.M);
    std::int64_t j = mod_pos(ca.j * (M / ca.M) + cb.j * (M / cb.M), M);
    return make_odo_char(j, M);
  }
  const auto& ca = std::get<TorusChar>(a);
  const auto& cb = std::get<TorusChar>(b);
  if (ca.m.size() != cb.m.size()) fail_input("BadCharacter", "torus character dimension mismatch");
  TorusChar out;
  out.m.resize(ca.m.size());
  for (std::size_t i = 0; i < ca.m.size(); ++i) out.m[i] = ca.m[i] + cb.m[i];
  return out;
}

inline Character char_inverse(const Character& a) {
  if (std::holds_alternative<OdoChar>(a)) {
    const auto& c = std::get<OdoChar>(a);
    return make_odo_char(-c.j, c.M);
  }
  TorusChar out = std::get<TorusChar>(a);
  for (auto& v : out.m) v = -v;
  return out;
}

// ---------------------------------------------------------------------------
// GroupSpec
// ---------------------------------------------------------------------------

// A concrete monothetic group: either an odometer Z/NZ presented by a scale
// prefix, or a torus with rotation vector theta.  The generator x_1 is
// (1,1,...) for odometers and theta for tori.
struct GroupSpec {
  enum class Kind { Odometer, Torus };

  Kind kind = Kind::Odometer;

  // Odometer data.
  SupernaturalNumber N;
  Scale scale;

  // Torus data.
  std::vector<long double> theta;

  std::string warning;  // set when theta looks rational (heuristic)

  bool is_odometer() const { return kind == Kind::Odometer; }
  bool is_torus() const { return kind == Kind::Torus; }
  int torus_dim() const { return static_cast<int>(theta.size()); }
};

// Heuristic rationality screen over continued-fraction convergents p/q with
// q <= 1e6.  A bare |x - p/q| < 1e-12 cutoff would fire on every real
// (Dirichlet gives approximations of quality ~1/q^2 ~ 1e-12 at q ~ 1e6), so
// the hit must also be anomalously good for its denominator:
// |x - p/q| q^2 << 1, which singles out rational-looking inputs.
inline std::optional<std::pair<std::int64_t, std::int64_t>> near_rational(long double x) {
  long double v = x;
  std::int64_t p0 = 1, q0 = 0, p1 = 0, q1 = 1;  // convergents of the CF expansion
  for (int it = 0; it < 64; ++it) {
    long double fl = std::floor(v);
    auto a = static_cast<std::int64_t>(fl);
    std::int64_t p2 = a * p0 + p1, q2 = a * q0 + q1;
    if (q2 > 1000000) break;
    if (q2 > 0) {
      long double err = std::fabs(x - static_cast<long double>(p2) / static_cast<long double>(q2));
      long double quality = err * static_cast<long double>(q2) * static_cast<long double>(q2);
      if (err < 1e-12L && quality < 1e-3L) return std::make_pair(p2, q2);
    }
    p1 = p0; q1 = q0; p0 = p2; q0 = q2;
    long double frac = v - fl;
    if (frac < 1e-18L) break;
    v = 1.0L / frac;
  }
  return std::nullopt;
}

inline GroupSpec make_odometer_group(SupernaturalNumber N, Scale scale) {
  scale.validate();
  for (std::int64_t s : scale.terms)
    if (!divides(static_cast<std::uint64_t>(s), N))
      fail_input("ScaleMismatch", "scale term " + std::to_string(s) +
                                      " does not divide the supernatural number " + N.to_string());
  GroupSpec g;
  g.kind = GroupSpec::Kind::Odometer;
  g.N = std::move(N);
  g.scale = std::move(scale);
  return g;
}

inline GroupSpec make_torus_group(std::vector<long double> theta) {
  if (theta.empty()) fail_input("BadGroup", "torus needs at least one rotation number");
  GroupSpec g;
  g.kind = GroupSpec::Kind::Torus;
  for (auto& t : theta) t = mod1(t);
  g.theta = std::move(theta);
  for (std::size_t i = 0; i < g.theta.size(); ++i) {
    if (auto pq = near_rational(g.theta[i])) {
      g.warning = "theta[" + std::to_string(i) + "] is within 1e-12 of " +
                  std::to_string(pq->first) + "/" + std::to_string(pq->second) +
                  "; orbit may not be dense";
      break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Point operations
// ---------------------------------------------------------------------------

// The isomorphism G(b) -> G_s on digit vectors:
// (k_1,k_2,...) -> (k_1, k_1+k_2 b_1, k_1+k_2 b_1+k_3 b_1 b_2, ...).
inline OdometerPoint multibase_point_to_scale_point(const std::vector<std::int64_t>& k,
                                                    const std::vector<std::int64_t>& b) {
  if (k.size() != b.size()) fail_input("BadMultibase", "digit/base length mismatch");
  OdometerPoint out;
  std::int64_t acc = 0, weight = 1;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (b[i] < 2) fail_input("BadMultibase", "multibase entries must be >= 2");
    if (k[i] < 0 || k[i] >= b[i])
      fail_input("BadMultibase", "digit out of range at position " + std::to_string(i + 1));
    acc += k[i] * weight;
    weight *= b[i];
    out.residues.push_back(acc);
  }
  return out;
}

inline void check_point_compatible(const GroupSpec& g, const GroupPoint& p) {
  if (g.is_odometer()) {
    if (!std::holds_alternative<OdometerPoint>(p))
      fail_input("BadPoint", "expected an odometer point");
    const auto& q = std::get<OdometerPoint>(p);
    if (q.residues.size() != g.scale.size())
      fail_input("BadPoint", "point prefix length does not match scale");
    for (std::size_t i = 0; i < q.residues.size(); ++i) {
      if (q.residues[i] < 0 || q.residues[i] >= g.scale.terms[i])
        fail_input("BadPoint", "residue out of range");
      if (i > 0 && mod_pos(q.residues[i], g.scale.terms[i - 1]) != q.residues[i - 1])
        fail_input("BadPoint", "inverse-limit compatibility violated");
    }
  } else {
    if (!std::holds_alternative<TorusPoint>(p)) fail_input("BadPoint", "expected a torus point");
    if (std::get<TorusPoint>(p).coords.size() != g.theta.size())
      fail_input("BadPoint", "torus dimension mismatch");
  }
}

inline GroupPoint group_add(const GroupSpec& g, const GroupPoint& p, const GroupPoint& q) {
  check_point_compatible(g, p);
  check_point_compatible(g, q);
  if (g.is_odometer()) {
    const auto& a = std::get<OdometerPoint>(p);
    const auto& b = std::get<OdometerPoint>(q);
    OdometerPoint out;
    for (std::size_t i = 0; i < a.residues.size(); ++i)
      out.residues.push_back(mod_pos(a.residues[i] + b.residues[i], g.scale.terms[i]));
    return out;
  }
  const auto& a = std::get<TorusPoint>(p);
  const auto& b = std::get<TorusPoint>(q);
  TorusPoint out;
  for (std::size_t i = 0; i < a.coords.size(); ++i) out.coords.push_back(mod1(a.coords[i] + b.coords[i]));
  return out;
}

inline GroupPoint group_neg(const GroupSpec& g, const GroupPoint& p) {
  check_point_compatible(g, p);
  if (g.is_odometer()) {
    const auto& a = std::get<OdometerPoint>(p);
    OdometerPoint out;
    for (std::size_t i = 0; i < a.residues.size(); ++i)
      out.residues.push_back(mod_pos(-a.residues[i], g.scale.terms[i]));
    return out;
  }
  const auto& a = std::get<TorusPoint>(p);
  TorusPoint out;
  for (long double c : a.coords) out.coords.push_back(mod1(-c));
  return out;
}

// x_k = k * x_1.  k may be negative.
inline GroupPoint orbit_point(const GroupSpec& g, std::int64_t k) {
  if (g.is_odometer()) {
    OdometerPoint out;
    for (std::int64_t s : g.scale.terms) out.residues.push_back(mod_pos(k, s));
    return out;
  }
  TorusPoint out;
  for (long double t : g.theta) out.coords.push_back(mod1(static_cast<long double>(k) * t));
  return out;
}

// ---------------------------------------------------------------------------
// Character evaluation
// ---------------------------------------------------------------------------

// For odometer points the phase is computed in exact integer arithmetic
// j * (x mod M) mod M, then evaluated once.
inline cplx character_eval(const GroupSpec& g, const Character& chi, const GroupPoint& x) {
  check_point_compatible(g, x);
  if (g.is_odometer()) {
    if (!std::holds_alternative<OdoChar>(chi)) fail_input("BadCharacter", "expected odometer character");
    const auto& c = std::get<OdoChar>(chi);
    if (c.j == 0) return {1.0, 0.0};
    const auto& p = std::get<OdometerPoint>(x);
    for (std::size_t i = 0; i < g.scale.size(); ++i) {
      if (g.scale.terms[i] % c.M == 0) {
        std::int64_t r = mod_pos(p.residues[i], c.M);
        return unit_phase(mod_pos(c.j * r, c.M), c.M);
      }
    }
    fail_input("UnresolvedCharacter",
               "modulus " + std::to_string(c.M) + " not resolvable from the stored scale prefix");
  }
  if (!std::holds_alternative<TorusChar>(chi)) fail_input("BadCharacter", "expected torus character");
  const auto& c = std::get<TorusChar>(chi);
  const auto& p = std::get<TorusPoint>(x);
  if (c.m.size() != p.coords.size()) fail_input("BadCharacter", "torus character dimension mismatch");
  long double ph = 0.0L;
  for (std::size_t i = 0; i < c.m.size(); ++i)
    ph += static_cast<long double>(c.m[i]) * p.coords[i];
  return unit_phase_real(mod1(ph));
}

// chi(x_k) without materializing the point; exact rational phase for odometers.
inline cplx character_at_orbit(const GroupSpec& g, const Character& chi, std::int64_t k) {
  if (g.is_odometer()) {
    if (!std::holds_alternative<OdoChar>(chi)) fail_input("BadCharacter", "expected odometer character");
    const auto& c = std::get<OdoChar>(chi);
    if (c.j == 0) return {1.0, 0.0};
    if (!divides(static_cast<std::uint64_t>(c.M), g.N))
      fail_input("BadCharacter", "modulus does not divide N");
    return unit_phase(mod_pos(c.j * mod_pos(k, c.M), c.M), c.M);
  }
  if (!std::holds_alternative<TorusChar>(chi)) fail_input("BadCharacter", "expected torus character");
  const auto& c = std::get<TorusChar>(chi);
  if (static_cast<int>(c.m.size()) != g.torus_dim())
    fail_input("BadCharacter", "torus character dimension mismatch");
  long double ph = 0.0L;
  for (std::size_t i = 0; i < c.m.size(); ++i)
    ph += static_cast<long double>(c.m[i]) * g.theta[i];
  ph = mod1(ph);
  return unit_phase_real(mod1(static_cast<long double>(k) * ph));
}

inline Character trivial_character(const GroupSpec& g) {
  if (g.is_odometer()) return OdoChar{0, 1};
  TorusChar c;
  c.m.assign(g.torus_dim(), 0);
  return c;
}

// A character with chi(x_n) != 1.  For odometers: the smallest scale term
// s_i with s_i not dividing n, as (j=1, M=s_i); for tori the first coordinate
// character works since theta is irrational.
inline Character separating_character(const GroupSpec& g, std::int64_t n) {
  if (n == 0) fail_input("BadArgument", "separating character needs n != 0");
  if (g.is_odometer()) {
    for (std::int64_t s : g.scale.terms)
      if (n % s != 0) return make_odo_char(1, s);
    fail_input("PrefixExhausted",
               "every stored scale term divides n; extend the scale prefix");
  }
  TorusChar c;
  c.m.assign(g.torus_dim(), 0);
  c.m[0] = 1;
  return c;
}

}  // namespace mga
