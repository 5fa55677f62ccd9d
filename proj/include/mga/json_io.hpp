#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mga/lifting.hpp"

namespace mga {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Deterministic emission helpers.  Reports are written by hand with a fixed
// field order and %.12e floats so identical configs give identical bytes.
// ---------------------------------------------------------------------------

inline std::string jnum(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", x);
  return buf;
}

inline std::string jcplx(cplx z) { return "[" + jnum(z.real()) + "," + jnum(z.imag()) + "]"; }

inline std::string jstr(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  out += "\"";
  return out;
}

inline std::string jchar(const Character& chi) {
  if (std::holds_alternative<OdoChar>(chi)) {
    const auto& c = std::get<OdoChar>(chi);
    return "{\"M\":" + std::to_string(c.M) + ",\"j\":" + std::to_string(c.j) + "}";
  }
  const auto& c = std::get<TorusChar>(chi);
  std::string out = "{\"m\":[";
  for (std::size_t i = 0; i < c.m.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(c.m[i]);
  }
  return out + "]}";
}

inline std::string jtrigpoly(const TrigPoly& f) {
  std::string out = "[";
  bool first = true;
  for (const auto& [chi, c] : f.terms) {
    if (!first) out += ",";
    first = false;
    out += "{\"char\":" + jchar(chi) + ",\"re\":" + jnum(c.real()) + ",\"im\":" + jnum(c.imag()) + "}";
  }
  return out + "]";
}

inline std::string jderivation(const DerivationSpec& d) {
  std::string out = "{\"space\":" + jstr(d.space == Space::Plus ? "A" : "B");
  out += ",\"c0\":" + jcplx(d.c0);
  out += ",\"partial\":[";
  bool first = true;
  for (std::size_t j = 0; j < d.partial_rates.size(); ++j) {
    if (std::abs(d.partial_rates[j]) <= kPruneTol) continue;
    if (!first) out += ",";
    first = false;
    TorusChar ej;
    ej.m.assign(d.partial_rates.size(), 0);
    ej.m[j] = 1;
    cplx lambda = cplx{0.0, kTwoPi} * d.partial_rates[j];
    out += "{\"char\":" + jchar(Character{ej}) + ",\"coeff\":" + jcplx(lambda) + "}";
  }
  out += "],\"inner\":[";
  first = true;
  for (const auto& [n, band] : d.inner) {
    if (!first) out += ",";
    first = false;
    out += "{\"n\":" + std::to_string(n) + ",\"f\":" + jtrigpoly(band.f) + ",\"beta0\":[";
    for (std::size_t k = 0; k < band.beta0.size(); ++k) {
      if (k) out += ",";
      out += jcplx(band.beta0[k]);
    }
    out += "]}";
  }
  return out + "]}";
}

// ---------------------------------------------------------------------------
// Parsing (nlohmann) -- input specs only; reports are write-only.
// ---------------------------------------------------------------------------

inline GroupSpec parse_group(const json& j) {
  if (!j.is_object() || !j.contains("kind")) fail_input("BadGroupSpec", "group spec needs a kind");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "odometer") {
    SupernaturalNumber N;
    if (!j.contains("primes")) fail_input("BadGroupSpec", "odometer spec needs primes");
    for (const auto& pe : j.at("primes")) {
      if (!pe.is_array() || pe.size() != 2) fail_input("BadGroupSpec", "primes entries are [p, e]");
      auto p = pe.at(0).get<std::uint64_t>();
      if (factorize(p).size() != 1 || factorize(p).begin()->second != 1)
        fail_input("BadGroupSpec", std::to_string(p) + " is not prime");
      int e;
      if (pe.at(1).is_string()) {
        if (pe.at(1).get<std::string>() != "inf") fail_input("BadGroupSpec", "exponent must be int or \"inf\"");
        e = SupernaturalNumber::kInfExp;
      } else {
        e = pe.at(1).get<int>();
        if (e <= 0) fail_input("BadGroupSpec", "exponents must be positive");
      }
      N.set_exponent(p, e);
    }
    if (!j.contains("scale")) fail_input("BadGroupSpec", "odometer spec needs a scale");
    Scale s(j.at("scale").get<std::vector<std::int64_t>>());
    return make_odometer_group(std::move(N), std::move(s));
  }
  if (kind == "torus") {
    if (!j.contains("theta")) fail_input("BadGroupSpec", "torus spec needs theta");
    std::vector<long double> theta;
    for (const auto& t : j.at("theta")) {
      if (t.is_string())
        theta.push_back(strtold(t.get<std::string>().c_str(), nullptr));
      else
        theta.push_back(static_cast<long double>(t.get<double>()));
    }
    return make_torus_group(std::move(theta));
  }
  fail_input("BadGroupSpec", "unknown kind " + kind);
}

inline Character parse_character(const json& j, const GroupSpec& g) {
  if (!j.is_object()) fail_input("BadCharacter", "character must be an object");
  if (j.contains("M")) {
    if (!g.is_odometer()) fail_input("BadCharacter", "odometer character on a torus group");
    return make_odo_char(j.at("j").get<std::int64_t>(), j.at("M").get<std::int64_t>());
  }
  if (j.contains("m")) {
    if (!g.is_torus()) fail_input("BadCharacter", "torus character on an odometer group");
    TorusChar c;
    c.m = j.at("m").get<std::vector<std::int64_t>>();
    if (static_cast<int>(c.m.size()) != g.torus_dim())
      fail_input("BadCharacter", "frequency vector dimension mismatch");
    return c;
  }
  fail_input("BadCharacter", "character needs M/j or m");
}

inline cplx parse_cplx(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j.at(0).get<double>(), j.at(1).get<double>()};
  fail_input("BadNumber", "expected a number or [re, im]");
}

inline TrigPoly parse_trigpoly(const json& j, const GroupSpec& g) {
  if (!j.is_array()) fail_input("BadTrigPoly", "trig poly is a list of terms");
  TrigPoly f;
  for (const auto& t : j) {
    Character chi = parse_character(t.at("char"), g);
    double re = t.contains("re") ? t.at("re").get<double>() : 0.0;
    double im = t.contains("im") ? t.at("im").get<double>() : 0.0;
    f.add_term(chi, {re, im});
  }
  return f;
}

inline DerivationSpec parse_derivation(const json& j, const GroupSpec& g) {
  DerivationSpec d;
  if (j.contains("space")) {
    std::string s = j.at("space").get<std::string>();
    if (s == "A")
      d.space = Space::Plus;
    else if (s == "B")
      d.space = Space::Full;
    else
      fail_input("BadDerivation", "space must be \"A\" or \"B\"");
  } else if (j.contains("partial") && !j.at("partial").empty()) {
    d.space = Space::Full;  // a partial table only lives on the quotient
  }
  if (j.contains("c0")) d.c0 = parse_cplx(j.at("c0"));
  if (j.contains("partial") && !j.at("partial").empty()) {
    if (!g.is_torus()) fail_input("BadDerivation", "partial table on a non-torus group");
    d.space = Space::Full;
    d.partial_rates.assign(static_cast<std::size_t>(g.torus_dim()), cplx{0.0, 0.0});
    std::vector<json> deferred;
    for (const auto& e : j.at("partial")) {
      Character chi = parse_character(e.at("char"), g);
      cplx lambda = parse_cplx(e.at("coeff"));
      const auto& m = std::get<TorusChar>(chi).m;
      int nonzero = 0, pos = -1;
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] != 0) {
          ++nonzero;
          pos = static_cast<int>(i);
        }
      if (nonzero == 1 && m[static_cast<std::size_t>(pos)] == 1)
        d.partial_rates[static_cast<std::size_t>(pos)] = lambda / cplx{0.0, kTwoPi};
      else
        deferred.push_back(e);
    }
    for (const auto& e : deferred) {
      Character chi = parse_character(e.at("char"), g);
      cplx lambda = parse_cplx(e.at("coeff"));
      if (std::abs(lambda - partial_rate_of(g, d, chi)) > 1e-9)
        fail_input("BadDerivation", "partial table is not additive in the frequency");
    }
  }
  if (j.contains("inner")) {
    for (const auto& e : j.at("inner")) {
      int n = e.at("n").get<int>();
      InnerBand band;
      if (e.contains("f")) band.f = parse_trigpoly(e.at("f"), g);
      if (e.contains("beta0"))
        for (const auto& b : e.at("beta0")) band.beta0.push_back(parse_cplx(b));
      while (!band.beta0.empty() && std::abs(band.beta0.back()) <= kPruneTol) band.beta0.pop_back();
      if (!band.is_zero()) d.inner[n] = std::move(band);
    }
  }
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// Matrix dump: a one-line header {space, L} then row-major complex pairs.
// ---------------------------------------------------------------------------

inline void write_matrix(std::ostream& os, const TruncatedOperator& a) {
  os << "{\"space\":" << (a.space == Space::Plus ? "\"plus\"" : "\"full\"") << ",\"L\":" << a.L
     << "}\n";
  for (int r = 0; r < a.dim(); ++r) {
    for (int c = 0; c < a.dim(); ++c) {
      if (c) os << " ";
      os << jnum(a.mat(r, c).real()) << " " << jnum(a.mat(r, c).imag());
    }
    os << "\n";
  }
}

inline TruncatedOperator read_matrix(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) fail_input("BadMatrixFile", "missing header");
  json h = json::parse(header);
  Space space = h.at("space").get<std::string>() == "plus" ? Space::Plus : Space::Full;
  TruncatedOperator out(space, h.at("L").get<int>());
  for (int r = 0; r < out.dim(); ++r)
    for (int c = 0; c < out.dim(); ++c) {
      double re, im;
      if (!(is >> re >> im)) fail_input("BadMatrixFile", "truncated matrix data");
      out.mat(r, c) = cplx{re, im};
    }
  return out;
}

// ---------------------------------------------------------------------------
// DefectReport emission
// ---------------------------------------------------------------------------

inline std::string defect_report_json(const DefectReport& rep, bool obstructed = false) {
  std::string out = "{";
  out += "\"obstructed\":" + std::string(obstructed ? "true" : "false");
  out += ",\"II\":" + jnum(rep.II_closed);
  out += ",\"II_matrix_U\":" + jnum(rep.II_matrix_U_sq);
  out += ",\"II_closed_Ustar\":" + jnum(rep.II_closed_Ustar);
  out += ",\"II_matrix_Ustar\":" + jnum(rep.II_matrix_Ustar_sq);
  out += ",\"I\":[";
  for (std::size_t i = 0; i < rep.characters.size(); ++i) {
    const auto& cd = rep.characters[i];
    if (i) out += ",";
    out += "{\"char\":" + jchar(cd.chi) + ",\"closed\":" + jnum(cd.closed) +
           ",\"matrix\":" + jnum(cd.matrix_sq) +
           ",\"enclosing_scale_term\":" + std::to_string(cd.enclosing_scale_term) + "}";
  }
  out += "],\"cutoffs\":{";
  bool first = true;
  for (const auto& [m, C] : rep.cutoffs) {
    if (!first) out += ",";
    first = false;
    out += jstr(std::to_string(m)) + ":" + std::to_string(C);
  }
  out += "},\"tails\":{";
  first = true;
  for (const auto& [m, t] : rep.tails) {
    if (!first) out += ",";
    first = false;
    out += jstr(std::to_string(m)) + ":" + jnum(t);
  }
  out += "},\"finite_support\":true";
  out += ",\"L\":" + std::to_string(rep.L);
  out += ",\"mask_margin\":" + std::to_string(rep.mask_margin);
  out += ",\"support_leak\":" + jnum(rep.support_leak);
  out += ",\"tolerances\":{\"agreement\":" + jnum(rep.agreement_tol) + "}";
  out += ",\"agrees\":" + std::string(rep.agrees ? "true" : "false");
  out += "}";
  return out;
}

}  // namespace mga
