// Batch front end: parse group/derivation JSON specs, run constructions and
// verifications, emit machine-readable reports.
//
// Exit codes: 0 success, 1 mathematical obstruction or failed verification,
// 2 input error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mga/json_io.hpp"
#include "mga/relations.hpp"

namespace {

using namespace mga;

struct RunConfig {
  std::string group_path;
  std::string derivation_path;
  int L = 256;
  double target = 0.25;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 1;
};

void check_config(const RunConfig& cfg) {
  if (cfg.L < 8) fail_input("BadConfig", "L must be >= 8");
  if (cfg.target <= 0.0) fail_input("BadConfig", "target must be positive");
  if (cfg.format != "json" && cfg.format != "csv")
    fail_input("BadConfig", "format must be json or csv");
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_input("BadFile", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail_input("BadJson", std::string("parse error in ") + path + ": " + e.what());
  }
  return j;
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(cfg.out_path);
  if (!out) fail_input("BadFile", "cannot write " + cfg.out_path);
  out << text << "\n";
}

std::string csv_escape(const std::string& s) { return s; }

// key,value rows for the scalar reports.
std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out = "key,value\n";
  for (const auto& [k, v] : rows) out += csv_escape(k) + "," + v + "\n";
  out.pop_back();
  return out;
}

std::string group_kind(const GroupSpec& g) { return g.is_odometer() ? "odometer" : "torus"; }

// --- group-info -------------------------------------------------------------

int cmd_group_info(const RunConfig& cfg) {
  GroupSpec g = parse_group(load_json(cfg.group_path));
  constexpr int kOrbitRows = 8;
  if (cfg.format == "csv") {
    std::string out = "k";
    if (g.is_odometer()) {
      for (std::size_t i = 0; i < g.scale.size(); ++i) out += ",y" + std::to_string(i + 1);
    } else {
      for (int i = 0; i < g.torus_dim(); ++i) out += ",x" + std::to_string(i + 1);
    }
    out += "\n";
    for (int k = 0; k < kOrbitRows; ++k) {
      out += std::to_string(k);
      GroupPoint p = orbit_point(g, k);
      if (g.is_odometer())
        for (auto r : std::get<OdometerPoint>(p).residues) out += "," + std::to_string(r);
      else
        for (auto c : std::get<TorusPoint>(p).coords) out += "," + jnum(static_cast<double>(c));
      out += "\n";
    }
    out.pop_back();
    emit(cfg, out);
    return 0;
  }
  std::string out = "{\"kind\":" + jstr(group_kind(g));
  if (g.is_odometer()) {
    out += ",\"N\":" + jstr(g.N.to_string()) + ",\"scale\":[";
    for (std::size_t i = 0; i < g.scale.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(g.scale.terms[i]);
    }
    out += "]";
  } else {
    out += ",\"theta\":[";
    for (int i = 0; i < g.torus_dim(); ++i) {
      if (i) out += ",";
      out += jnum(static_cast<double>(g.theta[static_cast<std::size_t>(i)]));
    }
    out += "]";
  }
  if (!g.warning.empty()) out += ",\"warning\":" + jstr(g.warning);
  out += ",\"orbit\":[";
  for (int k = 0; k < kOrbitRows; ++k) {
    if (k) out += ",";
    GroupPoint p = orbit_point(g, k);
    out += "{\"k\":" + std::to_string(k) + ",";
    if (g.is_odometer()) {
      out += "\"residues\":[";
      const auto& r = std::get<OdometerPoint>(p).residues;
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(r[i]);
      }
      out += "]}";
    } else {
      out += "\"coords\":[";
      const auto& c = std::get<TorusPoint>(p).coords;
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) out += ",";
        out += jnum(static_cast<double>(c[i]));
      }
      out += "]}";
    }
  }
  out += "],\"characters\":[";
  std::vector<Character> chars;
  if (g.is_odometer())
    for (std::int64_t s : g.scale.terms) chars.push_back(make_odo_char(1, s));
  else
    for (int i = 0; i < g.torus_dim(); ++i) {
      TorusChar c;
      c.m.assign(static_cast<std::size_t>(g.torus_dim()), 0);
      c.m[static_cast<std::size_t>(i)] = 1;
      chars.push_back(c);
    }
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (i) out += ",";
    out += "{\"char\":" + jchar(chars[i]) + ",\"chi_x1\":" + jcplx(character_at_orbit(g, chars[i], 1)) +
           "}";
  }
  out += "]}";
  emit(cfg, out);
  return 0;
}

// --- fourier ------------------------------------------------------------------

std::vector<Character> derivation_characters(const GroupSpec& g, const DerivationSpec& d) {
  std::vector<Character> chars;
  auto push = [&](const Character& c) {
    if (is_trivial(c)) return;
    for (const auto& e : chars)
      if (!(e < c) && !(c < e)) return;
    chars.push_back(c);
  };
  for (const auto& [n, band] : d.inner)
    for (const auto& [chi, coeff] : band.f.terms) push(chi);
  push(separating_character(g, 1));
  return chars;
}

int cmd_fourier(const RunConfig& cfg) {
  GroupSpec g = parse_group(load_json(cfg.group_path));
  if (cfg.derivation_path.empty()) fail_input("BadConfig", "fourier needs --derivation");
  DerivationSpec d = parse_derivation(load_json(cfg.derivation_path), g);
  int L = cfg.L;
  int nmax = d.max_band() + 2;
  int margin = d.max_band() + 2;
  std::vector<Character> chars = derivation_characters(g, d);
  std::vector<GeneratorKey> gens{gen_shift(), gen_shift_inv()};
  for (const auto& c : chars) gens.push_back(gen_mchar(c));

  struct Row {
    int n;
    double norm = 0.0;
  };
  std::vector<Row> rows;
  for (int n = -nmax; n <= nmax; ++n) {
    GeneratorTable t = fourier_component(g, d, n, gens, L);
    double norm = 0.0;
    for (const auto& [key, img] : t.images) norm = std::max(norm, hs_norm_interior(img, margin));
    rows.push_back({n, norm});
  }

  std::vector<std::pair<int, double>> sweep;
  for (int M : {4, 8, 16, 32, 64}) {
    double err = 0.0;
    for (const auto& key : gens) {
      AlgebraElement a = generator_element(g, d.space, key);
      TruncatedOperator diff = cesaro_sum(g, d, a, M, L) - apply(g, d, a, L);
      int c0 = diff.min_index();
      for (int col = c0; col < c0 + 8 && col <= diff.max_index(); ++col) {
        double colnorm = 0.0;
        for (int r = diff.min_index(); r <= diff.max_index(); ++r)
          if (index_interior(diff, r, margin)) colnorm += std::norm(diff.at(r, col));
        err = std::max(err, std::sqrt(colnorm));
      }
    }
    sweep.emplace_back(M, err);
  }

  if (cfg.format == "csv") {
    std::string out = "section,index,value\n";
    for (const auto& r : rows) out += "component," + std::to_string(r.n) + "," + jnum(r.norm) + "\n";
    for (const auto& [M, err] : sweep) out += "cesaro," + std::to_string(M) + "," + jnum(err) + "\n";
    out.pop_back();
    emit(cfg, out);
    return 0;
  }
  std::string out = "{\"components\":[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ",";
    out += "{\"n\":" + std::to_string(rows[i].n) + ",\"norm\":" + jnum(rows[i].norm) + "}";
  }
  out += "],\"cesaro\":[";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (i) out += ",";
    out += "{\"M\":" + std::to_string(sweep[i].first) + ",\"err\":" + jnum(sweep[i].second) + "}";
  }
  out += "],\"L\":" + std::to_string(L) + "}";
  emit(cfg, out);
  return 0;
}

// --- classify -----------------------------------------------------------------

int cmd_classify(const RunConfig& cfg) {
  GroupSpec g = parse_group(load_json(cfg.group_path));
  if (cfg.derivation_path.empty()) fail_input("BadConfig", "classify needs --derivation");
  DerivationSpec d = parse_derivation(load_json(cfg.derivation_path), g);
  std::vector<Character> dict = derivation_characters(g, d);
  dict.insert(dict.begin(), trivial_character(g));
  ClassifyResult res = classify_invariant(g, d, dict, cfg.L);
  double alpha_norm = 0.0;
  for (const auto& a : res.alpha0) alpha_norm += std::norm(a);
  alpha_norm = std::sqrt(alpha_norm);

  if (cfg.format == "csv") {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("c0_re", jnum(res.c0.real()));
    rows.emplace_back("c0_im", jnum(res.c0.imag()));
    rows.emplace_back("fit_residual", jnum(res.fit_residual));
    rows.emplace_back("alpha0_norm", jnum(alpha_norm));
    for (const auto& [chi, lam] : res.partial)
      rows.emplace_back("partial " + jchar(chi), jnum(lam.real()) + "+" + jnum(lam.imag()) + "i");
    emit(cfg, kv_csv(rows));
    return 0;
  }
  std::string out = "{\"c0\":" + jcplx(res.c0) + ",\"partial\":[";
  bool first = true;
  for (const auto& [chi, lam] : res.partial) {
    if (!first) out += ",";
    first = false;
    out += "{\"char\":" + jchar(chi) + ",\"coeff\":" + jcplx(lam) + "}";
  }
  out += "],\"alpha0_norm\":" + jnum(alpha_norm);
  out += ",\"fit_residual\":" + jnum(res.fit_residual);
  out += ",\"residual\":" + jderivation(res.residual);
  out += ",\"L\":" + std::to_string(cfg.L) + "}";
  emit(cfg, out);
  return 0;
}

// --- lift ---------------------------------------------------------------------

std::vector<Character> lift_characters(const GroupSpec& g) {
  std::vector<Character> chars;
  for (std::size_t i = 0; i < g.scale.size() && i < 3; ++i)
    chars.push_back(make_odo_char(1, g.scale.terms[i]));
  return chars;
}

int cmd_lift(const RunConfig& cfg) {
  GroupSpec g = parse_group(load_json(cfg.group_path));
  if (cfg.derivation_path.empty()) fail_input("BadConfig", "lift needs --derivation");
  DerivationSpec delta = parse_derivation(load_json(cfg.derivation_path), g);
  if (delta.space != Space::Full)
    fail_input("BadDerivation", "lift expects a derivation on the quotient algebra (space B)");
  try {
    Lift lift = build_lift(g, delta, g.scale, cfg.target);
    DefectReport rep = verify_lift(g, lift, lift_characters(g), cfg.L);
    emit(cfg, defect_report_json(rep));
    if (!cfg.out_path.empty()) {
      // Defect matrices next to the report, in the dump format.
      TruncatedOperator dU = apply(g, lift.d, element_shift(g, Space::Plus, 1), cfg.L);
      TruncatedOperator TdV =
          toeplitz_map(apply(g, delta, element_shift(g, Space::Full, 1), cfg.L));
      std::ofstream m(cfg.out_path + ".defect_U.mat");
      write_matrix(m, masked(dU - TdV, rep.mask_margin));
    }
    return rep.agrees && rep.II_closed <= cfg.target ? 0 : 1;
  } catch (const Error& e) {
    if (e.kind != Error::Kind::Obstruction) throw;
    std::string out = "{\"obstructed\":true,\"code\":" + jstr(e.code) + ",\"message\":" +
                      jstr(e.what()) + ",\"derivation\":" + jderivation(delta) + "}";
    emit(cfg, out);
    return 1;
  }
}

// --- verify: the operator-relation self check ----------------------------------

int cmd_verify(const RunConfig& cfg) {
  GroupSpec g = parse_group(load_json(cfg.group_path));
  RelationReport rep = run_relation_suite(g, cfg.L, 50, cfg.seed);
  const double tol = 1e-12;
  if (cfg.format == "csv") {
    std::string out = "name,max_err,margin\n";
    for (const auto& c : rep.checks)
      out += c.name + "," + jnum(c.max_err) + "," + std::to_string(c.margin) + "\n";
    out.pop_back();
    emit(cfg, out);
    return rep.pass(tol) ? 0 : 1;
  }
  std::string out = "{\"relations\":[";
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    if (i) out += ",";
    out += "{\"name\":" + jstr(rep.checks[i].name) + ",\"max_err\":" + jnum(rep.checks[i].max_err) +
           ",\"margin\":" + std::to_string(rep.checks[i].margin) + "}";
  }
  out += "],\"worst\":" + jnum(rep.worst) + ",\"tol\":" + jnum(tol);
  out += ",\"pass\":" + std::string(rep.pass(tol) ? "true" : "false");
  out += ",\"L\":" + std::to_string(cfg.L) + ",\"seed\":" + std::to_string(cfg.seed) + "}";
  emit(cfg, out);
  return rep.pass(tol) ? 0 : 1;
}

// --- obstruction-demo -----------------------------------------------------------

int cmd_obstruction_demo(const RunConfig& cfg) {
  GroupSpec g = parse_group(load_json(cfg.group_path));
  cplx coeff{1.0, 0.0};
  if (!cfg.derivation_path.empty()) {
    DerivationSpec d = parse_derivation(load_json(cfg.derivation_path), g);
    if (!d.partial_rates.empty()) coeff = d.partial_rates[0];
  }
  ObstructionReport rep = torus_obstruction_demo(g, coeff, cfg.L, cfg.seed);
  std::string out = "{\"c0\":" + jcplx(rep.c0) + ",\"partial_chi1\":" + jcplx(rep.partial_chi1);
  out += ",\"max_inner_action_on_diagonals\":" + jnum(rep.max_inner_action_on_diagonals);
  out += ",\"obstructed\":" + std::string(rep.obstructed ? "true" : "false") + "}";
  emit(cfg, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for crossed-product and Toeplitz algebra computations"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string command;
  for (const auto& name :
       {"group-info", "fourier", "classify", "lift", "verify", "obstruction-demo"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--group", cfg.group_path, "group spec JSON")->required();
    sub->add_option("--derivation", cfg.derivation_path, "derivation spec JSON");
    sub->add_option("--L", cfg.L, "truncation size");
    sub->add_option("--target", cfg.target, "defect target for lifts");
    sub->add_option("--out", cfg.out_path, "write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv");
    sub->add_option("--seed", cfg.seed, "seed for randomized suites");
    sub->callback([&command, name]() { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    check_config(cfg);
    if (command == "group-info") return cmd_group_info(cfg);
    if (command == "fourier") return cmd_fourier(cfg);
    if (command == "classify") return cmd_classify(cfg);
    if (command == "lift") return cmd_lift(cfg);
    if (command == "verify") return cmd_verify(cfg);
    if (command == "obstruction-demo") return cmd_obstruction_demo(cfg);
    std::cerr << "unknown command\n";
    return 2;
  } catch (const mga::Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.kind) {
      case mga::Error::Kind::Obstruction: return 1;
      default: return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
