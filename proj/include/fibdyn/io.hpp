#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibdyn/bifurcation.hpp"
#include "fibdyn/builtins.hpp"
#include "fibdyn/errors.hpp"
#include "fibdyn/fibered_map.hpp"
#include "fibdyn/sampling.hpp"

namespace fibdyn {

using nlohmann::json;

#define FIBDYN_VERSION "0.1.0"

// ---------------------------------------------------------------------------
// JSON schemas for polynomials and maps
// ---------------------------------------------------------------------------

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx cplx_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const UniPoly& p) {
  json coeffs = json::array();
  for (cplx c : p.c) coeffs.push_back(to_json(c));
  return {{"degree", p.degree()}, {"coeffs", coeffs}};
}

inline UniPoly unipoly_from_json(const json& j) {
  std::vector<cplx> c;
  for (const auto& e : j.at("coeffs")) c.push_back(cplx_from_json(e));
  UniPoly p(std::move(c));
  if (j.at("degree").get<int>() != p.degree())
    throw ConfigError("polynomial degree does not match coefficient count");
  return p;
}

inline json to_json(const BinaryForm& b) {
  json coeffs = json::array();
  for (cplx c : b.b) coeffs.push_back(to_json(c));
  return {{"degree", b.d}, {"coeffs", coeffs}};
}

inline BinaryForm binary_from_json(const json& j) {
  std::vector<cplx> c;
  for (const auto& e : j.at("coeffs")) c.push_back(cplx_from_json(e));
  return BinaryForm(j.at("degree").get<int>(), std::move(c));
}

inline json to_json(const TernaryForm& t) {
  json terms = json::array();
  for (int l = 0; l <= t.d; ++l)
    for (int jj = 0; jj <= t.d - l; ++jj) {
      const cplx c = t.layer[l].b[jj];
      if (std::abs(c) == 0.0) continue;
      terms.push_back({{"exp", {t.d - l - jj, jj, l}}, {"c", to_json(c)}});
    }
  return {{"degree", t.d}, {"terms", terms}};
}

inline TernaryForm ternary_from_json(const json& j) {
  const int d = j.at("degree").get<int>();
  TernaryForm t = TernaryForm::zeros(d);
  for (const auto& term : j.at("terms")) {
    const auto& e = term.at("exp");
    if (!e.is_array() || e.size() != 3) throw ConfigError("ternary term needs exp [i,j,l]");
    const int i = e[0].get<int>(), jj = e[1].get<int>(), l = e[2].get<int>();
    if (i + jj + l != d) throw ConfigError("ternary exponents must sum to the degree");
    t.set_coeff(i, jj, l, cplx_from_json(term.at("c")));
  }
  return t;
}

inline json to_json(const FiberedMap& f) {
  json j{{"d", f.degree()},
         {"theta0", to_json(f.theta0())},
         {"theta1", to_json(f.theta1())},
         {"R", to_json(f.R())}};
  if (f.affine()) {
    json q = json::array();
    const auto& qz = f.affine()->q_z;
    json terms = json::array();
    for (std::size_t l = 0; l < qz.size(); ++l)
      for (int i = 0; i <= qz[l].degree(); ++i) {
        if (std::abs(qz[l].c[i]) == 0.0) continue;
        terms.push_back({{"exp", {i, int(l)}}, {"c", to_json(qz[l].c[i])}});
      }
    j["affine"] = {{"p", to_json(f.affine()->p)},
                   {"q", {{"degree", f.degree()}, {"terms", terms}}}};
  }
  return j;
}

inline FiberedMap map_from_json(const json& j) {
  if (j.is_string()) return builtin_map(j.get<std::string>());
  if (j.contains("builtin")) return builtin_map(j.at("builtin").get<std::string>());
  if (j.contains("affine") && !j.contains("theta0")) {
    const auto& aff = j.at("affine");
    const int d = aff.at("q").at("degree").get<int>();
    std::vector<UniPoly> qz(d + 1);
    std::vector<std::vector<cplx>> qc(d + 1);
    for (int l = 0; l <= d; ++l) qc[l].assign(std::size_t(d - l) + 1, cplx(0.0));
    for (const auto& term : aff.at("q").at("terms")) {
      const int i = term.at("exp")[0].get<int>(), l = term.at("exp")[1].get<int>();
      if (l < 0 || l > d || i < 0 || i > d - l)
        throw ConfigError("affine q exponent out of range");
      qc[l][i] = cplx_from_json(term.at("c"));
    }
    for (int l = 0; l <= d; ++l) qz[l] = UniPoly(qc[l]);
    return FiberedMap::from_affine(unipoly_from_json(aff.at("p")), std::move(qz));
  }
  return FiberedMap(binary_from_json(j.at("theta0")), binary_from_json(j.at("theta1")),
                    ternary_from_json(j.at("R")));
}

inline json to_json(const FamilyBinary& fb) {
  json coeffs = json::array();
  for (const auto& p : fb.b) coeffs.push_back(to_json(p));
  return {{"degree", fb.d}, {"coeffs", coeffs}};
}

inline FamilyBinary family_binary_from_json(const json& j) {
  FamilyBinary fb;
  fb.d = j.at("degree").get<int>();
  for (const auto& e : j.at("coeffs")) fb.b.push_back(unipoly_from_json(e));
  if (int(fb.b.size()) != fb.d + 1) throw ConfigError("family form coefficient count");
  return fb;
}

inline json to_json(const ParamFamily& fam) {
  json layers = json::array();
  for (const auto& l : fam.R.layer) layers.push_back(to_json(l));
  return {{"name", fam.name},
          {"d", fam.d},
          {"theta0", to_json(fam.theta0)},
          {"theta1", to_json(fam.theta1)},
          {"R", {{"degree", fam.R.d}, {"layers", layers}}},
          {"rect", {fam.rect.x0, fam.rect.x1, fam.rect.y0, fam.rect.y1}}};
}

inline ParamFamily family_from_json(const json& j) {
  if (j.is_string()) return builtin_family(j.get<std::string>());
  if (j.contains("builtin")) return builtin_family(j.at("builtin").get<std::string>());
  ParamFamily fam;
  fam.name = j.value("name", "custom");
  fam.d = j.at("d").get<int>();
  fam.theta0 = family_binary_from_json(j.at("theta0"));
  fam.theta1 = family_binary_from_json(j.at("theta1"));
  fam.R.d = j.at("R").at("degree").get<int>();
  for (const auto& l : j.at("R").at("layers"))
    fam.R.layer.push_back(family_binary_from_json(l));
  const auto& r = j.at("rect");
  fam.rect = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
  return fam;
}

// ---------------------------------------------------------------------------
// Artifacts: CSV (diff-able, deterministic formatting) and 16-bit PGM
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

template <int N>
void write_sample_csv(const std::string& path, const SampleSet<N>& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path);
  for (int k = 0; k < N; ++k) out << "re" << k << ",im" << k << ",";
  out << "weight\n";
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    for (int k = 0; k < N; ++k)
      out << detail::fmt_double(s.points[i].x[k].real()) << ','
          << detail::fmt_double(s.points[i].x[k].imag()) << ',';
    out << detail::fmt_double(s.weights[i]) << '\n';
  }
}

template <int N>
json sample_meta(const SampleSet<N>& s) {
  return {{"n", s.points.size()},
          {"seed", s.seed},
          {"burn_in", s.burn_in},
          {"method", to_string(s.method)},
          {"warnings", s.warnings}};
}

inline void write_grid_csv(const std::string& path, const ScanGrid& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path);
  out << "i,j,re,im,value,se,masked\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.idx(i, j);
      const cplx c = g.center(i, j);
      out << i << ',' << j << ',' << detail::fmt_double(c.real()) << ','
          << detail::fmt_double(c.imag()) << ',' << detail::fmt_double(g.value[k]) << ','
          << detail::fmt_double(g.se[k]) << ',' << int(g.masked[k]) << '\n';
    }
}

/// 16-bit PGM of a grid; unmasked values map affinely onto [1, 65535] and
/// masked cells render as 0. Returns the mapping for the metadata record.
inline json write_pgm16(const std::string& path, const ScanGrid& g) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < g.value.size(); ++k) {
    if (g.masked[k]) continue;
    if (first) {
      lo = hi = g.value[k];
      first = false;
    }
    lo = std::min(lo, g.value[k]);
    hi = std::max(hi, g.value[k]);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path);
  out << "P5\n" << g.nx << " " << g.ny << "\n65535\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.idx(i, j);
      std::uint16_t v = 0;
      if (!g.masked[k])
        v = std::uint16_t(1.0 + 65534.0 * (g.value[k] - lo) / span + 0.5);
      const unsigned char bytes[2]{(unsigned char)(v >> 8), (unsigned char)(v & 0xff)};
      out.write(reinterpret_cast<const char*>(bytes), 2);
    }
  return {{"min", lo}, {"max", hi}, {"mapping", "value -> 1 + 65534 (value-min)/(max-min), masked -> 0"}};
}

/// FNV-1a of the canonical dump; nlohmann objects are key-sorted so the hash
/// is stable across runs.
inline std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

}  // namespace fibdyn
