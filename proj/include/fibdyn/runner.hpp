#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "fibdyn/io.hpp"
#include "fibdyn/lyapunov.hpp"

namespace fibdyn {

struct RunOptions {
  std::string subcommand;
  json config;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  int workers = 1;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 tolerance band, 2 config, 3 numerical
  json report;
};

namespace detail {

inline void check_keys(const json& cfg, const std::set<std::string>& allowed) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : cfg.items())
    if (!allowed.count(key)) throw ConfigError("unknown config key: " + key);
}

inline json num(double value) { return {{"value", value}}; }
inline json num_se(double value, double se) { return {{"value", value}, {"se", se}}; }
inline json num_bound(double value, double bound) {
  return {{"value", value}, {"bound", bound}};
}

struct Checks {
  json list = json::array();
  bool all_pass = true;
  void add(const std::string& name, bool pass, double value, double band) {
    list.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"band", band}});
    all_pass = all_pass && pass;
  }
};

inline json exponent_json(const ExpEntry& e) {
  return {{"value", e.value}, {"se", e.se}, {"n", e.n},
          {"dropped", e.dropped}, {"method", e.method}};
}

}  // namespace detail

inline RunResult run(const RunOptions& opt) {
  namespace fs = std::filesystem;
  const json& cfg = opt.config;
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");

  std::uint64_t seed = cfg.value("seed", std::uint64_t(20240901));
  if (opt.seed_override) seed = *opt.seed_override;

  fs::create_directories(opt.out_dir);
  auto artifact = [&](const std::string& name) { return opt.out_dir + "/" + name; };

  RunResult result;
  json& rep = result.report;
  rep["subcommand"] = opt.subcommand;
  rep["version"] = FIBDYN_VERSION;
  rep["config_hash"] = config_hash(cfg);
  rep["seed"] = seed;
  rep["workers"] = opt.workers;
  detail::Checks checks;

  if (opt.subcommand == "validate") {
    detail::check_keys(cfg, {"map", "seed"});
    FiberedMap f = map_from_json(cfg.at("map"));
    json list = json::array();
    for (const auto& c : f.validation().checks) {
      list.push_back({{"name", c.name}, {"value", c.value},
                      {"threshold", c.threshold}, {"pass", c.pass}});
      checks.add(c.name, c.pass, c.value, c.threshold);
    }
    TrappingCert cert = certify_trapping(f);
    rep["trapping"] = {{"ok", cert.ok}, {"epsilon", cert.epsilon},
                       {"alpha", cert.alpha}, {"beta", cert.beta},
                       {"gamma", cert.gamma}};
    checks.add("trapping_certificate", cert.ok, cert.epsilon, 1e-8);
    rep["validation"] = list;
    rep["checks"] = checks.list;
    // a failed validation is a property of the input, not a band miss
    result.exit_code = checks.all_pass ? 0 : 3;
    return result;
  }

  if (opt.subcommand == "green") {
    detail::check_keys(cfg, {"map", "fiber", "rect", "res", "tol", "pgm", "seed"});
    FiberedMap f = map_from_json(cfg.at("map"));
    require_valid(f);
    const double tol = cfg.value("tol", 1e-9);
    const cplx t = cplx_from_json(cfg.at("fiber"));
    Fiber fib = make_fiber(Pt1({t, cplx(1.0)}));
    const auto& r = cfg.at("rect");
    const auto& res = cfg.at("res");
    ScanGrid g;
    g.nx = res[0].get<int>();
    g.ny = res[1].get<int>();
    g.rect = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
    g.allocate();
    GreenContext ctx = green_context(f);
    parallel_for(std::size_t(g.nx) * g.ny, opt.workers, [&](std::size_t k) {
      const int i = int(k % g.nx), j = int(k / g.nx);
      try {
        GreenValue gv = relative_green(f, ctx, fib.at(cplx(1.0), g.center(i, j)), tol);
        g.value[k] = gv.value;
        g.se[k] = gv.truncation_bound;
      } catch (const std::exception&) {
        g.masked[k] = 1;
      }
    });
    std::ofstream csv(artifact("green.csv"), std::ios::binary);
    csv << "i,j,value,bound\n";
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t k = g.idx(i, j);
        csv << i << ',' << j << ',' << detail::fmt_double(g.value[k]) << ','
            << detail::fmt_double(g.se[k]) << '\n';
      }
    if (cfg.value("pgm", false)) rep["pgm"] = write_pgm16(artifact("green.pgm"), g);
    rep["artifacts"] = {artifact("green.csv")};
    rep["tol"] = tol;
    rep["checks"] = checks.list;
    result.exit_code = 0;
    return result;
  }

  if (opt.subcommand == "sample") {
    detail::check_keys(cfg, {"map", "method", "n", "seed", "burn_in", "depth", "base_point"});
    FiberedMap f = map_from_json(cfg.at("map"));
    const std::string method = cfg.at("method").get<std::string>();
    const std::size_t n = cfg.at("n").get<std::size_t>();
    if (method == "base") {
      BaseSample s = sample_base(f, n, seed, cfg.value("burn_in", kDefaultBurnIn));
      write_sample_csv(artifact("sample.csv"), s);
      rep["sample"] = sample_meta(s);
    } else if (method == "equilibrium") {
      PlaneSample s = sample_equilibrium(f, n, seed, cfg.value("burn_in", kDefaultBurnIn));
      write_sample_csv(artifact("sample.csv"), s);
      rep["sample"] = sample_meta(s);
    } else if (method == "fiber") {
      const cplx t = cplx_from_json(cfg.at("base_point"));
      PlaneSample s = sample_fiber_measure(f, Pt1({t, cplx(1.0)}), n, seed,
                                           cfg.value("depth", kDefaultChainDepth));
      write_sample_csv(artifact("sample.csv"), s);
      rep["sample"] = sample_meta(s);
    } else {
      throw ConfigError("sample method must be base, equilibrium or fiber");
    }
    rep["artifacts"] = {artifact("sample.csv")};
    rep["checks"] = checks.list;
    result.exit_code = 0;
    return result;
  }

  if (opt.subcommand == "lyapunov") {
    detail::check_keys(cfg, {"map", "n", "seed"});
    FiberedMap f = map_from_json(cfg.at("map"));
    const std::size_t n = cfg.value("n", std::size_t(100000));
    PlaneSample sf = sample_equilibrium(f, n, derive_seed(seed, 1));
    BaseSample st = sample_base(f, n, derive_seed(seed, 2));
    ExponentReport er = exponents(f, sf, st);
    rep["lambda_f"] = detail::exponent_json(er.lambda_f);
    rep["lambda_theta"] = detail::exponent_json(er.lambda_theta);
    rep["lambda_sigma"] = detail::exponent_json(er.lambda_sigma);
    rep["lambda_0"] = detail::num(er.lambda_0);
    const double logd = std::log(double(f.degree()));
    checks.add("sigma_lower_bound",
               er.lambda_sigma.value >= logd - 3.0 * er.lambda_sigma.se,
               er.lambda_sigma.value, logd - 3.0 * er.lambda_sigma.se);
    checks.add("theta_lower_bound",
               er.lambda_theta.value >= 0.5 * logd - 3.0 * er.lambda_theta.se,
               er.lambda_theta.value, 0.5 * logd - 3.0 * er.lambda_theta.se);
    const double split = std::abs(er.lambda_f.value - er.lambda_theta.value -
                                  er.lambda_sigma.value);
    const double split_band =
        3.0 * combined_se(er.lambda_f.se,
                          combined_se(er.lambda_theta.se, er.lambda_sigma.se)) +
        1e-9;
    checks.add("exponent_split", split <= split_band, split, split_band);
    rep["checks"] = checks.list;
    result.exit_code = checks.all_pass ? 0 : 1;
    return result;
  }

  if (opt.subcommand == "bj-check") {
    detail::check_keys(cfg, {"map", "n", "seed", "tol"});
    FiberedMap f = map_from_json(cfg.at("map"));
    const std::size_t n = cfg.value("n", std::size_t(100000));
    const double tol = cfg.value("tol", 1e-9);
    BJReport bj = bj_check(f, n, seed, tol);
    rep["lambda_sigma_direct"] =
        detail::num_se(bj.exponents.lambda_sigma.value, bj.exponents.lambda_sigma.se);
    rep["lambda_theta"] =
        detail::num_se(bj.exponents.lambda_theta.value, bj.exponents.lambda_theta.se);
    rep["pairing"] = detail::num_se(bj.pairing.value, bj.pairing.se);
    rep["lambda_sigma_formula"] = detail::num(bj.lambda_sigma_formula);
    const double band = 3.0 * bj.combined_se + 1e-4;
    rep["discrepancy"] = {{"value", bj.discrepancy}, {"band", band}};
    checks.add("bedford_jonsson", std::abs(bj.discrepancy) <= band,
               std::abs(bj.discrepancy), band);
    rep["checks"] = checks.list;
    result.exit_code = checks.all_pass ? 0 : 1;
    return result;
  }

  if (opt.subcommand == "periodic-check") {
    detail::check_keys(cfg, {"map", "n_list", "n", "seed"});
    FiberedMap f = map_from_json(cfg.at("map"));
    const std::size_t n = cfg.value("n", std::size_t(100000));
    std::vector<int> n_list;
    for (const auto& e : cfg.at("n_list")) n_list.push_back(e.get<int>());
    PlaneSample sf = sample_equilibrium(f, n, derive_seed(seed, 1));
    BaseSample st = sample_base(f, n, derive_seed(seed, 2));
    ExponentReport er = exponents(f, sf, st);
    GreenContext ctx = green_context(f);
    json table = json::array();
    std::vector<double> gaps;
    for (int per : n_list) {
      SigmaPeriodic sp = sigma_periodic_approx(f, per, 1e-9, &ctx);
      gaps.push_back(std::abs(sp.value - er.lambda_sigma.value));
      table.push_back({{"n", per}, {"value", sp.value},
                       {"gap", gaps.back()}, {"excluded_cycles", sp.excluded_cycles}});
    }
    rep["lambda_sigma_direct"] =
        detail::num_se(er.lambda_sigma.value, er.lambda_sigma.se);
    rep["periodic"] = table;
    const double band = 0.01 + 3.0 * er.lambda_sigma.se;
    checks.add("periodic_limit", gaps.back() <= band, gaps.back(), band);
    bool monotone = true;
    for (std::size_t i = 1; i < gaps.size(); ++i)
      monotone = monotone && gaps[i] <= gaps[i - 1] + 3.0 * er.lambda_sigma.se;
    checks.add("gap_monotone", monotone, double(monotone), 1.0);
    rep["checks"] = checks.list;
    result.exit_code = checks.all_pass ? 0 : 1;
    return result;
  }

  if (opt.subcommand == "decomp-check") {
    detail::check_keys(cfg, {"map", "n", "outer", "inner", "seed"});
    FiberedMap f = map_from_json(cfg.at("map"));
    const std::size_t n = cfg.value("n", std::size_t(20000));
    const std::size_t outer_n = cfg.value("outer", std::size_t(200));
    const std::size_t inner_n = cfg.value("inner", std::size_t(200));
    PlaneSample direct = sample_equilibrium(f, n, derive_seed(seed, 1));
    BaseSample outer = sample_base(f, outer_n, derive_seed(seed, 2));
    json table = json::array();
    for (const auto& phi : builtin_moments_plane()) {
      Estimate lhs = integrate(direct, phi);
      Estimate rhs = nested_integral(f, phi, outer, inner_n, derive_seed(seed, 3));
      const double diff = std::abs(lhs.value - rhs.value);
      const double band = 3.0 * combined_se(lhs.se, rhs.se) + 1e-6;
      table.push_back({{"moment", phi.name()},
                       {"direct", detail::num_se(lhs.value, lhs.se)},
                       {"nested", detail::num_se(rhs.value, rhs.se)},
                       {"diff", diff}, {"band", band}});
      checks.add("decomp_" + phi.name(), diff <= band, diff, band);
    }
    rep["moments"] = table;
    rep["checks"] = checks.list;
    result.exit_code = checks.all_pass ? 0 : 1;
    return result;
  }

  if (opt.subcommand == "bif-scan") {
    detail::check_keys(cfg, {"family", "mode", "res", "n", "period", "n_list",
                             "bump", "seed", "tol", "blur_radius"});
    ParamFamily fam = probe_family(family_from_json(cfg.at("family")));
    const auto& res = cfg.at("res");
    const int nx = res[0].get<int>(), ny = res[1].get<int>();
    const std::string mode = cfg.value("mode", "sigma");
    const double tol = cfg.value("tol", 1e-9);
    rep["family"] = fam.name;
    rep["rect"] = {fam.rect.x0, fam.rect.x1, fam.rect.y0, fam.rect.y1};

    if (mode == "compare") {
      std::vector<int> n_list;
      for (const auto& e : cfg.at("n_list")) n_list.push_back(e.get<int>());
      Bump bump{fam.rect.center(), 0.25 * (fam.rect.x1 - fam.rect.x0)};
      if (cfg.contains("bump")) {
        bump.center = cplx_from_json(cfg.at("bump").at("center"));
        bump.radius = cfg.at("bump").at("radius").get<double>();
      }
      const std::size_t n_mc = cfg.value("n", std::size_t(20000));
      BifComparison cmp =
          bif_compare(fam, n_list, bump, nx, ny, n_mc, seed, opt.workers, tol);
      rep["direct_pairing"] = detail::num(cmp.direct_pairing);
      json rows = json::array();
      for (const auto& r : cmp.rows)
        rows.push_back({{"n", r.n}, {"pairing", r.pairing},
                        {"gap", r.gap}, {"monotone", r.monotone}});
      rep["table"] = rows;
      if (std::abs(cmp.direct_pairing) > 1e-3) {
        const double band = 0.1 * std::abs(cmp.direct_pairing);
        checks.add("pairing_limit", cmp.rows.back().gap <= band, cmp.rows.back().gap,
                   band);
      }
      rep["checks"] = checks.list;
      result.exit_code = checks.all_pass ? 0 : 1;
      return result;
    }

    ScanGrid g;
    if (mode == "sigma") {
      g = scan_sigma(fam, nx, ny, cfg.value("n", std::size_t(20000)), seed, opt.workers);
    } else if (mode == "periodic") {
      g = scan_sigma_periodic(fam, cfg.value("period", 3), nx, ny, opt.workers, tol);
    } else {
      throw ConfigError("bif-scan mode must be sigma, periodic or compare");
    }
    const double blur = cfg.value("blur_radius", 0.0);
    LaplacianGrid lap = laplacian_density(blur > 0.0 ? gaussian_blur(g, blur) : g);
    write_grid_csv(artifact("grid.csv"), g);
    write_grid_csv(artifact("density.csv"), lap.density);
    rep["grid_pgm"] = write_pgm16(artifact("grid.pgm"), g);
    rep["density_pgm"] = write_pgm16(artifact("density.pgm"), lap.density);
    rep["artifacts"] = {artifact("grid.csv"), artifact("density.csv"),
                        artifact("grid.pgm"), artifact("density.pgm")};
    rep["eps_noise"] = lap.eps_noise;
    rep["unmasked"] = lap.unmasked;
    rep["negative_flagged"] = lap.negative_flagged;
    checks.add("positivity",
               lap.negative_flagged <= 0.01 * std::max(lap.unmasked, 1),
               double(lap.negative_flagged), 0.01 * std::max(lap.unmasked, 1));
    rep["checks"] = checks.list;
    result.exit_code = checks.all_pass ? 0 : 1;
    return result;
  }

  throw ConfigError("unknown subcommand: " + opt.subcommand);
}

/// Full pipeline with report emission and exception-to-exit-code mapping.
inline int run_and_write(const RunOptions& opt) {
  RunResult res;
  try {
    res = run(opt);
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.report = {{"error", e.what()}, {"kind", "config"}};
  } catch (const nlohmann::json::exception& e) {
    res.exit_code = 2;
    res.report = {{"error", e.what()}, {"kind", "config"}};
  } catch (const std::exception& e) {
    res.exit_code = 3;
    res.report = {{"error", e.what()}, {"kind", "numerical"}};
  }
  try {
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream out(opt.out_dir + "/report.json", std::ios::binary);
    out << res.report.dump(2) << "\n";
  } catch (...) {
  }
  return res.exit_code;
}

}  // namespace fibdyn
