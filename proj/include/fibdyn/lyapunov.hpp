#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fibdyn/fibered_map.hpp"
#include "fibdyn/green.hpp"
#include "fibdyn/sampling.hpp"
#include "fibdyn/stats.hpp"

namespace fibdyn {

namespace detail {
// points closer to a critical zero than this are dropped and counted
constexpr double kSingularCut = 1e-13;
constexpr double kLogClip = -690.0;  // log(1e-300)
constexpr double kDropFailFraction = 0.01;
}  // namespace detail

struct ExpEntry {
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  std::size_t dropped = 0;
  std::string method;
};

struct ExponentReport {
  ExpEntry lambda_f;
  ExpEntry lambda_theta;
  ExpEntry lambda_sigma;
  double lambda_0 = 0.0;  // the fiber of lines has a point at infinity, not a
                          // positive-dimensional restriction; its exponent sum
                          // is identically zero
};

namespace detail {

template <class Vals>
ExpEntry log_mean_entry(const Vals& raw, std::span<const double> weights,
                        const char* method) {
  std::vector<double> vals, w;
  vals.reserve(raw.size());
  w.reserve(raw.size());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] > kSingularCut)) {
      ++dropped;
      continue;
    }
    vals.push_back(std::max(std::log(raw[i]), kLogClip));
    w.push_back(weights[i]);
  }
  if (dropped > kDropFailFraction * raw.size())
    throw SingularSample(std::string(method) + ": too many near-critical samples",
                         dropped, raw.size());
  Estimate est = jackknife_mean(vals, w);
  ExpEntry e;
  e.value = est.value;
  e.se = est.se;
  e.n = vals.size();
  e.dropped = dropped;
  e.method = method;
  return e;
}

}  // namespace detail

/// Monte-Carlo exponents: the base exponent over the base sample, the
/// sectional exponent over the plane sample, and their sum with the base
/// factor read through the projection of the plane sample (so the total and
/// the parts come from one sample and the split is structural).
inline ExponentReport exponents(const FiberedMap& f, const PlaneSample& sample_f,
                                const BaseSample& sample_theta) {
  require_valid(f);
  ExponentReport rep;

  std::vector<double> jac_theta(sample_theta.points.size());
  for (std::size_t i = 0; i < jac_theta.size(); ++i)
    jac_theta[i] = base_derivative_fs(f, sample_theta.points[i]);
  rep.lambda_theta =
      detail::log_mean_entry(jac_theta, sample_theta.weights, "fs-derivative/base-sample");

  std::vector<double> jac_sigma(sample_f.points.size());
  std::vector<double> jac_total(sample_f.points.size());
  for (std::size_t i = 0; i < jac_sigma.size(); ++i) {
    jac_sigma[i] = sectional_jacobian(f, sample_f.points[i]);
    jac_total[i] = jac_sigma[i] * base_derivative_fs(f, base_of(sample_f.points[i]));
  }
  rep.lambda_sigma =
      detail::log_mean_entry(jac_sigma, sample_f.weights, "sectional-jacobian/mu_f");
  rep.lambda_f =
      detail::log_mean_entry(jac_total, sample_f.weights, "chain-rule/mu_f");
  return rep;
}

// ---------------------------------------------------------------------------
// Per-fiber exponents along periodic cycles: m log d plus the relative Green
// function summed over the critical points cut out of each fiber of the
// cycle, with algebraic multiplicities.
// ---------------------------------------------------------------------------

inline double per_fiber_exponent(const FiberedMap& f, const GreenContext& ctx,
                                 const PeriodicCycle& cycle, double tol_g = 1e-9) {
  require_valid(f);
  const int d = f.degree();
  double acc = cycle.exact_period() * std::log(double(d));
  for (const auto& a : cycle.points) {
    Fiber fib = make_fiber(a);
    BinaryForm cs = fiber_critical_form(f, fib);
    if (cs.is_zero(1e-14 * (1.0 + f.c_sigma().norm1())))
      throw DegenerateFiber("per-fiber exponent: critical form vanished on a fiber");
    RootSet roots = binary_form_roots(cs, 1e-8);
    for (const auto& r : roots.roots) {
      // chart: affine entries are (w:1), the (1:0) entry is the fiber point v=0
      const Pt2 crit = r.at_infinity ? fib.at(cplx(1.0), cplx(0.0))
                                     : fib.at(r.value, cplx(1.0));
      GreenValue g = relative_green(f, ctx, crit, tol_g);
      if (!g.finite) throw DegenerateFiber("per-fiber exponent: infinite green value");
      acc += r.multiplicity * g.value;
    }
  }
  return acc;
}

struct SigmaPeriodic {
  double value = 0.0;
  int n = 1;
  struct Row {
    int exact_period = 1;
    int points_with_multiplicity = 1;
    double cycle_exponent = 0.0;  // exponent of the return map over the cycle
  };
  std::vector<Row> table;
  int excluded_cycles = 0;
};

/// Periodic-fiber approximation of the sectional exponent:
/// (1/(n d^n)) sum over fixed points of theta^n (with multiplicity, infinity
/// included) of the exponent of the n-th return map on that fiber.
inline SigmaPeriodic sigma_periodic_approx(const FiberedMap& f, int n,
                                           double tol_g = 1e-9,
                                           const GreenContext* ctx_in = nullptr) {
  require_valid(f);
  GreenContext ctx = ctx_in ? *ctx_in : green_context(f);
  PeriodicSet ps = periodic_base_points(f, n);
  SigmaPeriodic out;
  out.n = n;
  const double dn = std::pow(double(f.degree()), n);
  double acc = 0.0;
  for (const auto& cyc : ps.cycles) {
    SigmaPeriodic::Row row;
    row.exact_period = cyc.exact_period();
    row.points_with_multiplicity = cyc.total_multiplicity();
    double lam = 0.0;
    try {
      lam = per_fiber_exponent(f, ctx, cyc, tol_g);
    } catch (const DegenerateFiber&) {
      ++out.excluded_cycles;
      continue;
    }
    row.cycle_exponent = lam;
    out.table.push_back(row);
    // each point of the cycle contributes (n/m) * lam, m = exact period
    acc += double(row.points_with_multiplicity) * lam / double(row.exact_period);
  }
  out.value = acc / dn;
  return out;
}

// ---------------------------------------------------------------------------
// The pairing of the fiberwise critical points against the relative Green
// function, averaged over the base measure.
// ---------------------------------------------------------------------------

/// Monte-Carlo estimate of the pairing <S ^ [C_sigma], G>: for a drawn from
/// the base sample, sum G over the d-1 critical points in the fiber over a.
inline Estimate bj_pairing(const FiberedMap& f, const GreenContext& ctx,
                           const BaseSample& sample_theta, double tol_g = 1e-9,
                           std::size_t* degenerate_count = nullptr) {
  require_valid(f);
  std::vector<double> vals;
  std::vector<double> w;
  vals.reserve(sample_theta.points.size());
  w.reserve(sample_theta.points.size());
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < sample_theta.points.size(); ++i) {
    Fiber fib = make_fiber(sample_theta.points[i]);
    BinaryForm cs = fiber_critical_form(f, fib);
    if (cs.is_zero(1e-14 * (1.0 + f.c_sigma().norm1()))) {
      ++degenerate;
      continue;
    }
    double sum = 0.0;
    bool ok = true;
    RootSet roots;
    try {
      roots = binary_form_roots(cs, 1e-8);
    } catch (const NonConvergence&) {
      ++degenerate;
      continue;
    }
    for (const auto& r : roots.roots) {
      const Pt2 crit = r.at_infinity ? fib.at(cplx(1.0), cplx(0.0))
                                     : fib.at(r.value, cplx(1.0));
      GreenValue g = relative_green(f, ctx, crit, tol_g);
      if (!g.finite) {
        ok = false;
        break;
      }
      sum += r.multiplicity * g.value;
    }
    if (!ok) {
      ++degenerate;
      continue;
    }
    vals.push_back(sum);
    w.push_back(sample_theta.weights[i]);
  }
  if (degenerate > detail::kDropFailFraction * sample_theta.points.size())
    throw DegenerateFiber("pairing: too many degenerate fibers");
  if (degenerate_count) *degenerate_count = degenerate;
  return jackknife_mean(vals, w);
}

// ---------------------------------------------------------------------------
// Cross-validation of the two sectional-exponent routes
// ---------------------------------------------------------------------------

struct BJReport {
  ExponentReport exponents;
  Estimate pairing;
  double lambda_sigma_formula = 0.0;  // log d + lambda_0 + pairing
  double discrepancy = 0.0;           // direct - formula
  double combined_se = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double tol_g = 1e-9;
};

inline BJReport bj_check(const FiberedMap& f, std::size_t n, std::uint64_t seed,
                         double tol_g = 1e-9) {
  require_valid(f);
  BJReport rep;
  rep.n = n;
  rep.seed = seed;
  rep.tol_g = tol_g;
  GreenContext ctx = green_context(f);
  PlaneSample sf = sample_equilibrium(f, n, derive_seed(seed, 1));
  BaseSample st = sample_base(f, n, derive_seed(seed, 2));
  rep.exponents = exponents(f, sf, st);
  rep.pairing = bj_pairing(f, ctx, st, tol_g);
  rep.lambda_sigma_formula =
      std::log(double(f.degree())) + rep.exponents.lambda_0 + rep.pairing.value;
  rep.discrepancy = rep.exponents.lambda_sigma.value - rep.lambda_sigma_formula;
  rep.combined_se = combined_se(rep.exponents.lambda_sigma.se, rep.pairing.se);
  return rep;
}

}  // namespace fibdyn
