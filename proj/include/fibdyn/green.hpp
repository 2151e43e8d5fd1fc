#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "fibdyn/errors.hpp"
#include "fibdyn/fibered_map.hpp"
#include "fibdyn/projective.hpp"
#include "fibdyn/rng.hpp"

namespace fibdyn {

struct GreenValue {
  double value = 0.0;
  double truncation_bound = 0.0;
  int iterations_used = 0;
  bool finite = true;  // false at the indeterminacy point (value +inf)
};

enum class DefectMethod { sphere_sample, coefficient_bound };

/// Bound M on sup |log ||F(X)||_inf| over the unit inf-sphere. The telescoped
/// escape-rate tail after N renormalized steps is M d^-N / (d-1).
struct EscapeDefect {
  double M = 0.0;
  DefectMethod method = DefectMethod::sphere_sample;
};

namespace detail {

constexpr int kGreenIterCap = 200;
constexpr std::uint64_t kDefectSeed = 0xdefec7ull;

template <int N, class EvalNorm>
double sampled_defect(EvalNorm&& norm_of_image, int samples) {
  Rng rng(kDefectSeed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    std::array<cplx, N> x;
    for (auto& c : x) c = rng.in_disk();
    x[rng.below(N)] = rng.on_circle();  // pins the inf-norm to one
    const double a = norm_of_image(x);
    if (a > 0.0) worst = std::max(worst, std::abs(std::log(a)));
  }
  // sphere normalization is exact only up to round-off; a defect at that
  // level is indistinguishable from zero
  return worst < 1e-13 ? 0.0 : worst;
}

}  // namespace detail

inline EscapeDefect theta_defect(const FiberedMap& f,
                                 DefectMethod method = DefectMethod::sphere_sample,
                                 int samples = 10000) {
  auto norm_im = [&](const std::array<cplx, 2>& y) {
    const auto th = f.theta(y[0], y[1]);
    return std::max(std::abs(th[0]), std::abs(th[1]));
  };
  const double sampled = detail::sampled_defect<2>(norm_im, samples);
  if (method == DefectMethod::sphere_sample) return {2.0 * sampled, method};
  const double up = std::log(std::max(f.theta0().norm1(), f.theta1().norm1()));
  return {std::max(std::max(up, 0.0), 2.0 * sampled), method};
}

inline EscapeDefect full_defect(const FiberedMap& f,
                                DefectMethod method = DefectMethod::sphere_sample,
                                int samples = 10000) {
  auto norm_im = [&](const std::array<cplx, 3>& x) {
    const auto im = f.lift(x[0], x[1], x[2]);
    return std::max({std::abs(im[0]), std::abs(im[1]), std::abs(im[2])});
  };
  const double sampled = detail::sampled_defect<3>(norm_im, samples);
  if (method == DefectMethod::sphere_sample) return {2.0 * sampled, method};
  const double up = std::log(
      std::max({f.theta0().norm1(), f.theta1().norm1(), f.R().norm1()}));
  return {std::max(std::max(up, 0.0), 2.0 * sampled), method};
}

struct GreenContext {
  EscapeDefect theta;
  EscapeDefect full;
};

inline GreenContext green_context(const FiberedMap& f,
                                  DefectMethod method = DefectMethod::sphere_sample,
                                  int samples = 10000) {
  return {theta_defect(f, method, samples), full_defect(f, method, samples)};
}

namespace detail {

/// Renormalized escape-rate iteration shared by the base and full lifts:
/// G(X) = log||X|| + sum d^-(n+1) log||step_n||, stopped when the tail bound
/// M d^-N / (d-1) drops below tol.
template <int N, class Step>
GreenValue green_iterate(std::array<cplx, N> x, int d, double M, double tol,
                         Step&& step) {
  double a = 0.0;
  for (const auto& c : x) a = std::max(a, std::abs(c));
  if (a <= 0.0) throw DegenerateInput("green: zero lift");
  GreenValue g;
  g.value = std::log(a);
  for (auto& c : x) c /= a;

  double scale = 1.0;  // d^-n
  const double dd = double(d);
  int n = 0;
  for (;; ++n) {
    g.truncation_bound = M * scale / (dd - 1.0);
    if (g.truncation_bound <= tol) break;
    if (n >= kGreenIterCap)
      throw ToleranceUnreachable("green: iteration cap before tail bound " +
                                 std::to_string(tol));
    x = step(x);
    a = 0.0;
    for (const auto& c : x) a = std::max(a, std::abs(c));
    if (a <= 0.0 || !std::isfinite(a))
      throw DegenerateInput("green: orbit left the domain");
    scale /= dd;
    g.value += scale * std::log(a);
    for (auto& c : x) c /= a;
  }
  g.iterations_used = n;
  return g;
}

}  // namespace detail

/// Escape rate of the base lift at a point of C^2 (depends on the lift).
inline GreenValue green_theta(const FiberedMap& f, const GreenContext& ctx,
                              std::array<cplx, 2> y, double tol = 1e-9) {
  require_valid(f);
  return detail::green_iterate<2>(
      y, f.degree(), ctx.theta.M, tol, [&](const std::array<cplx, 2>& p) {
        return std::array<cplx, 2>{f.theta0()(p[0], p[1]), f.theta1()(p[0], p[1])};
      });
}

/// Escape rate of the full lift at a point of C^3 (depends on the lift).
inline GreenValue green_full(const FiberedMap& f, const GreenContext& ctx,
                             std::array<cplx, 3> x, double tol = 1e-9) {
  require_valid(f);
  return detail::green_iterate<3>(
      x, f.degree(), ctx.full.M, tol, [&](const std::array<cplx, 3>& p) {
        const auto im = f.lift(p[0], p[1], p[2]);
        return std::array<cplx, 3>{im[0], im[1], im[2]};
      });
}

/// Relative Green function G = G_full - G_theta on matched lifts. Descends to
/// the plane; +infinity exactly at the indeterminacy point.
inline GreenValue relative_green(const FiberedMap& f, const GreenContext& ctx,
                                 const Pt2& x, double tol = 1e-9) {
  if (at_indeterminacy(x)) {
    GreenValue g;
    g.finite = false;
    g.value = std::numeric_limits<double>::infinity();
    return g;
  }
  const GreenValue gf = green_full(f, ctx, {x.x[0], x.x[1], x.x[2]}, tol);
  const GreenValue gt = green_theta(f, ctx, {x.x[0], x.x[1]}, tol);
  GreenValue g;
  g.value = gf.value - gt.value;
  g.truncation_bound = gf.truncation_bound + gt.truncation_bound;
  g.iterations_used = std::max(gf.iterations_used, gt.iterations_used);
  return g;
}

inline GreenValue relative_green(const FiberedMap& f, const Pt2& x,
                                 double tol = 1e-9) {
  return relative_green(f, green_context(f), x, tol);
}

// ---------------------------------------------------------------------------
// Per-fiber Green function along a periodic base cycle, computed by iterating
// the fiber restrictions with per-step renormalization. Independent of the
// three-variable route above, which makes the two cross-checkable.
// ---------------------------------------------------------------------------

struct FiberCycleContext {
  std::vector<FiberAction> actions;   // action i maps fiber i to fiber i+1 mod n
  std::vector<double> log_lambda;
  double m_fiber = 0.0;  // defect of the two-variable fiber iteration
  double m_base = 0.0;   // max |log lambda|
  int d = 2;
};

inline FiberCycleContext fiber_cycle_context(const FiberedMap& f,
                                             const std::vector<Pt1>& cycle,
                                             int defect_samples = 2000) {
  require_valid(f);
  if (cycle.empty()) throw DegenerateInput("fiber cycle: empty");
  FiberCycleContext ctx;
  ctx.d = f.degree();
  const int n = int(cycle.size());
  for (int i = 0; i < n; ++i) {
    const Pt1& next = cycle[(i + 1) % n];
    Fiber fib = make_fiber(cycle[i]);
    FiberAction act = fiber_action(f, fib);
    if (chordal(act.image.base, next) > 1e-9)
      throw DegenerateInput("fiber cycle: points do not close up");
    // land exactly on the stored lift of the next cycle point
    act.image = make_fiber(next);
    const int k = std::abs(act.image.s[0]) >= std::abs(act.image.s[1]) ? 0 : 1;
    const auto th = f.theta(fib.s[0], fib.s[1]);
    act.lambda = th[k] / act.image.s[k];
    ctx.actions.push_back(act);
    const double al = std::abs(act.lambda);
    if (al <= 0.0) throw DegenerateFiber("fiber cycle: vanished base factor");
    ctx.log_lambda.push_back(std::log(al));
    ctx.m_base = std::max(ctx.m_base, std::abs(ctx.log_lambda.back()));

    auto norm_im = [&](const std::array<cplx, 2>& uv) {
      cplx up = act.lambda;
      for (int k2 = 0; k2 < ctx.d; ++k2) up *= uv[0];
      return std::max(std::abs(up), std::abs(act.Rs(uv[0], uv[1])));
    };
    ctx.m_fiber = std::max(
        ctx.m_fiber, 2.0 * detail::sampled_defect<2>(norm_im, defect_samples));
  }
  return ctx;
}

/// Green value of the fiber return map at affine fiber coordinate z
/// (coordinate in the deterministic fiber parameterization of cycle[0]).
/// Equals the relative Green function at the matching point of the plane.
inline GreenValue fiber_green(const FiberCycleContext& ctx, cplx z,
                              double tol = 1e-9) {
  const double dd = double(ctx.d);
  const int n = int(ctx.actions.size());

  GreenValue g;
  double a = std::max(1.0, std::abs(z));
  g.value = std::log(a);
  std::array<cplx, 2> uv{cplx(1.0) / a, z / a};
  double base_part = 0.0;
  double scale = 1.0;
  int m = 0;
  for (;; ++m) {
    g.truncation_bound = (ctx.m_fiber + ctx.m_base) * scale / (dd - 1.0);
    if (g.truncation_bound <= tol) break;
    if (m >= detail::kGreenIterCap)
      throw ToleranceUnreachable("fiber green: iteration cap");
    const FiberAction& act = ctx.actions[m % n];
    cplx up = act.lambda;
    for (int k = 0; k < ctx.d; ++k) up *= uv[0];
    const cplx vp = act.Rs(uv[0], uv[1]);
    a = std::max(std::abs(up), std::abs(vp));
    if (a <= 0.0 || !std::isfinite(a))
      throw DegenerateFiber("fiber green: orbit degenerated");
    scale /= dd;
    g.value += scale * std::log(a);
    base_part += scale * ctx.log_lambda[m % n];
    uv = {up / a, vp / a};
  }
  g.value -= base_part;
  g.iterations_used = m;
  return g;
}

}  // namespace fibdyn
