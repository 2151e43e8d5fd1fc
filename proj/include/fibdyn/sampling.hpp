#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fibdyn/fibered_map.hpp"
#include "fibdyn/green.hpp"
#include "fibdyn/projective.hpp"
#include "fibdyn/rng.hpp"
#include "fibdyn/roots.hpp"
#include "fibdyn/stats.hpp"

namespace fibdyn {

constexpr int kDefaultBurnIn = 30;
constexpr int kDefaultChainDepth = 25;

enum class SampleMethod { backward_orbit, periodic_average, fiber_chain };

inline const char* to_string(SampleMethod m) {
  switch (m) {
    case SampleMethod::backward_orbit: return "backward-orbit";
    case SampleMethod::periodic_average: return "periodic-average";
    case SampleMethod::fiber_chain: return "fiber-chain";
  }
  return "?";
}

/// Weighted empirical measure. Reproducible bit for bit from
/// (map, seed, parameters).
template <int N>
struct SampleSet {
  std::vector<ProjPoint<N>> points;
  std::vector<double> weights;
  std::uint64_t seed = 0;
  int burn_in = 0;
  SampleMethod method = SampleMethod::backward_orbit;
  std::vector<std::string> warnings;
};

using BaseSample = SampleSet<2>;
using PlaneSample = SampleSet<3>;

// ---------------------------------------------------------------------------
// Test functions: smooth moments |x_0|^(2a_0) ... / ||x||^(2 sum a), in [0,1].
// ---------------------------------------------------------------------------
template <int N>
struct Moment {
  std::array<int, N> exp{};

  double operator()(const ProjPoint<N>& p) const {
    double tot = 0.0;
    double num = 1.0;
    for (int i = 0; i < N; ++i) {
      tot += exp[i];
      num *= std::pow(std::norm(p.x[i]), exp[i]);
    }
    return num / std::pow(p.norm2sq(), tot);
  }

  std::string name() const {
    std::string s = "phi";
    for (int i = 0; i < N; ++i) s += "_" + std::to_string(exp[i]);
    return s;
  }
};

using TestFunction = Moment<3>;

inline std::vector<Moment<3>> builtin_moments_plane() {
  return {{{1, 0, 0}}, {{0, 1, 0}}, {{0, 0, 1}}, {{1, 1, 0}}, {{1, 0, 1}}, {{0, 1, 1}}};
}

inline std::vector<Moment<2>> builtin_moments_base() {
  return {{{1, 0}}, {{0, 1}}, {{1, 1}}, {{2, 0}}, {{0, 2}}};
}

/// Weighted mean with jackknife standard error over 50 contiguous blocks.
template <int N>
Estimate integrate(const SampleSet<N>& s, const Moment<N>& phi) {
  if (s.points.empty()) throw DegenerateInput("integrate: empty sample");
  std::vector<double> vals(s.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) vals[i] = phi(s.points[i]);
  return jackknife_mean(vals, s.weights);
}

inline BaseSample pushforward(const PlaneSample& s) {
  BaseSample out;
  out.seed = s.seed;
  out.burn_in = s.burn_in;
  out.method = s.method;
  out.weights = s.weights;
  out.points.reserve(s.points.size());
  for (const auto& p : s.points) out.points.push_back(base_of(p));
  return out;
}

/// Concatenate two sample sets; uniform inputs of any sizes stay uniform.
template <int N>
SampleSet<N> merge(const SampleSet<N>& a, const SampleSet<N>& b) {
  SampleSet<N> out = a;
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  const double na = double(a.points.size()), nb = double(b.points.size());
  for (auto& w : out.weights) w *= na / (na + nb);
  for (double w : b.weights) out.weights.push_back(w * nb / (na + nb));
  double tot = pairwise_sum(out.weights);
  for (auto& w : out.weights) w /= tot;
  for (const auto& w : b.warnings) out.warnings.push_back(w);
  return out;
}

// ---------------------------------------------------------------------------
// Backward-orbit samplers
// ---------------------------------------------------------------------------

inline BaseSample sample_base(const FiberedMap& f, std::size_t n, std::uint64_t seed,
                              int burn_in = kDefaultBurnIn) {
  require_valid(f);
  BaseSample s;
  s.seed = seed;
  s.burn_in = burn_in;
  s.method = SampleMethod::backward_orbit;
  Rng rng(derive_seed(seed, 0x6a5e));
  Pt1 a({rng.gaussian(), rng.gaussian()});
  for (int i = 0; i < burn_in; ++i) a = random_base_preimage(f, a, rng);
  s.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    a = random_base_preimage(f, a, rng);
    s.points.push_back(a);
  }
  s.weights.assign(n, 1.0 / double(n));
  return s;
}

inline PlaneSample sample_equilibrium(const FiberedMap& f, std::size_t n,
                                      std::uint64_t seed,
                                      int burn_in = kDefaultBurnIn) {
  require_valid(f);
  PlaneSample s;
  s.seed = seed;
  s.burn_in = burn_in;
  s.method = SampleMethod::backward_orbit;
  Rng rng(derive_seed(seed, 0xe91b));
  Pt2 x({rng.gaussian(), rng.gaussian(), rng.gaussian()});
  for (int i = 0; i < burn_in; ++i) x = random_preimage(f, x, rng);
  s.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    x = random_preimage(f, x, rng);
    s.points.push_back(x);
  }
  s.weights.assign(n, 1.0 / double(n));
  return s;
}

// ---------------------------------------------------------------------------
// Fiber measures: pull a generic point back along the chain of fibers
// over a, theta(a), ..., theta^depth(a), choosing roots uniformly.
// ---------------------------------------------------------------------------

inline PlaneSample sample_fiber_measure(const FiberedMap& f, Pt1 a, std::size_t n,
                                        std::uint64_t seed,
                                        int depth = kDefaultChainDepth) {
  require_valid(f);
  PlaneSample s;
  s.seed = seed;
  s.burn_in = depth;
  s.method = SampleMethod::fiber_chain;
  Rng rng(derive_seed(seed, 0xf1be));

  // keep away from the base critical points; the slice there is not defined
  // by the same formula, so perturb and record it
  RootSet crit = binary_form_roots(f.crit_theta(), 1e-8);
  for (const auto& r : crit.roots) {
    Pt1 c = r.at_infinity ? Pt1({cplx(1.0), cplx(0.0)}) : Pt1({r.value, cplx(1.0)});
    if (chordal(a, c) < 1e-6) {
      a = Pt1({a.x[0] + 1e-5 * rng.on_circle(), a.x[1] + 1e-5 * rng.on_circle()});
      s.warnings.push_back("base point perturbed away from a critical point of the base");
      break;
    }
  }

  const int d = f.degree();
  std::vector<FiberAction> acts;
  acts.reserve(depth);
  Fiber fib = make_fiber(a);
  for (int i = 0; i < depth; ++i) {
    acts.push_back(fiber_action(f, fib));
    fib = acts.back().image;
  }

  std::vector<cplx> phi(std::size_t(d) + 1);
  std::vector<ProjPair> roots;
  s.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    // generic start in the top fiber
    cplx u = 1.0, v = rng.on_circle(2.0 + 2.0 * rng.uniform01());
    for (int i = depth; i-- > 0;) {
      const FiberAction& act = acts[i];
      // solutions of (lambda u^d : Rs(u,v)) ~ (u', v')
      phi[0] = v * act.lambda - u * act.Rs.b[0];
      for (int l = 1; l <= d; ++l) phi[l] = -u * act.Rs.b[l];
      if (d == 2) {
        ProjPair two[2];
        quadratic_proj_roots(phi[0], phi[1], phi[2], two);
        const ProjPair& pick = two[rng.below(2)];
        u = pick.u;
        v = pick.v;
      } else {
        BinaryForm form(d, phi);
        if (form.is_zero(1e-14 * (std::abs(u) + std::abs(v)) * (1.0 + act.Rs.norm1())))
          throw DegenerateFiber("fiber chain: pull-back form vanished");
        roots.clear();
        binary_roots_list(form, roots);
        const ProjPair& pick = roots[rng.below(roots.size())];
        u = pick.u;
        v = pick.v;
      }
    }
    s.points.push_back(acts[0].source.at(u, v));
  }
  s.weights.assign(n, 1.0 / double(n));
  return s;
}

// ---------------------------------------------------------------------------
// Periodic points of the base (polynomial bases, i.e. maps with the affine
// skew view). Roots of p^n(t) - t: the expanded composition only informs the
// starting radius; every evaluation inside the solver runs through iterated
// Horner with the chain rule, which stays stable at degrees where the
// expanded coefficients are useless.
// ---------------------------------------------------------------------------

struct PeriodicCycle {
  std::vector<Pt1> points;        // orbit order
  std::vector<int> multiplicity;  // per point
  int exact_period() const { return int(points.size()); }
  int total_multiplicity() const {
    int m = 0;
    for (int x : multiplicity) m += x;
    return m;
  }
};

struct PeriodicSet {
  int n = 1;
  std::vector<PeriodicCycle> cycles;
  int total_with_multiplicity() const {
    int m = 0;
    for (const auto& c : cycles) m += c.total_multiplicity();
    return m;
  }
};

namespace detail {

/// Newton data for phi(t) = p^n(t) - t through iterated evaluation. When an
/// orbit escapes past the overflow guard, the Newton quotient of the
/// remaining composition is w/D damped by d^-(remaining); the quotient is
/// tracked incrementally so it never overflows.
struct IteratedFixedPointEval {
  const UniPoly* p;
  int n;

  NewtonEval operator()(cplx t) const {
    const int d = p->degree();
    cplx w = t, dw = 1.0;
    for (int i = 0; i < n; ++i) {
      cplx pw, dpw;
      horner2(std::span<const cplx>(p->c), w, pw, dpw);
      if (std::abs(pw) > 1e80) {
        NewtonEval e;
        const cplx eta = pw / (dw * dpw);
        e.newton = eta * std::pow(double(d), -(double(n) - 1.0 - i));
        e.abs_p = std::numeric_limits<double>::infinity();
        e.noise = 0.0;
        return e;
      }
      dw *= dpw;
      w = pw;
    }
    NewtonEval e;
    const cplx phi = w - t;
    const cplx dphi = dw - 1.0;
    e.abs_p = std::abs(phi);
    e.noise = 64.0 * n * std::numeric_limits<double>::epsilon() *
              (1.0 + std::abs(w) + std::abs(t));
    e.newton = (std::abs(dphi) > 1e-290) ? phi / dphi : phi;
    return e;
  }
};

inline double escape_radius(const UniPoly& p) {
  const int d = p.degree();
  double lower = 0.0;
  for (int k = 0; k < d; ++k) lower += std::abs(p.c[k]);
  return std::max(1.0, std::pow((2.0 + lower) / std::abs(p.lead()), 1.0 / (d - 1)));
}

}  // namespace detail

inline PeriodicSet periodic_base_points(const FiberedMap& f, int n, double tol = 1e-8) {
  require_valid(f);
  if (!f.affine())
    throw DegenerateInput("periodic base points need the affine polynomial view");
  const UniPoly& p = f.affine()->p;
  const int d = f.degree();
  double deg_n = std::pow(double(d), n);
  if (deg_n > detail::kDefaultDegreeCap)
    throw DegreeCapExceeded("periodic base points: d^n exceeds the degree cap");
  const int dn = int(deg_n + 0.5);

  // starting radius: Cauchy bound of the expanded composition when its
  // coefficients are representable, the escape radius otherwise
  double radius = detail::escape_radius(p);
  try {
    UniPoly iter = p;
    for (int i = 1; i < n; ++i) iter = compose(p, iter);
    iter.c[1] -= 1.0;  // p^n(t) - t
    radius = std::min(radius, detail::cauchy_radius(std::span<const cplx>(iter.c)));
  } catch (const DegenerateInput&) {
  } catch (const DegreeCapExceeded&) {
  }

  detail::IteratedFixedPointEval eval{&p, n};
  RootOptions opt;
  opt.max_iter = 400;
  std::vector<cplx> zs = aberth_solve(dn, radius, eval, opt);
  for (auto& z : zs) z = newton_polish(z, eval, 60);

  std::vector<RootEntry> merged = detail::cluster_merge(std::move(zs), opt.cluster_factor);
  int bad = 0;
  for (auto& r : merged) {
    const double res = eval(r.value).abs_p / std::max(1.0, std::abs(r.value));
    r.residual = res;
    if (!(res <= tol)) ++bad;
  }
  if (bad > 0)
    throw NonConvergence("periodic base points: " + std::to_string(bad) +
                             " unpolished root(s)",
                         bad);

  // point list including the superattracting point at infinity
  std::vector<Pt1> pts;
  std::vector<int> mult;
  for (const auto& r : merged) {
    pts.push_back(Pt1({r.value, cplx(1.0)}));
    mult.push_back(r.multiplicity);
  }
  pts.push_back(Pt1({cplx(1.0), cplx(0.0)}));
  mult.push_back(1);

  // orbit decomposition by nearest-match of theta
  const int m = int(pts.size());
  std::vector<char> used(m, 0);
  PeriodicSet ps;
  ps.n = n;
  for (int i = 0; i < m; ++i) {
    if (used[i]) continue;
    PeriodicCycle cyc;
    int cur = i;
    for (int step = 0; step < n; ++step) {
      used[cur] = 1;
      cyc.points.push_back(pts[cur]);
      cyc.multiplicity.push_back(mult[cur]);
      const Pt1 im = apply_base(f, pts[cur]);
      int best = -1;
      double bd = 1e9;
      for (int j = 0; j < m; ++j) {
        const double dist = chordal(im, pts[j]);
        if (dist < bd) {
          bd = dist;
          best = j;
        }
      }
      if (best == i) break;
      cur = best;
      if (used[cur]) break;  // defensive: merged orbits
    }
    ps.cycles.push_back(std::move(cyc));
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Direct-vs-nested decomposition check
// ---------------------------------------------------------------------------

/// Nested integral: outer average over base samples of the fiber-measure
/// average of phi. The standard error is jackknifed over the outer sample.
inline Estimate nested_integral(const FiberedMap& f, const Moment<3>& phi,
                                const BaseSample& outer, std::size_t inner_n,
                                std::uint64_t seed,
                                int depth = kDefaultChainDepth) {
  std::vector<double> inner_means(outer.points.size());
  for (std::size_t j = 0; j < outer.points.size(); ++j) {
    PlaneSample fs =
        sample_fiber_measure(f, outer.points[j], inner_n, derive_seed(seed, j), depth);
    double acc = 0.0;
    for (const auto& p : fs.points) acc += phi(p);
    inner_means[j] = acc / double(fs.points.size());
  }
  return jackknife_mean(inner_means, outer.weights);
}

}  // namespace fibdyn
