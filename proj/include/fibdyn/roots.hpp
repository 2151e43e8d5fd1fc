#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fibdyn/errors.hpp"
#include "fibdyn/poly.hpp"
#include "fibdyn/rng.hpp"

namespace fibdyn {

struct RootEntry {
  cplx value{};            // affine value; meaningless when at_infinity
  bool at_infinity = false;
  int multiplicity = 1;
  double residual = 0.0;
};

struct RootSet {
  std::vector<RootEntry> roots;
  int total_multiplicity() const {
    int m = 0;
    for (const auto& r : roots) m += r.multiplicity;
    return m;
  }
};

struct RootOptions {
  double tol = 1e-10;          // scaled residual acceptance
  int max_iter = 160;
  int polish_iter = 40;
  double cluster_factor = 1e-7;
  std::uint64_t jitter_seed = 0xf1bd5eedull;
};

/// One evaluation for the simultaneous iteration: the Newton quotient p/p',
/// the magnitude of p, and a noise floor below which the residual cannot be
/// driven (round-off of the evaluation scheme).
struct NewtonEval {
  cplx newton{};
  double abs_p = 0.0;
  double noise = 0.0;
};

/// Aberth-Ehrlich simultaneous iteration with black-box Newton quotients.
/// Starts on a circle of the given radius with seeded angle jitter. Returns
/// `degree` approximations; convergence is judged by the caller through
/// residuals.
template <class Eval>
std::vector<cplx> aberth_solve(int degree, double radius, Eval&& eval,
                               const RootOptions& opt = {}) {
  std::vector<cplx> z(degree);
  Rng rng(opt.jitter_seed ^ (std::uint64_t(degree) << 32));
  const double r0 = std::max(radius, 1e-6);
  for (int j = 0; j < degree; ++j) {
    const double phi = 2.0 * M_PI * (j + 0.35 + 0.3 * rng.uniform01()) / degree;
    z[j] = cplx(r0 * std::cos(phi), r0 * std::sin(phi));
  }
  std::vector<char> settled(degree, 0);
  for (int it = 0; it < opt.max_iter; ++it) {
    double max_step = 0.0;
    for (int j = 0; j < degree; ++j) {
      if (settled[j]) continue;
      const NewtonEval e = eval(z[j]);
      if (e.abs_p <= 4.0 * e.noise) {
        settled[j] = 1;
        continue;
      }
      cplx s = 0.0;
      for (int l = 0; l < degree; ++l) {
        if (l == j) continue;
        cplx diff = z[j] - z[l];
        if (std::abs(diff) < 1e-280) diff = cplx(1e-280, 0.0);
        s += 1.0 / diff;
      }
      const cplx denom = 1.0 - e.newton * s;
      cplx w = (std::abs(denom) > 1e-280) ? e.newton / denom : e.newton;
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
        w = cplx(0.1 * r0, 0.0);
      // damp wild steps so escaped evaluations walk back in gradually
      const double cap = 0.5 * (std::abs(z[j]) + r0);
      if (std::abs(w) > cap) w *= cap / std::abs(w);
      z[j] -= w;
      max_step = std::max(max_step, std::abs(w) / (1.0 + std::abs(z[j])));
    }
    if (max_step < 1e-14) break;
  }
  return z;
}

/// Newton polish with the same black-box evaluation; keeps the best iterate.
template <class Eval>
cplx newton_polish(cplx z, Eval&& eval, int iters, double* abs_p_out = nullptr) {
  cplx best = z;
  double best_abs = eval(z).abs_p;
  for (int i = 0; i < iters; ++i) {
    const NewtonEval e = eval(z);
    if (!std::isfinite(e.abs_p)) break;
    if (e.abs_p < best_abs) {
      best_abs = e.abs_p;
      best = z;
    }
    if (e.abs_p <= e.noise) break;
    const cplx step = e.newton;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
    z -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) {
      const double a = eval(z).abs_p;
      if (a < best_abs) {
        best_abs = a;
        best = z;
      }
      break;
    }
  }
  if (abs_p_out) *abs_p_out = best_abs;
  return best;
}

namespace detail {

/// Horner with a running round-off bound: |error| <= eps * sum |c_k||z|^k.
struct CoeffEval {
  std::span<const cplx> c;
  NewtonEval operator()(cplx z) const {
    cplx p, dp;
    horner2(c, z, p, dp);
    double bound = 0.0;
    const double az = std::abs(z);
    for (std::size_t k = c.size(); k-- > 0;) bound = bound * az + std::abs(c[k]);
    NewtonEval e;
    e.abs_p = std::abs(p);
    e.noise = 4.0 * std::numeric_limits<double>::epsilon() * bound;
    e.newton = (std::abs(dp) > 1e-290) ? p / dp : p;
    return e;
  }
};

inline double cauchy_radius(std::span<const cplx> c) {
  const double lead = std::abs(c.back());
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) m = std::max(m, std::abs(c[k]));
  return lead > 0.0 ? 1.0 + m / lead : 1.0;
}

/// Merge approximations that sit closer than the cluster radius; the merged
/// root is the centroid, the multiplicity the cluster size.
inline std::vector<RootEntry> cluster_merge(std::vector<cplx> zs, double factor) {
  std::sort(zs.begin(), zs.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  const int n = int(zs.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = factor * std::max(1.0, std::max(std::abs(zs[i]), std::abs(zs[j])));
      if (std::abs(zs[i] - zs[j]) <= r) parent[find(i)] = find(j);
    }
  std::vector<RootEntry> out;
  std::vector<char> used(n, 0);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (used[r]) continue;
    used[r] = 1;
    cplx sum = 0.0;
    int count = 0;
    for (int j = 0; j < n; ++j)
      if (find(j) == r) {
        sum += zs[j];
        ++count;
      }
    out.push_back({sum / double(count), false, count, 0.0});
  }
  std::sort(out.begin(), out.end(), [](const RootEntry& a, const RootEntry& b) {
    return a.value.real() != b.value.real() ? a.value.real() < b.value.real()
                                            : a.value.imag() < b.value.imag();
  });
  return out;
}

}  // namespace detail

/// All roots of a univariate polynomial with multiplicities by cluster
/// merging. Residuals are |p(root)| / (|coeffs|_1 max(1,|root|)^deg).
inline RootSet uni_poly_roots(const UniPoly& p, double tol = 1e-10,
                              const RootOptions& options = {}) {
  const double n1 = p.norm1();
  if (n1 < detail::kZeroEps) throw DegenerateInput("roots: zero polynomial");
  for (cplx a : p.c)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw DegenerateInput("roots: non-finite coefficient");

  // effective degree: drop a numerically vanished leading coefficient
  std::size_t ncoef = p.c.size();
  while (ncoef > 1 && std::abs(p.c[ncoef - 1]) <= 1e-15 * n1) --ncoef;
  const int deg = int(ncoef) - 1;
  if (deg == 0) throw DegenerateInput("roots: degree zero");

  std::span<const cplx> c(p.c.data(), ncoef);
  RootOptions opt = options;
  opt.tol = tol;
  detail::CoeffEval eval{c};

  std::vector<cplx> zs;
  if (deg == 1) {
    zs = {-c[0] / c[1]};
  } else {
    zs = aberth_solve(deg, detail::cauchy_radius(c), eval, opt);
    for (auto& z : zs) z = newton_polish(z, eval, opt.polish_iter);
  }

  RootSet rs;
  rs.roots = detail::cluster_merge(std::move(zs), opt.cluster_factor);
  int bad = 0;
  for (auto& r : rs.roots) {
    const double scale = n1 * std::pow(std::max(1.0, std::abs(r.value)), deg);
    r.residual = std::abs(horner(c, r.value)) / scale;
    if (r.residual > tol) ++bad;
  }
  if (bad > 0)
    throw NonConvergence("roots: " + std::to_string(bad) +
                             " root(s) above residual tolerance",
                         bad);
  return rs;
}

/// Projective roots of a binary form. Vanishing leading coefficients become
/// the root (1:0) with matching multiplicity; the rest are affine in v/u = w
/// chart, i.e. entries are (value:1).
inline RootSet binary_form_roots(const BinaryForm& B, double tol = 1e-10,
                                 const RootOptions& options = {}) {
  const double n1 = B.norm1();
  if (n1 < detail::kZeroEps) throw DegenerateInput("roots: zero binary form");
  int lead_zeros = 0;
  while (lead_zeros <= B.d && std::abs(B.b[lead_zeros]) <= 1e-15 * n1) ++lead_zeros;

  RootSet rs;
  if (lead_zeros > 0) {
    rs.roots.push_back({cplx(0.0), true, lead_zeros, std::abs(B.b[0]) / n1});
  }
  const int deg = B.d - lead_zeros;
  if (deg > 0) {
    // affine chart w = u/v: Q(w) = sum_j b[j] w^(D-j), leading b[lead_zeros]
    std::vector<cplx> q(std::size_t(deg) + 1);
    for (int k = 0; k <= deg; ++k) q[k] = B.b[B.d - k];
    RootSet affine = uni_poly_roots(UniPoly(q), tol, options);
    for (auto& r : affine.roots) rs.roots.push_back(r);
  }
  return rs;
}

// ---------------------------------------------------------------------------
// Fast projective roots for the samplers: exactly d pairs (u,v), multiplicity
// by repetition, inf-norm normalized. Closed forms for d <= 2, Aberth above.
// ---------------------------------------------------------------------------

struct ProjPair {
  cplx u, v;
};

namespace detail {

inline ProjPair norm_pair(cplx u, cplx v) {
  const double au = std::abs(u), av = std::abs(v);
  if (au >= av) return {cplx(1.0), v / u};
  return {u / v, cplx(1.0)};
}

}  // namespace detail

/// Roots of c0 u^2 + c1 uv + c2 v^2 with the numerically stable quadratic
/// formula; writes two pairs (repetition for a double root).
inline void quadratic_proj_roots(cplx c0, cplx c1, cplx c2, ProjPair out[2]) {
  const double scale = std::max({std::abs(c0), std::abs(c1), std::abs(c2)});
  const double eps = 1e-14 * scale;
  if (std::abs(c0) <= eps) {
    if (std::abs(c1) <= eps) {
      out[0] = out[1] = {cplx(1.0), cplx(0.0)};
      return;
    }
    out[0] = {cplx(1.0), cplx(0.0)};
    out[1] = detail::norm_pair(-c2, c1);
    return;
  }
  cplx sq = std::sqrt(c1 * c1 - 4.0 * c0 * c2);
  if (std::real(std::conj(c1) * sq) < 0.0) sq = -sq;
  const cplx qq = -0.5 * (c1 + sq);
  out[0] = detail::norm_pair(qq, c0);
  if (std::abs(c2) == 0.0 && std::abs(qq) == 0.0)
    out[1] = {cplx(0.0), cplx(1.0)};
  else
    out[1] = detail::norm_pair(c2, qq);
}

/// Repetition-style projective roots of a binary form of any degree; appends
/// exactly B.d pairs to `out`.
inline void binary_roots_list(const BinaryForm& B, std::vector<ProjPair>& out,
                              double tol = 1e-8) {
  if (B.d == 0) return;
  if (B.d == 1) {
    out.push_back(detail::norm_pair(-B.b[1], B.b[0]));
    return;
  }
  if (B.d == 2) {
    ProjPair two[2];
    quadratic_proj_roots(B.b[0], B.b[1], B.b[2], two);
    out.push_back(two[0]);
    out.push_back(two[1]);
    return;
  }
  const double n1 = B.norm1();
  if (n1 < detail::kZeroEps) throw DegenerateInput("roots: zero binary form");
  int lead_zeros = 0;
  while (lead_zeros <= B.d && std::abs(B.b[lead_zeros]) <= 1e-15 * n1) ++lead_zeros;
  for (int k = 0; k < lead_zeros; ++k) out.push_back({cplx(1.0), cplx(0.0)});
  const int deg = B.d - lead_zeros;
  if (deg == 0) return;
  std::vector<cplx> q(std::size_t(deg) + 1);
  for (int k = 0; k <= deg; ++k) q[k] = B.b[B.d - k];
  detail::CoeffEval eval{std::span<const cplx>(q)};
  RootOptions opt;
  opt.tol = tol;
  std::vector<cplx> zs = aberth_solve(deg, detail::cauchy_radius(q), eval, opt);
  int bad = 0;
  for (auto& z : zs) {
    double abs_p = 0.0;
    z = newton_polish(z, eval, opt.polish_iter, &abs_p);
    const double scale = n1 * std::pow(std::max(1.0, std::abs(z)), deg);
    if (abs_p / scale > tol) ++bad;
    out.push_back(detail::norm_pair(z, cplx(1.0)));
  }
  if (bad > 0)
    throw NonConvergence("binary roots: " + std::to_string(bad) + " unconverged", bad);
}

}  // namespace fibdyn
