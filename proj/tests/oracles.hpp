#pragma once

// Test-side oracles. These deliberately avoid the library's Green/escape
// machinery so the values they produce are independent checks.

#include <cmath>
#include <complex>
#include <set>
#include <vector>

#include "fibdyn/poly.hpp"

namespace oracles {

using fibdyn::cplx;
using fibdyn::UniPoly;

/// Monic polynomial with the given roots, expanded term by term.
inline UniPoly expand_from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> c{cplx(1.0)};
  for (cplx r : roots) {
    std::vector<cplx> next(c.size() + 1, cplx(0.0));
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return UniPoly(c);
}

/// Escape-rate Green function of a one-variable polynomial,
/// G(z) = lim d^-n log+ |p^n(z)|, by plain forward iteration.
inline double green1d(const UniPoly& p, cplx z, int cap = 2000) {
  const int d = p.degree();
  const double lead = std::abs(p.lead());
  // radius beyond which |p(w)| >= 2|w|
  double lower = 0.0;
  for (int k = 0; k < d; ++k) lower += std::abs(p.c[k]);
  const double resc = std::max(1.0, std::pow((2.0 + lower) / lead, 1.0 / (d - 1)));

  cplx w = z;
  double scale = 1.0;  // running d^-m
  for (int m = 0; m < cap; ++m) {
    const double aw = std::abs(w);
    if (aw > 1e60) {
      // G(w) = log|w| + log|lead|/(d-1) + O(1/|w|)
      return scale * (std::log(aw) + std::log(lead) / (d - 1));
    }
    w = p(w);
    scale /= d;
  }
  (void)resc;
  return 0.0;  // orbit stayed bounded to the cap
}

/// Finite period-n points of t^2 - 2 through the angle parameterization
/// t = 2 cos(2 pi k / (2^n -+ 1)).
inline std::vector<double> cheb_periodic_points(int n) {
  std::set<long long> seen;  // dedupe on a fixed-precision key
  std::vector<double> out;
  auto push = [&](double t) {
    const long long key = llround(t * 1e12);
    if (seen.insert(key).second) out.push_back(t);
  };
  const long long a = (1ll << n) - 1, b = (1ll << n) + 1;
  for (long long k = 0; k <= a / 2; ++k) push(2.0 * std::cos(2.0 * M_PI * k / a));
  for (long long k = 0; k <= b / 2; ++k) push(2.0 * std::cos(2.0 * M_PI * k / b));
  return out;
}

}  // namespace oracles
