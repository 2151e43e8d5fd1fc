#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "fibdyn/errors.hpp"
#include "fibdyn/poly.hpp"

namespace fibdyn {

/// Point of projective space with N homogeneous coordinates, kept normalized
/// so that the first coordinate of maximal modulus equals 1 exactly. This
/// fixes the stored lift uniquely, which keeps sample streams reproducible.
template <int N>
struct ProjPoint {
  std::array<cplx, N> x{};

  ProjPoint() = default;
  explicit ProjPoint(std::array<cplx, N> coords) : x(coords) { normalize(); }

  void normalize() {
    int k = 0;
    double best = std::abs(x[0]);
    for (int i = 1; i < N; ++i) {
      const double a = std::abs(x[i]);
      if (a > best) {
        best = a;
        k = i;
      }
    }
    if (best <= 0.0 || !std::isfinite(best))
      throw DegenerateInput("ProjPoint: zero or non-finite coordinates");
    const cplx pivot = x[k];
    for (auto& c : x) c /= pivot;
    x[k] = cplx(1.0);  // exact
  }

  double norm2sq() const {
    double s = 0.0;
    for (const auto& c : x) s += std::norm(c);
    return s;
  }
};

using Pt1 = ProjPoint<2>;  // point of the base line
using Pt2 = ProjPoint<3>;  // point of the total space

/// Fubini-Study (chordal) distance, ||x ^ y|| / (||x|| ||y||), in [0,1].
template <int N>
double chordal(const ProjPoint<N>& a, const ProjPoint<N>& b) {
  double wedge = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) wedge += std::norm(a.x[i] * b.x[j] - a.x[j] * b.x[i]);
  return std::sqrt(wedge / (a.norm2sq() * b.norm2sq()));
}

inline Pt1 base_of(const Pt2& p) {
  return Pt1(std::array<cplx, 2>{p.x[0], p.x[1]});
}

inline bool at_indeterminacy(const Pt2& p, double eps = 0.0) {
  return std::abs(p.x[0]) <= eps && std::abs(p.x[1]) <= eps;
}

inline Pt2 indeterminacy_point() {
  return Pt2(std::array<cplx, 3>{cplx(0.0), cplx(0.0), cplx(1.0)});
}

}  // namespace fibdyn
