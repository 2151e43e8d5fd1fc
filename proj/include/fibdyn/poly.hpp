#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fibdyn/errors.hpp"

namespace fibdyn {

using cplx = std::complex<double>;

inline double abs1(cplx z) { return std::abs(z.real()) + std::abs(z.imag()); }

namespace detail {
constexpr int kDefaultDegreeCap = 4096;
constexpr double kZeroEps = 1e-300;
}  // namespace detail

/// Horner evaluation of sum c[k] t^k.
inline cplx horner(std::span<const cplx> c, cplx t) {
  cplx acc = c.empty() ? cplx(0.0) : c.back();
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * t + c[k - 1];
  return acc;
}

/// Horner evaluation of value and derivative together.
inline void horner2(std::span<const cplx> c, cplx t, cplx& p, cplx& dp) {
  p = c.empty() ? cplx(0.0) : c.back();
  dp = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    dp = dp * t + p;
    p = p * t + c[k - 1];
  }
}

// ---------------------------------------------------------------------------
// Univariate polynomials. The coefficient vector is never empty and the
// declared degree is size-1; an identically zero polynomial is the single
// coefficient 0.
// ---------------------------------------------------------------------------
struct UniPoly {
  std::vector<cplx> c{cplx(0.0)};

  UniPoly() = default;
  explicit UniPoly(std::vector<cplx> coeffs) : c(std::move(coeffs)) {
    if (c.empty()) c = {cplx(0.0)};
  }

  static UniPoly zero() { return UniPoly(); }
  static UniPoly constant(cplx a) { return UniPoly({a}); }

  int degree() const { return int(c.size()) - 1; }
  cplx lead() const { return c.back(); }

  bool is_zero(double eps = detail::kZeroEps) const {
    for (cplx a : c)
      if (std::abs(a) > eps) return false;
    return true;
  }

  double norm1() const {
    double s = 0.0;
    for (cplx a : c) s += std::abs(a);
    return s;
  }

  cplx operator()(cplx t) const { return horner(c, t); }

  UniPoly derivative() const {
    if (degree() == 0) return zero();
    std::vector<cplx> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = double(k) * c[k];
    return UniPoly(std::move(d));
  }
};

inline UniPoly operator+(const UniPoly& a, const UniPoly& b) {
  std::vector<cplx> c(std::max(a.c.size(), b.c.size()), cplx(0.0));
  for (std::size_t k = 0; k < a.c.size(); ++k) c[k] += a.c[k];
  for (std::size_t k = 0; k < b.c.size(); ++k) c[k] += b.c[k];
  return UniPoly(std::move(c));
}

inline UniPoly operator*(const UniPoly& a, const UniPoly& b) {
  std::vector<cplx> c(a.c.size() + b.c.size() - 1, cplx(0.0));
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) c[i + j] += a.c[i] * b.c[j];
  return UniPoly(std::move(c));
}

inline UniPoly operator*(cplx s, const UniPoly& a) {
  UniPoly r = a;
  for (auto& x : r.c) x *= s;
  return r;
}

/// outer(inner), rejected if the product degree exceeds the cap.
inline UniPoly compose(const UniPoly& outer, const UniPoly& inner,
                       int degree_cap = detail::kDefaultDegreeCap) {
  const long long dprod = 1ll * outer.degree() * inner.degree();
  if (dprod > degree_cap)
    throw DegreeCapExceeded("compose: degree " + std::to_string(dprod) +
                            " exceeds cap " + std::to_string(degree_cap));
  UniPoly acc = UniPoly::constant(outer.c.back());
  for (std::size_t k = outer.c.size(); k-- > 1;) {
    acc = acc * inner;
    acc.c[0] += outer.c[k - 1];
  }
  for (cplx a : acc.c)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw DegenerateInput("compose: coefficient overflow");
  return acc;
}

// ---------------------------------------------------------------------------
// Binary forms of degree D: sum_j b[j] u^(D-j) v^j. Degree 0 (a constant)
// is allowed; it shows up as the top z-layer of a ternary form.
// ---------------------------------------------------------------------------
struct BinaryForm {
  int d = 0;
  std::vector<cplx> b{cplx(0.0)};

  BinaryForm() = default;
  BinaryForm(int degree, std::vector<cplx> coeffs) : d(degree), b(std::move(coeffs)) {
    if (int(b.size()) != d + 1) throw DegenerateInput("BinaryForm: coefficient count");
  }

  bool is_zero(double eps = detail::kZeroEps) const {
    for (cplx a : b)
      if (std::abs(a) > eps) return false;
    return true;
  }

  double norm1() const {
    double s = 0.0;
    for (cplx a : b) s += std::abs(a);
    return s;
  }

  /// Evaluation branches on the larger coordinate so the Horner chart is
  /// always well conditioned.
  cplx operator()(cplx u, cplx v) const {
    if (std::abs(u) >= std::abs(v)) {
      const cplx w = (std::abs(u) > 0.0) ? v / u : cplx(0.0);
      cplx acc = b[d];
      for (int j = d; j-- > 0;) acc = acc * w + b[j];
      // multiply by u^d
      cplx p = 1.0;
      for (int k = 0; k < d; ++k) p *= u;
      return acc * p;
    }
    const cplx w = u / v;
    cplx acc = b[0];
    for (int j = 1; j <= d; ++j) acc = acc * w + b[j];
    cplx p = 1.0;
    for (int k = 0; k < d; ++k) p *= v;
    return acc * p;
  }

  /// Partial derivative: var 0 is the first coordinate, var 1 the second.
  BinaryForm derivative(int var) const {
    if (d == 0) return BinaryForm(0, {cplx(0.0)});
    std::vector<cplx> r(std::size_t(d), cplx(0.0));
    if (var == 0) {
      for (int j = 0; j < d; ++j) r[j] = double(d - j) * b[j];
    } else {
      for (int j = 1; j <= d; ++j) r[j - 1] = double(j) * b[j];
    }
    return BinaryForm(d - 1, std::move(r));
  }
};

inline BinaryForm operator*(const BinaryForm& a, const BinaryForm& b) {
  std::vector<cplx> c(std::size_t(a.d + b.d) + 1, cplx(0.0));
  for (int i = 0; i <= a.d; ++i)
    for (int j = 0; j <= b.d; ++j) c[i + j] += a.b[i] * b.b[j];
  return BinaryForm(a.d + b.d, std::move(c));
}

inline BinaryForm operator+(const BinaryForm& a, const BinaryForm& b) {
  if (a.d != b.d) throw DegenerateInput("BinaryForm add: degree mismatch");
  BinaryForm r = a;
  for (int j = 0; j <= a.d; ++j) r.b[j] += b.b[j];
  return r;
}

inline BinaryForm operator*(cplx s, const BinaryForm& a) {
  BinaryForm r = a;
  for (auto& x : r.b) x *= s;
  return r;
}

/// outer(g0, g1) for binary forms g0, g1 of equal degree.
inline BinaryForm compose_binary(const BinaryForm& outer, const BinaryForm& g0,
                                 const BinaryForm& g1) {
  if (g0.d != g1.d) throw DegenerateInput("compose_binary: degree mismatch");
  // power tables g0^i, g1^j
  std::vector<BinaryForm> p0(outer.d + 1), p1(outer.d + 1);
  p0[0] = p1[0] = BinaryForm(0, {cplx(1.0)});
  for (int k = 1; k <= outer.d; ++k) {
    p0[k] = p0[k - 1] * g0;
    p1[k] = p1[k - 1] * g1;
  }
  BinaryForm acc(outer.d * g0.d, std::vector<cplx>(std::size_t(outer.d * g0.d) + 1, cplx(0.0)));
  for (int j = 0; j <= outer.d; ++j)
    acc = acc + outer.b[j] * (p0[outer.d - j] * p1[j]);
  return acc;
}

/// Resultant of two binary forms via the Sylvester determinant
/// (complex Gaussian elimination with partial pivoting).
inline cplx resultant(const BinaryForm& f, const BinaryForm& g) {
  const int m = f.d, n = g.d;
  const int size = m + n;
  if (size == 0) return cplx(1.0);
  std::vector<cplx> a(std::size_t(size) * size, cplx(0.0));
  auto at = [&](int i, int j) -> cplx& { return a[std::size_t(i) * size + j]; };
  for (int r = 0; r < n; ++r)
    for (int j = 0; j <= m; ++j) at(r, r + j) = f.b[j];
  for (int r = 0; r < m; ++r)
    for (int j = 0; j <= n; ++j) at(n + r, r + j) = g.b[j];

  cplx det = 1.0;
  for (int col = 0; col < size; ++col) {
    int piv = col;
    for (int r = col + 1; r < size; ++r)
      if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
    if (std::abs(at(piv, col)) == 0.0) return cplx(0.0);
    if (piv != col) {
      for (int j = col; j < size; ++j) std::swap(at(piv, j), at(col, j));
      det = -det;
    }
    det *= at(col, col);
    for (int r = col + 1; r < size; ++r) {
      const cplx factor = at(r, col) / at(col, col);
      for (int j = col; j < size; ++j) at(r, j) -= factor * at(col, j);
    }
  }
  return det;
}

// ---------------------------------------------------------------------------
// Ternary forms of degree D, stored by z-power: layer[l] is the binary form
// of degree D-l multiplying z^l. This matches how the forms are consumed
// (restriction to a fiber is a coefficient-wise evaluation of the layers).
// ---------------------------------------------------------------------------
struct TernaryForm {
  int d = 0;
  std::vector<BinaryForm> layer;  // layer[l] has degree d-l

  TernaryForm() : layer{BinaryForm(0, {cplx(0.0)})} {}
  TernaryForm(int degree, std::vector<BinaryForm> layers)
      : d(degree), layer(std::move(layers)) {
    if (int(layer.size()) != d + 1) throw DegenerateInput("TernaryForm: layer count");
    for (int l = 0; l <= d; ++l)
      if (layer[l].d != d - l) throw DegenerateInput("TernaryForm: layer degree");
  }

  static TernaryForm zeros(int degree) {
    std::vector<BinaryForm> ls;
    ls.reserve(degree + 1);
    for (int l = 0; l <= degree; ++l)
      ls.emplace_back(degree - l, std::vector<cplx>(std::size_t(degree - l) + 1, cplx(0.0)));
    return TernaryForm(degree, std::move(ls));
  }

  /// Coefficient of y0^i y1^j z^l with i+j+l = d.
  cplx coeff(int i, int j, int l) const { return layer[l].b[j]; }
  void set_coeff(int i, int j, int l, cplx value) {
    if (i + j + l != d) throw DegenerateInput("TernaryForm: exponents must sum to degree");
    layer[l].b[j] = value;
  }

  cplx z_lead() const { return layer[d].b[0]; }

  double norm1() const {
    double s = 0.0;
    for (const auto& L : layer) s += L.norm1();
    return s;
  }

  cplx operator()(cplx y0, cplx y1, cplx z) const {
    cplx acc = layer[d](cplx(1.0), cplx(1.0));  // degree-0 layer
    for (int l = d; l-- > 0;) acc = acc * z + layer[l](y0, y1);
    return acc;
  }

  /// d/dz, one degree lower.
  TernaryForm dz() const {
    if (d == 0) return TernaryForm();
    std::vector<BinaryForm> ls;
    ls.reserve(d);
    for (int l = 1; l <= d; ++l) ls.push_back(double(l) * layer[l]);
    return TernaryForm(d - 1, std::move(ls));
  }

  /// d/dy0 or d/dy1.
  TernaryForm dy(int var) const {
    if (d == 0) return TernaryForm();
    std::vector<BinaryForm> ls;
    ls.reserve(d);
    for (int l = 0; l < d; ++l) ls.push_back(layer[l].derivative(var));
    return TernaryForm(d - 1, std::move(ls));
  }
};

}  // namespace fibdyn
