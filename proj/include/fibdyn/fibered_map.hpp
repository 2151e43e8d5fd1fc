#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fibdyn/errors.hpp"
#include "fibdyn/poly.hpp"
#include "fibdyn/projective.hpp"
#include "fibdyn/rng.hpp"
#include "fibdyn/roots.hpp"

namespace fibdyn {

struct ValidationCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::string first_failure() const {
    for (const auto& c : checks)
      if (!c.pass) return c.name;
    return {};
  }
};

/// Affine skew-product view (t, z) -> (p(t), q(t, z)), with q stored by
/// z-power: q(t,z) = sum_j q_z[j](t) z^j.
struct AffineView {
  UniPoly p;
  std::vector<UniPoly> q_z;
};

// ---------------------------------------------------------------------------
// A degree-d endomorphism of the projective plane preserving the pencil of
// lines through [0:0:1], given by the homogeneous lift
//   F(y0, y1, z) = (Theta0(y), Theta1(y), R(y, z)).
// Immutable; the validity report is computed at construction.
// ---------------------------------------------------------------------------
class FiberedMap {
 public:
  FiberedMap(BinaryForm theta0, BinaryForm theta1, TernaryForm R,
             std::optional<AffineView> affine = std::nullopt)
      : d_(R.d),
        theta0_(std::move(theta0)),
        theta1_(std::move(theta1)),
        R_(std::move(R)),
        affine_(std::move(affine)) {
    if (theta0_.d != d_ || theta1_.d != d_)
      throw DegenerateInput("FiberedMap: component degrees differ");
    if (d_ < 2) throw DegenerateInput("FiberedMap: degree must be >= 2");
    dth_[0] = theta0_.derivative(0);
    dth_[1] = theta0_.derivative(1);
    dth_[2] = theta1_.derivative(0);
    dth_[3] = theta1_.derivative(1);
    c_sigma_ = R_.dz();
    crit_theta_ = dth_[0] * dth_[3] + cplx(-1.0) * (dth_[1] * dth_[2]);
    run_validation();
  }

  /// Build from the affine skew view; the homogeneous lift is derived.
  static FiberedMap from_affine(const UniPoly& p, std::vector<UniPoly> q_z) {
    const int d = int(q_z.size()) - 1;
    if (d < 2) throw DegenerateInput("from_affine: fiber degree must be >= 2");
    if (p.degree() != d)
      throw DegenerateInput("from_affine: base degree must equal fiber degree");
    std::vector<cplx> t0(d + 1, cplx(0.0)), t1(d + 1, cplx(0.0));
    for (int j = 0; j <= d; ++j) t0[j] = p.c[d - j];
    t1[d] = 1.0;
    TernaryForm R = TernaryForm::zeros(d);
    for (int l = 0; l <= d; ++l) {
      if (q_z[l].degree() > d - l)
        throw DegenerateInput("from_affine: joint degree of q exceeds map degree");
      for (int i = 0; i <= q_z[l].degree(); ++i)
        R.set_coeff(i, d - l - i, l, q_z[l].c[i]);
    }
    return FiberedMap(BinaryForm(d, t0), BinaryForm(d, t1), R,
                      AffineView{p, std::move(q_z)});
  }

  int degree() const { return d_; }
  const BinaryForm& theta0() const { return theta0_; }
  const BinaryForm& theta1() const { return theta1_; }
  const TernaryForm& R() const { return R_; }
  const std::optional<AffineView>& affine() const { return affine_; }
  const ValidationReport& validation() const { return report_; }
  bool valid() const { return report_.passed(); }

  /// Sectional critical form dR/dz (degree d-1).
  const TernaryForm& c_sigma() const { return c_sigma_; }
  /// Jacobian determinant of the base lift, degree 2d-2; its zero set is the
  /// critical locus of the base map.
  const BinaryForm& crit_theta() const { return crit_theta_; }

  std::array<cplx, 2> theta(cplx y0, cplx y1) const {
    return {theta0_(y0, y1), theta1_(y0, y1)};
  }
  cplx det_dtheta(cplx y0, cplx y1) const {
    return dth_[0](y0, y1) * dth_[3](y0, y1) - dth_[1](y0, y1) * dth_[2](y0, y1);
  }

  std::array<cplx, 3> lift(cplx y0, cplx y1, cplx z) const {
    return {theta0_(y0, y1), theta1_(y0, y1), R_(y0, y1, z)};
  }

 private:
  void run_validation() {
    const double n0 = theta0_.norm1(), n1 = theta1_.norm1();
    const double res = std::abs(resultant(theta0_, theta1_));
    const double res_thresh = 1e-12 * std::pow(n0, d_) * std::pow(n1, d_);
    report_.checks.push_back({"base_resultant", res, res_thresh, res > res_thresh});

    const double lead = std::abs(R_.z_lead());
    const double lead_thresh = 1e-12 * R_.norm1();
    report_.checks.push_back({"fiber_z_lead", lead, lead_thresh, lead > lead_thresh});

    if (affine_) {
      // the homogenization used at construction must reproduce (Theta, R)
      double diff = 0.0;
      for (int j = 0; j <= d_; ++j)
        diff = std::max(diff, std::abs(theta0_.b[j] - affine_->p.c[d_ - j]));
      const double scale = 1e-12 * (1.0 + theta0_.norm1() + R_.norm1());
      report_.checks.push_back({"affine_consistency", diff, scale, diff <= scale});
    }
  }

  int d_;
  BinaryForm theta0_, theta1_;
  TernaryForm R_;
  std::optional<AffineView> affine_;
  std::array<BinaryForm, 4> dth_;
  TernaryForm c_sigma_;
  BinaryForm crit_theta_;
  ValidationReport report_;
};

inline void require_valid(const FiberedMap& f) {
  if (!f.valid())
    throw DegenerateInput("map failed validation: " + f.validation().first_failure());
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

inline Pt2 apply(const FiberedMap& f, const Pt2& x) {
  const auto im = f.lift(x.x[0], x.x[1], x.x[2]);
  return Pt2(std::array<cplx, 3>{im[0], im[1], im[2]});
}

inline Pt1 apply_base(const FiberedMap& f, const Pt1& a) {
  const auto im = f.theta(a.x[0], a.x[1]);
  return Pt1(std::array<cplx, 2>{im[0], im[1]});
}

/// Affine chart convenience: (t, z) -> (t', z') through the homogeneous lift.
inline std::array<cplx, 2> apply_affine(const FiberedMap& f, cplx t, cplx z) {
  const auto im = f.lift(t, cplx(1.0), z);
  if (std::abs(im[1]) <= 0.0) throw DegenerateInput("apply_affine: image at infinity");
  return {im[0] / im[1], im[2] / im[1]};
}

// ---------------------------------------------------------------------------
// Fibers of the pencil
// ---------------------------------------------------------------------------

/// A line of the pencil with a deterministic lift: inf-norm one and the first
/// nonzero coordinate real positive. Parameterized by (u:v) -> [u s : v].
struct Fiber {
  Pt1 base;
  std::array<cplx, 2> s{};

  Pt2 at(cplx u, cplx v) const {
    return Pt2(std::array<cplx, 3>{u * s[0], u * s[1], v});
  }

  /// Affine fiber coordinate v/u of a point on (or numerically near) the line.
  cplx coordinate(const Pt2& p) const {
    const int k = std::abs(s[0]) >= std::abs(s[1]) ? 0 : 1;
    const cplx u = p.x[k] / s[k];
    if (std::abs(u) <= 0.0) throw DegenerateInput("fiber coordinate at infinity");
    return p.x[2] / u;
  }
};

inline Fiber make_fiber(const Pt1& a) {
  Fiber f;
  f.base = a;
  f.s = {a.x[0], a.x[1]};
  const int k = std::abs(f.s[0]) > 0.0 ? 0 : 1;
  const cplx ph = f.s[k] / std::abs(f.s[k]);
  f.s[0] /= ph;
  f.s[1] /= ph;
  return f;
}

/// The action of the map on a fiber in fiber coordinates:
/// (u:v) -> (lambda u^d : Rs(u,v)), landing on the fiber over theta(base).
struct FiberAction {
  Fiber source;
  Fiber image;
  cplx lambda{};
  BinaryForm Rs;  // degree d, v^d coefficient = z^d coefficient of R
};

inline FiberAction fiber_action(const FiberedMap& f, const Fiber& fib) {
  FiberAction act;
  act.source = fib;
  const auto th = f.theta(fib.s[0], fib.s[1]);
  act.image = make_fiber(Pt1(std::array<cplx, 2>{th[0], th[1]}));
  const int k = std::abs(act.image.s[0]) >= std::abs(act.image.s[1]) ? 0 : 1;
  act.lambda = th[k] / act.image.s[k];
  std::vector<cplx> coef(std::size_t(f.degree()) + 1);
  for (int l = 0; l <= f.degree(); ++l)
    coef[l] = f.R().layer[l](fib.s[0], fib.s[1]);
  act.Rs = BinaryForm(f.degree(), std::move(coef));
  return act;
}

/// Restriction of the sectional critical form to a fiber: the binary form
/// (dR/dz)(u s, v), degree d-1, with v^(d-1) coefficient d * (z^d coeff of R),
/// hence never vanishing at the fiber's point at infinity.
inline BinaryForm fiber_critical_form(const FiberedMap& f, const Fiber& fib) {
  const int dc = f.degree() - 1;
  std::vector<cplx> coef(std::size_t(dc) + 1);
  for (int l = 0; l <= dc; ++l)
    coef[l] = f.c_sigma().layer[l](fib.s[0], fib.s[1]);
  return BinaryForm(dc, std::move(coef));
}

// ---------------------------------------------------------------------------
// Derivatives in the Fubini-Study metric
// ---------------------------------------------------------------------------

/// |Jac of f in the fiber direction| at x, in the Fubini-Study metric:
/// ||F(X) ^ DF_X(e_z)|| ||X||^2 / (||F(X)||^2 ||X ^ e_z||).
/// Vanishes exactly on the sectional critical set.
inline double sectional_jacobian(const FiberedMap& f, const Pt2& x) {
  const cplx y0 = x.x[0], y1 = x.x[1], z = x.x[2];
  const double ybar = std::norm(y0) + std::norm(y1);
  if (ybar <= 0.0) throw DegenerateInput("sectional_jacobian at the indeterminacy point");
  const auto F = f.lift(y0, y1, z);
  const double dRz = std::abs(f.c_sigma()(y0, y1, z));
  const double th2 = std::norm(F[0]) + std::norm(F[1]);
  const double X2 = ybar + std::norm(z);
  const double F2 = th2 + std::norm(F[2]);
  return dRz * std::sqrt(th2) * X2 / (F2 * std::sqrt(ybar));
}

/// Fubini-Study derivative modulus of the base map at a:
/// (1/d) |det DTheta(Y)| ||Y||^2 / ||Theta(Y)||^2.
inline double base_derivative_fs(const FiberedMap& f, const Pt1& a) {
  const cplx y0 = a.x[0], y1 = a.x[1];
  const auto th = f.theta(y0, y1);
  const double num = std::abs(f.det_dtheta(y0, y1)) * (std::norm(y0) + std::norm(y1));
  const double den = double(f.degree()) * (std::norm(th[0]) + std::norm(th[1]));
  return num / den;
}

/// Full Fubini-Study Jacobian modulus of the map on the plane:
/// (1/d) |det DF(X)| ||X||^3 / ||F(X)||^3, det DF = det DTheta * dR/dz.
inline double full_jacobian_fs(const FiberedMap& f, const Pt2& x) {
  const auto F = f.lift(x.x[0], x.x[1], x.x[2]);
  const double det =
      std::abs(f.det_dtheta(x.x[0], x.x[1])) * std::abs(f.c_sigma()(x.x[0], x.x[1], x.x[2]));
  const double X2 = x.norm2sq();
  const double F2 = std::norm(F[0]) + std::norm(F[1]) + std::norm(F[2]);
  return det * X2 * std::sqrt(X2) / (double(f.degree()) * F2 * std::sqrt(F2));
}

/// Distortion of the pencil projection at x, ||y|| / ||X||. The pointwise
/// chain rule for the Jacobians above is
///   log full = log base + log sectional + log m(f(x)) - log m(x)
/// with this m; the correction telescopes along orbits.
inline double projection_distortion(const Pt2& x) {
  const double ybar = std::norm(x.x[0]) + std::norm(x.x[1]);
  return std::sqrt(ybar / x.norm2sq());
}

// ---------------------------------------------------------------------------
// Preimages
// ---------------------------------------------------------------------------

struct Preimage {
  Pt2 point;
  int multiplicity = 1;
};

namespace detail {

inline std::array<cplx, 2> lift_of_base_root(const RootEntry& r) {
  if (r.at_infinity) return {cplx(1.0), cplx(0.0)};
  const double a = std::abs(r.value);
  if (a >= 1.0) return {cplx(1.0), cplx(1.0) / r.value};
  return {r.value, cplx(1.0)};
}

/// Deterministic fiber-style normalization of a direction in C^2.
inline std::array<cplx, 2> canonical_lift(cplx s0, cplx s1) {
  const double a0 = std::abs(s0), a1 = std::abs(s1);
  const double m = std::max(a0, a1);
  s0 /= m;
  s1 /= m;
  const cplx lead = std::abs(s0) > 0.0 ? s0 : s1;
  const cplx ph = lead / std::abs(lead);
  return {s0 / ph, s1 / ph};
}

}  // namespace detail

/// All d^2 preimages of x with multiplicities. Base solutions come from
/// y1' Theta0(s) - y0' Theta1(s) = 0; for each base root the fiber equation
/// Rs(u,v) - lambda w' u^d = 0 is solved on the line, with Theta(s) = lambda y'.
inline std::vector<Preimage> preimages(const FiberedMap& f, const Pt2& x,
                                       double tol = 1e-9) {
  require_valid(f);
  const int d = f.degree();
  if (at_indeterminacy(x))
    return {Preimage{indeterminacy_point(), d * d}};

  const cplx y0p = x.x[0], y1p = x.x[1], wp = x.x[2];
  std::vector<cplx> g(std::size_t(d) + 1);
  for (int j = 0; j <= d; ++j) g[j] = y1p * f.theta0().b[j] - y0p * f.theta1().b[j];
  RootSet base = binary_form_roots(BinaryForm(d, std::move(g)), tol);

  std::vector<Preimage> out;
  for (const auto& broot : base.roots) {
    const auto dir = detail::lift_of_base_root(broot);
    const auto s = detail::canonical_lift(dir[0], dir[1]);
    const auto th = f.theta(s[0], s[1]);
    const int k = std::abs(y0p) >= std::abs(y1p) ? 0 : 1;
    const cplx lambda = th[k] / (k == 0 ? y0p : y1p);
    std::vector<cplx> e(std::size_t(d) + 1);
    for (int l = 0; l <= d; ++l) e[l] = f.R().layer[l](s[0], s[1]);
    e[0] -= lambda * wp;
    RootSet fib = binary_form_roots(BinaryForm(d, std::move(e)), tol);
    for (const auto& froot : fib.roots) {
      const cplx u = froot.at_infinity ? cplx(1.0) : froot.value;
      const cplx v = froot.at_infinity ? cplx(0.0) : cplx(1.0);
      out.push_back({Pt2(std::array<cplx, 3>{u * s[0], u * s[1], v}),
                     broot.multiplicity * froot.multiplicity});
    }
  }
  return out;
}

/// One uniformly chosen (multiplicity-weighted) preimage; the hot path of the
/// backward-orbit samplers, allocation-light for degree 2.
inline Pt2 random_preimage(const FiberedMap& f, const Pt2& x, Rng& rng) {
  const int d = f.degree();
  if (at_indeterminacy(x)) return indeterminacy_point();
  const cplx y0p = x.x[0], y1p = x.x[1], wp = x.x[2];

  std::array<cplx, 2> s;
  if (d == 2) {
    ProjPair roots[2];
    quadratic_proj_roots(y1p * f.theta0().b[0] - y0p * f.theta1().b[0],
                         y1p * f.theta0().b[1] - y0p * f.theta1().b[1],
                         y1p * f.theta0().b[2] - y0p * f.theta1().b[2], roots);
    const ProjPair& pick = roots[rng.below(2)];
    s = detail::canonical_lift(pick.u, pick.v);
  } else {
    std::vector<cplx> g(std::size_t(d) + 1);
    for (int j = 0; j <= d; ++j) g[j] = y1p * f.theta0().b[j] - y0p * f.theta1().b[j];
    std::vector<ProjPair> roots;
    roots.reserve(d);
    binary_roots_list(BinaryForm(d, std::move(g)), roots);
    const ProjPair& pick = roots[rng.below(roots.size())];
    s = detail::canonical_lift(pick.u, pick.v);
  }

  const auto th = f.theta(s[0], s[1]);
  const int k = std::abs(y0p) >= std::abs(y1p) ? 0 : 1;
  const cplx lambda = th[k] / (k == 0 ? y0p : y1p);

  cplx u, v;
  if (d == 2) {
    ProjPair roots[2];
    quadratic_proj_roots(f.R().layer[0](s[0], s[1]) - lambda * wp,
                         f.R().layer[1](s[0], s[1]), f.R().layer[2].b[0], roots);
    const ProjPair& pick = roots[rng.below(2)];
    u = pick.u;
    v = pick.v;
  } else {
    std::vector<cplx> e(std::size_t(d) + 1);
    for (int l = 0; l <= d; ++l) e[l] = f.R().layer[l](s[0], s[1]);
    e[0] -= lambda * wp;
    std::vector<ProjPair> roots;
    roots.reserve(d);
    binary_roots_list(BinaryForm(d, std::move(e)), roots);
    const ProjPair& pick = roots[rng.below(roots.size())];
    u = pick.u;
    v = pick.v;
  }
  return Pt2(std::array<cplx, 3>{u * s[0], u * s[1], v});
}

/// One uniformly chosen base preimage on the line.
inline Pt1 random_base_preimage(const FiberedMap& f, const Pt1& a, Rng& rng) {
  const int d = f.degree();
  const cplx y0p = a.x[0], y1p = a.x[1];
  if (d == 2) {
    ProjPair roots[2];
    quadratic_proj_roots(y1p * f.theta0().b[0] - y0p * f.theta1().b[0],
                         y1p * f.theta0().b[1] - y0p * f.theta1().b[1],
                         y1p * f.theta0().b[2] - y0p * f.theta1().b[2], roots);
    const ProjPair& pick = roots[rng.below(2)];
    return Pt1(std::array<cplx, 2>{pick.u, pick.v});
  }
  std::vector<cplx> g(std::size_t(d) + 1);
  for (int j = 0; j <= d; ++j) g[j] = y1p * f.theta0().b[j] - y0p * f.theta1().b[j];
  std::vector<ProjPair> roots;
  roots.reserve(d);
  binary_roots_list(BinaryForm(d, std::move(g)), roots);
  const ProjPair& pick = roots[rng.below(roots.size())];
  return Pt1(std::array<cplx, 2>{pick.u, pick.v});
}

// ---------------------------------------------------------------------------
// Trapping region around the indeterminacy point
// ---------------------------------------------------------------------------

/// Certificate that {||y|| < eps |z|} maps into {||y|| < (eps/2) |z|}:
/// with alpha = sup ||Theta|| on the unit sphere (coefficient bound),
/// beta = |z^d coefficient of R| and gamma the mass of the y-dependent part
/// of R, the condition alpha eps^(d-1) <= (beta - gamma eps)/2 suffices.
struct TrappingCert {
  bool ok = false;
  double epsilon = 0.0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

inline TrappingCert certify_trapping(const FiberedMap& f, double eps_min = 1e-8) {
  TrappingCert cert;
  cert.alpha = std::max(f.theta0().norm1(), f.theta1().norm1());
  cert.beta = std::abs(f.R().z_lead());
  cert.gamma = f.R().norm1() - cert.beta;
  const int d = f.degree();
  auto good = [&](double eps) {
    const double margin = cert.beta - cert.gamma * eps;
    return margin > 0.0 && cert.alpha * std::pow(eps, d - 1) <= 0.5 * margin;
  };
  if (!good(eps_min)) return cert;
  double lo = eps_min, hi = 1.0;
  if (good(hi)) {
    cert.ok = true;
    cert.epsilon = hi;
    return cert;
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (good(mid) ? lo : hi) = mid;
  }
  cert.ok = true;
  cert.epsilon = lo;
  return cert;
}

}  // namespace fibdyn
