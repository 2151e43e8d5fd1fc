#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "fibdyn/poly.hpp"
#include "fibdyn/rng.hpp"
#include "fibdyn/roots.hpp"
#include "oracles.hpp"

using namespace fibdyn;
using Catch::Matchers::WithinAbs;

namespace {
UniPoly random_monic(Rng& rng, int deg) {
  std::vector<cplx> c(deg + 1);
  for (int k = 0; k < deg; ++k) c[k] = rng.in_disk();
  c[deg] = 1.0;
  return UniPoly(c);
}
}  // namespace

TEST_CASE("evaluation", "[algebra]") {
  UniPoly p({cplx(1.0), cplx(0.0), cplx(1.0)});  // z^2 + 1
  REQUIRE_THAT(std::abs(p(cplx(0.0, 1.0))), WithinAbs(0.0, 1e-15));

  BinaryForm theta0(2, {cplx(1.0), cplx(0.0), cplx(0.0)});  // a^2
  REQUIRE_THAT(std::abs(theta0(cplx(2.0), cplx(3.0)) - 4.0), WithinAbs(0.0, 1e-14));

  // R = y0 y1 z as a degree-3 ternary form
  TernaryForm R = TernaryForm::zeros(3);
  R.set_coeff(1, 1, 1, cplx(1.0));
  const cplx lam(1.7, 0.3);
  REQUIRE(std::abs(R(lam, lam, lam) - lam * lam * lam) < 1e-13);
}

TEST_CASE("homogeneity of forms", "[algebra]") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + int(rng.below(3));
    std::vector<cplx> bc(d + 1);
    for (auto& x : bc) x = rng.in_disk();
    BinaryForm B(d, bc);
    TernaryForm T = TernaryForm::zeros(d);
    for (int l = 0; l <= d; ++l)
      for (int j = 0; j <= d - l; ++j) T.set_coeff(d - l - j, j, l, rng.in_disk());

    const cplx lam = rng.in_disk(2.0) + cplx(0.3, 0.0);
    const cplx u = rng.in_disk(2.0), v = rng.in_disk(2.0), w = rng.in_disk(2.0);
    cplx pw = 1.0;
    for (int k = 0; k < d; ++k) pw *= lam;
    REQUIRE(std::abs(B(lam * u, lam * v) - pw * B(u, v)) <=
            1e-12 * (1.0 + std::abs(pw * B(u, v))));
    REQUIRE(std::abs(T(lam * u, lam * v, lam * w) - pw * T(u, v, w)) <=
            1e-12 * (1.0 + std::abs(pw * T(u, v, w))));
  }
}

TEST_CASE("derivatives", "[algebra]") {
  const cplx t(0.7, 0.0);
  UniPoly p({cplx(0.0), t, cplx(1.0)});  // z^2 + t z
  UniPoly dp = p.derivative();
  REQUIRE(dp.degree() == 1);
  REQUIRE(std::abs(dp.c[0] - t) < 1e-15);
  REQUIRE(std::abs(dp.c[1] - 2.0) < 1e-15);

  TernaryForm R = TernaryForm::zeros(3);
  R.set_coeff(1, 1, 1, cplx(1.0));
  TernaryForm Rz = R.dz();
  REQUIRE(Rz.d == 2);
  REQUIRE(std::abs(Rz(cplx(2.0), cplx(3.0), cplx(9.0)) - 6.0) < 1e-14);

  REQUIRE(UniPoly::constant(cplx(4.2)).derivative().is_zero());
}

TEST_CASE("composition", "[algebra]") {
  UniPoly sq({cplx(0.0), cplx(0.0), cplx(1.0)});
  UniPoly c4 = compose(sq, sq);
  REQUIRE(c4.degree() == 4);
  REQUIRE(std::abs(c4.c[4] - 1.0) < 1e-15);

  UniPoly cheb({cplx(-2.0), cplx(0.0), cplx(1.0)});
  UniPoly cheb2 = compose(cheb, cheb);  // z^4 - 4z^2 + 2
  REQUIRE(std::abs(cheb2.c[0] - 2.0) < 1e-14);
  REQUIRE(std::abs(cheb2.c[2] + 4.0) < 1e-14);
  REQUIRE(std::abs(cheb2.c[4] - 1.0) < 1e-14);
  REQUIRE(std::abs(cheb2.c[1]) + std::abs(cheb2.c[3]) < 1e-14);

  UniPoly zp1({cplx(1.0), cplx(1.0)});
  UniPoly r = compose(UniPoly({cplx(1.0), cplx(0.0), cplx(1.0)}), zp1);
  REQUIRE(std::abs(r.c[0] - 2.0) < 1e-14);
  REQUIRE(std::abs(r.c[1] - 2.0) < 1e-14);
  REQUIRE(std::abs(r.c[2] - 1.0) < 1e-14);

  UniPoly big(std::vector<cplx>(100, cplx(1.0)));
  REQUIRE_THROWS_AS(compose(big, big), DegreeCapExceeded);
}

TEST_CASE("compose associativity", "[algebra]") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    UniPoly a = random_monic(rng, 2), b = random_monic(rng, 2), c = random_monic(rng, 2);
    UniPoly lhs = compose(compose(a, b), c);
    UniPoly rhs = compose(a, compose(b, c));
    REQUIRE(lhs.degree() == rhs.degree());
    const double scale = lhs.norm1() + rhs.norm1();
    for (int k = 0; k <= lhs.degree(); ++k)
      REQUIRE(std::abs(lhs.c[k] - rhs.c[k]) <= 1e-10 * scale);
  }
}

TEST_CASE("simple roots", "[algebra]") {
  RootSet rs = uni_poly_roots(UniPoly({cplx(1.0), cplx(0.0), cplx(1.0)}), 1e-10);
  REQUIRE(rs.roots.size() == 2);
  for (const auto& r : rs.roots) {
    REQUIRE(r.multiplicity == 1);
    REQUIRE_THAT(std::abs(r.value.imag()), WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(r.value.real(), WithinAbs(0.0, 1e-12));
  }

  RootSet cube = uni_poly_roots(UniPoly({cplx(-1.0), cplx(0.0), cplx(0.0), cplx(1.0)}), 1e-10);
  REQUIRE(cube.total_multiplicity() == 3);
  for (const auto& r : cube.roots)
    REQUIRE_THAT(std::abs(r.value), WithinAbs(1.0, 1e-12));
}

TEST_CASE("clustered double root", "[algebra]") {
  // (z - 0.3)^2 (z - 2), expanded independently
  UniPoly p = oracles::expand_from_roots({cplx(0.3), cplx(0.3), cplx(2.0)});
  REQUIRE_THAT(p.c[0].real(), WithinAbs(-0.18, 1e-15));
  REQUIRE_THAT(p.c[1].real(), WithinAbs(1.29, 1e-15));
  REQUIRE_THAT(p.c[2].real(), WithinAbs(-2.6, 1e-15));

  RootSet rs = uni_poly_roots(p, 1e-10);
  REQUIRE(rs.roots.size() == 2);
  REQUIRE(rs.total_multiplicity() == 3);
  for (const auto& r : rs.roots) {
    if (r.multiplicity == 2)
      REQUIRE_THAT(std::abs(r.value - cplx(0.3)), WithinAbs(0.0, 1e-8));
    else
      REQUIRE_THAT(std::abs(r.value - cplx(2.0)), WithinAbs(0.0, 1e-8));
  }
}

TEST_CASE("root reconstruction", "[algebra]") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int deg = 3 + int(rng.below(10));  // up to 12
    UniPoly p = random_monic(rng, deg);
    RootSet rs = uni_poly_roots(p, 1e-8);
    std::vector<cplx> roots;
    for (const auto& r : rs.roots)
      for (int m = 0; m < r.multiplicity; ++m) roots.push_back(r.value);
    UniPoly q = oracles::expand_from_roots(roots);
    const double scale = p.norm1();
    for (int k = 0; k <= deg; ++k)
      REQUIRE(std::abs(p.c[k] - q.c[k]) <= 1e-6 * scale);
  }
}

TEST_CASE("binary form roots and multiplicity conservation", "[algebra]") {
  // u v: one root at (1:0), one at (0:1)
  BinaryForm B(2, {cplx(0.0), cplx(1.0), cplx(0.0)});
  RootSet rs = binary_form_roots(B, 1e-10);
  REQUIRE(rs.total_multiplicity() == 2);
  bool saw_inf = false, saw_zero = false;
  for (const auto& r : rs.roots) {
    if (r.at_infinity) saw_inf = true;
    else if (std::abs(r.value) < 1e-12) saw_zero = true;
  }
  REQUIRE(saw_inf);
  REQUIRE(saw_zero);

  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + int(rng.below(5));
    std::vector<cplx> c(d + 1);
    for (auto& x : c) x = rng.in_disk();
    if (trial % 3 == 0) c[0] = 0.0;  // force a root at (1:0)
    BinaryForm F(d, c);
    if (F.is_zero(1e-12)) continue;
    REQUIRE(binary_form_roots(F, 1e-8).total_multiplicity() == d);
  }
}

TEST_CASE("fast projective quadratic", "[algebra]") {
  Rng rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    cplx c0 = rng.in_disk(), c1 = rng.in_disk(), c2 = rng.in_disk();
    if (trial % 5 == 0) c0 = 0.0;
    if (trial % 7 == 0) c2 = 0.0;
    if (std::abs(c0) + std::abs(c1) + std::abs(c2) < 1e-12) continue;
    ProjPair roots[2];
    quadratic_proj_roots(c0, c1, c2, roots);
    BinaryForm B(2, {c0, c1, c2});
    for (const auto& r : roots) {
      const double norm = std::max(std::abs(r.u), std::abs(r.v));
      REQUIRE(norm > 0.0);
      REQUIRE(std::abs(B(r.u, r.v)) <= 1e-10 * B.norm1() * norm * norm);
    }
  }
}

TEST_CASE("degenerate and non-convergent input", "[algebra]") {
  REQUIRE_THROWS_AS(uni_poly_roots(UniPoly::zero()), DegenerateInput);
  // a residual tolerance below the round-off floor cannot be met
  Rng rng(16);
  UniPoly p = random_monic(rng, 18);
  REQUIRE_THROWS_AS(uni_poly_roots(p, 1e-30), NonConvergence);
}

TEST_CASE("resultant", "[algebra]") {
  BinaryForm f(2, {cplx(1.0), cplx(0.0), cplx(-1.0)});  // u^2 - v^2
  BinaryForm g(2, {cplx(1.0), cplx(0.0), cplx(1.0)});   // u^2 + v^2
  REQUIRE(std::abs(resultant(f, g)) > 1.0);

  BinaryForm h(2, {cplx(1.0), cplx(0.0), cplx(0.0)});   // u^2
  BinaryForm k(2, {cplx(0.0), cplx(1.0), cplx(0.0)});   // u v
  REQUIRE(std::abs(resultant(h, k)) < 1e-14);
}
