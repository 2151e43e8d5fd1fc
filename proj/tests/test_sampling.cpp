#include <catch2/catch_amalgamated.hpp>

#include "fibdyn/builtins.hpp"
#include "fibdyn/sampling.hpp"
#include "oracles.hpp"

using namespace fibdyn;
using Catch::Matchers::WithinAbs;

TEST_CASE("base sampler on model maps", "[sampling]") {
  FiberedMap torus = builtin_map("torus");
  BaseSample s = sample_base(torus, 5000, 101);
  REQUIRE(s.points.size() == 5000);
  for (const auto& a : s.points) {
    const double t = std::abs(a.x[0] / a.x[1]);
    REQUIRE_THAT(t, WithinAbs(1.0, 1e-6));
  }

  FiberedMap cheb = builtin_map("chebyshev");
  for (const auto& a : sample_base(cheb, 5000, 102).points) {
    const cplx t = a.x[0] / a.x[1];
    REQUIRE(std::abs(t.imag()) <= 1e-6);
    REQUIRE(t.real() >= -2.0 - 1e-6);
    REQUIRE(t.real() <= 2.0 + 1e-6);
  }
}

TEST_CASE("base sampler potential against escape rates", "[sampling]") {
  // for a monic polynomial, int log|w - t| dmu(t) = G(w)
  FiberedMap bas = builtin_map("basilica_base");
  BaseSample s = sample_base(bas, 20000, 103);
  std::vector<double> vals(s.points.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = std::log(std::abs(cplx(10.0) - s.points[i].x[0] / s.points[i].x[1]));
  Estimate est = jackknife_mean(vals, s.weights);
  const double oracle = oracles::green1d(UniPoly({cplx(-1.0), cplx(0.0), cplx(1.0)}), 10.0);
  REQUIRE(std::abs(est.value - oracle) <= 4.0 * est.se + 1e-6);
}

TEST_CASE("equilibrium sampler on the torus", "[sampling]") {
  FiberedMap torus = builtin_map("torus");
  PlaneSample s = sample_equilibrium(torus, 5000, 104);
  for (const auto& x : s.points) {
    REQUIRE_THAT(std::abs(x.x[0] / x.x[1]), WithinAbs(1.0, 1e-6));
    REQUIRE_THAT(std::abs(x.x[2] / x.x[1]), WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("determinism of samplers", "[sampling]") {
  FiberedMap f = builtin_map("cheb_coupled");
  PlaneSample a = sample_equilibrium(f, 300, 42);
  PlaneSample b = sample_equilibrium(f, 300, 42);
  PlaneSample c = sample_equilibrium(f, 300, 43);
  REQUIRE(a.points.size() == b.points.size());
  bool identical = true, different = false;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    for (int k = 0; k < 3; ++k) {
      identical = identical && a.points[i].x[k] == b.points[i].x[k];
      different = different || a.points[i].x[k] != c.points[i].x[k];
    }
  REQUIRE(identical);
  REQUIRE(different);
}

TEST_CASE("green vanishes on equilibrium samples", "[sampling]") {
  const double tol = 1e-9;
  for (const char* key : {"torus", "cheb_coupled"}) {
    FiberedMap f = builtin_map(key);
    GreenContext ctx = green_context(f);
    PlaneSample s = sample_equilibrium(f, 10000, 105);
    std::vector<double> g(s.points.size());
    double mn = 1e300;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      g[i] = relative_green(f, ctx, s.points[i], tol).value;
      REQUIRE(g[i] >= -2.0 * tol);
      mn = std::min(mn, g[i]);
    }
    Estimate est = jackknife_mean(g);
    REQUIRE(std::abs(est.value) <= 3.0 * tol + 3.0 * est.se);
    REQUIRE(mn >= -2.0 * tol);
    REQUIRE(mn <= 2.0 * tol);
  }
}

TEST_CASE("fiber measure sampler", "[sampling]") {
  FiberedMap torus = builtin_map("torus");
  const Pt1 a({std::polar(1.0, 1.1), cplx(1.0)});
  PlaneSample s = sample_fiber_measure(torus, a, 2000, 106);
  for (const auto& x : s.points)
    REQUIRE_THAT(std::abs(x.x[2] / x.x[1]), WithinAbs(1.0, 1e-6));

  // decoupled product: every fiber carries the circle measure
  FiberedMap prod = FiberedMap::from_affine(detail::up({-1, 0, 1}),
                                            {detail::up({0}), detail::up({0}), detail::up({1})});
  PlaneSample s2 = sample_fiber_measure(prod, Pt1({cplx(0.3, 0.2), cplx(1.0)}), 2000, 107);
  for (const auto& x : s2.points)
    REQUIRE_THAT(std::abs(x.x[2] / x.x[1]), WithinAbs(1.0, 1e-6));

  // coupled: over the fixed base point t=1 the fiber measure is the
  // equilibrium measure of z^2 + 1; check its potential at w = 10
  FiberedMap skew = FiberedMap::from_affine(
      detail::up({0, 0, 1}), {detail::up({0, 1}), detail::up({0}), detail::up({1})});
  PlaneSample s3 = sample_fiber_measure(skew, Pt1({cplx(1.0), cplx(1.0)}), 20000, 108);
  std::vector<double> vals(s3.points.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = std::log(std::abs(cplx(10.0) - s3.points[i].x[2] / s3.points[i].x[1]));
  Estimate est = jackknife_mean(vals, s3.weights);
  const double oracle = oracles::green1d(UniPoly({cplx(1.0), cplx(0.0), cplx(1.0)}), 10.0);
  REQUIRE(std::abs(est.value - oracle) <= 1e-3);
}

TEST_CASE("periodic base points of the power map", "[sampling]") {
  FiberedMap torus = builtin_map("torus");

  PeriodicSet n1 = periodic_base_points(torus, 1);
  REQUIRE(n1.total_with_multiplicity() == 3);  // 0, 1, infinity

  PeriodicSet n2 = periodic_base_points(torus, 2);
  REQUIRE(n2.total_with_multiplicity() == 5);
  // expected: 0, 1, the primitive cube roots of unity, infinity
  int found_cbrt = 0, found_zero = 0, found_one = 0, found_inf = 0;
  for (const auto& cyc : n2.cycles)
    for (const auto& pt : cyc.points) {
      if (std::abs(pt.x[1]) < 1e-12) {
        ++found_inf;
        continue;
      }
      const cplx t = pt.x[0] / pt.x[1];
      if (std::abs(t) < 1e-9) ++found_zero;
      else if (std::abs(t - 1.0) < 1e-9) ++found_one;
      else if (std::abs(t * t * t - 1.0) < 1e-8) ++found_cbrt;
    }
  REQUIRE(found_zero == 1);
  REQUIRE(found_one == 1);
  REQUIRE(found_inf == 1);
  REQUIRE(found_cbrt == 2);
}

TEST_CASE("periodic points against chebyshev angles", "[sampling]") {
  FiberedMap cheb = builtin_map("chebyshev");
  PeriodicSet ps = periodic_base_points(cheb, 3, 1e-8);
  REQUIRE(ps.total_with_multiplicity() == 9);
  std::vector<double> expected = oracles::cheb_periodic_points(3);  // 8 finite values
  REQUIRE(expected.size() == 8);
  int matched = 0;
  for (double t : expected) {
    bool hit = false;
    for (const auto& cyc : ps.cycles)
      for (std::size_t i = 0; i < cyc.points.size() && !hit; ++i) {
        const auto& pt = cyc.points[i];
        if (std::abs(pt.x[1]) < 1e-12) continue;
        if (std::abs(pt.x[0] / pt.x[1] - t) < 1e-8) hit = true;
      }
    if (hit) ++matched;
  }
  REQUIRE(matched == 8);
}

TEST_CASE("periodic point cardinality", "[sampling]") {
  Rng rng(109);
  for (int trial = 0; trial < 3; ++trial) {
    UniPoly p({rng.in_disk(), rng.in_disk(), cplx(1.0) + 0.5 * rng.in_disk()});
    FiberedMap f = FiberedMap::from_affine(
        p, {detail::up({0}), detail::up({0}), detail::up({1})});
    if (!f.valid()) continue;
    for (int n = 1; n <= 4; ++n) {
      PeriodicSet ps = periodic_base_points(f, n);
      REQUIRE(ps.total_with_multiplicity() == (1 << n) + 1);
      for (const auto& cyc : ps.cycles)
        for (const auto& pt : cyc.points) {
          // every cycle point is a fixed point of theta^n
          Pt1 a = pt;
          for (int k = 0; k < n; ++k) a = apply_base(f, a);
          REQUIRE(chordal(a, pt) <= 1e-7);
        }
    }
  }
  FiberedMap no_affine = builtin_map("desboves");
  REQUIRE_THROWS_AS(periodic_base_points(no_affine, 1), DegenerateInput);
}

TEST_CASE("integration", "[sampling]") {
  FiberedMap torus = builtin_map("torus");
  PlaneSample s = sample_equilibrium(torus, 20000, 110);
  Estimate e = integrate(s, Moment<3>{{0, 0, 1}});
  REQUIRE(std::abs(e.value - 1.0 / 3.0) <= 3.0 * e.se + 1e-9);

  PlaneSample delta;
  delta.points.assign(5, Pt2({cplx(1.0), cplx(1e-18), cplx(1e-18)}));
  delta.weights.assign(5, 0.2);
  REQUIRE_THAT(integrate(delta, Moment<3>{{1, 0, 0}}).value, WithinAbs(1.0, 1e-15));
}

TEST_CASE("direct and nested decomposition agree", "[sampling]") {
  FiberedMap f = builtin_map("cheb_coupled");
  PlaneSample direct = sample_equilibrium(f, 20000, 111);
  BaseSample outer = sample_base(f, 150, 112);
  for (const auto& phi : {Moment<3>{{0, 0, 1}}, Moment<3>{{1, 0, 1}}}) {
    Estimate lhs = integrate(direct, phi);
    Estimate rhs = nested_integral(f, phi, outer, 150, 113);
    REQUIRE(std::abs(lhs.value - rhs.value) <=
            3.0 * combined_se(lhs.se, rhs.se) + 1e-9);
  }
}

TEST_CASE("pushforward matches the base sampler", "[sampling]") {
  for (const char* key : {"torus", "cheb_coupled"}) {
    FiberedMap f = builtin_map(key);
    BaseSample push = pushforward(sample_equilibrium(f, 20000, 114));
    BaseSample direct = sample_base(f, 20000, 115);
    for (const auto& psi : builtin_moments_base()) {
      Estimate a = integrate(push, psi);
      Estimate b = integrate(direct, psi);
      REQUIRE(std::abs(a.value - b.value) <= 3.0 * combined_se(a.se, b.se) + 1e-9);
    }
  }
}

TEST_CASE("fiber measure invariance", "[sampling]") {
  FiberedMap f = builtin_map("cheb_coupled");
  const Pt1 a({cplx(0.4), cplx(1.0)});
  PlaneSample mu_a = sample_fiber_measure(f, a, 20000, 116);
  PlaneSample image = mu_a;
  for (auto& p : image.points) p = apply(f, p);
  PlaneSample mu_ta = sample_fiber_measure(f, apply_base(f, a), 20000, 117);
  for (const auto& phi : builtin_moments_plane()) {
    Estimate lhs = integrate(image, phi);
    Estimate rhs = integrate(mu_ta, phi);
    REQUIRE(std::abs(lhs.value - rhs.value) <= 3.0 * combined_se(lhs.se, rhs.se) + 1e-9);
  }
}

TEST_CASE("merging sample sets", "[sampling]") {
  FiberedMap f = builtin_map("torus");
  PlaneSample a = sample_equilibrium(f, 100, 118);
  PlaneSample b = sample_equilibrium(f, 300, 119);
  PlaneSample m = merge(a, b);
  REQUIRE(m.points.size() == 400);
  REQUIRE_THAT(pairwise_sum(m.weights), WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(m.weights.front(), WithinAbs(1.0 / 400.0, 1e-12));
  REQUIRE_THAT(m.weights.back(), WithinAbs(1.0 / 400.0, 1e-12));
}
