#pragma once

#include <string>
#include <vector>

#include "fibdyn/fibered_map.hpp"

namespace fibdyn {

namespace detail {

inline UniPoly up(std::initializer_list<double> re) {
  std::vector<cplx> c;
  for (double x : re) c.emplace_back(x, 0.0);
  return UniPoly(std::move(c));
}

/// Degree-4 map whose base is the Lattes map of doubling on the lemniscatic
/// elliptic curve, theta(t) = (t^2+1)^2 / (4t(t^2-1)), with a coupled quartic
/// fiber part. The base equilibrium measure is smooth, so the base exponent
/// is exactly (1/2) log 4. Shipped under the key "desboves"; the adapted
/// coordinates make the preserved pencil the standard one (the recorded
/// coordinate change is the identity).
inline FiberedMap make_desboves() {
  BinaryForm theta0(4, {cplx(1.0), cplx(0.0), cplx(2.0), cplx(0.0), cplx(1.0)});
  BinaryForm theta1(4, {cplx(0.0), cplx(4.0), cplx(0.0), cplx(-4.0), cplx(0.0)});
  TernaryForm R = TernaryForm::zeros(4);
  R.set_coeff(0, 0, 4, cplx(1.0));   // z^4
  R.set_coeff(1, 1, 2, cplx(1.0));   // y0 y1 z^2
  R.set_coeff(0, 3, 1, cplx(-1.0));  // -y1^3 z
  return FiberedMap(std::move(theta0), std::move(theta1), std::move(R));
}

}  // namespace detail

inline std::vector<std::string> builtin_map_keys() {
  return {"torus", "chebyshev", "chebyshev_base", "basilica_base", "cheb_coupled",
          "desboves"};
}

inline FiberedMap builtin_map(const std::string& key) {
  using detail::up;
  if (key == "torus")
    return FiberedMap::from_affine(up({0, 0, 1}), {up({0}), up({0}), up({1})});
  if (key == "chebyshev" || key == "chebyshev_base")
    return FiberedMap::from_affine(up({-2, 0, 1}), {up({0}), up({0}), up({1})});
  if (key == "basilica_base")
    return FiberedMap::from_affine(up({-1, 0, 1}), {up({0}), up({0}), up({1})});
  if (key == "cheb_coupled")
    return FiberedMap::from_affine(up({-2, 0, 1}), {up({0, 1}), up({0}), up({1})});
  if (key == "desboves") return detail::make_desboves();
  throw ConfigError("unknown built-in map: " + key);
}

}  // namespace fibdyn
