#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fibdyn/fibered_map.hpp"
#include "fibdyn/lyapunov.hpp"
#include "fibdyn/parallel.hpp"
#include "fibdyn/sampling.hpp"

namespace fibdyn {

// ---------------------------------------------------------------------------
// Families over one complex parameter: every coefficient of the three
// components is a polynomial in lambda.
// ---------------------------------------------------------------------------

struct FamilyBinary {
  int d = 0;
  std::vector<UniPoly> b;  // b[j](lambda)
};

struct FamilyTernary {
  int d = 0;
  std::vector<FamilyBinary> layer;  // layer[l] has degree d-l
};

struct Rect {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  Rect shrunk_toward_center() const {
    const cplx c = center();
    return {0.5 * (x0 + c.real()), 0.5 * (x1 + c.real()),
            0.5 * (y0 + c.imag()), 0.5 * (y1 + c.imag())};
  }
};

struct ParamFamily {
  std::string name;
  int d = 2;
  FamilyBinary theta0, theta1;
  FamilyTernary R;
  Rect rect;

  FiberedMap at(cplx lambda) const {
    std::vector<cplx> t0(d + 1), t1(d + 1);
    for (int j = 0; j <= d; ++j) {
      t0[j] = theta0.b[j](lambda);
      t1[j] = theta1.b[j](lambda);
    }
    std::vector<BinaryForm> layers;
    layers.reserve(d + 1);
    for (int l = 0; l <= d; ++l) {
      std::vector<cplx> c(std::size_t(d - l) + 1);
      for (int j = 0; j <= d - l; ++j) c[j] = R.layer[l].b[j](lambda);
      layers.emplace_back(d - l, std::move(c));
    }
    // a monic-in-y1 base lift is a polynomial skew product; attach the affine
    // view so periodic machinery is available
    double off = 0.0;
    for (int j = 0; j < d; ++j) off += std::abs(t1[j]);
    const cplx lead = t1[d];
    if (off <= 1e-14 * std::abs(lead) && std::abs(t0[0]) > 0.0) {
      std::vector<cplx> pc(d + 1);
      for (int i = 0; i <= d; ++i) pc[i] = t0[d - i] / lead;
      std::vector<UniPoly> qz;
      qz.reserve(d + 1);
      for (int l = 0; l <= d; ++l) {
        std::vector<cplx> qc(std::size_t(d - l) + 1);
        for (int i = 0; i <= d - l; ++i) qc[i] = layers[l].b[d - l - i] / lead;
        qz.emplace_back(std::move(qc));
      }
      try {
        return FiberedMap::from_affine(UniPoly(std::move(pc)), std::move(qz));
      } catch (const DegenerateInput&) {
      }
    }
    return FiberedMap(BinaryForm(d, t0), BinaryForm(d, t1),
                      TernaryForm(d, std::move(layers)));
  }
};

/// Nine-point probe of the parameter rectangle; a failing probe shrinks the
/// rectangle toward its center (three attempts) before giving up.
inline ParamFamily probe_family(ParamFamily fam) {
  for (int attempt = 0; attempt < 4; ++attempt) {
    bool ok = true;
    for (double fx : {0.0, 0.5, 1.0})
      for (double fy : {0.0, 0.5, 1.0}) {
        const cplx lam(fam.rect.x0 + fx * (fam.rect.x1 - fam.rect.x0),
                       fam.rect.y0 + fy * (fam.rect.y1 - fam.rect.y0));
        if (!fam.at(lam).valid()) ok = false;
      }
    if (ok) return fam;
    fam.rect = fam.rect.shrunk_toward_center();
  }
  throw ConfigError("family " + fam.name + ": probe failed on the parameter rectangle");
}

namespace detail {

inline UniPoly fam_const(double v) { return UniPoly({cplx(v)}); }
inline UniPoly fam_lambda() { return UniPoly({cplx(0.0), cplx(1.0)}); }

}  // namespace detail

inline std::vector<std::string> builtin_family_keys() {
  return {"mandel_family", "coupled_family"};
}

inline ParamFamily builtin_family(const std::string& key) {
  using detail::fam_const;
  using detail::fam_lambda;
  ParamFamily fam;
  fam.d = 2;
  if (key == "mandel_family") {
    // (t^2, z^2 + lambda)
    fam.name = key;
    fam.theta0 = {2, {fam_const(1), fam_const(0), fam_const(0)}};
    fam.theta1 = {2, {fam_const(0), fam_const(0), fam_const(1)}};
    fam.R = {2,
             {{2, {fam_const(0), fam_const(0), fam_lambda()}},
              {1, {fam_const(0), fam_const(0)}},
              {0, {fam_const(1)}}}};
    fam.rect = {-2.5, 1.5, -1.5, 1.5};
    return fam;
  }
  if (key == "coupled_family") {
    // (t^2 - 1, z^2 + lambda t)
    fam.name = key;
    fam.theta0 = {2, {fam_const(1), fam_const(0), fam_const(-1)}};
    fam.theta1 = {2, {fam_const(0), fam_const(0), fam_const(1)}};
    fam.R = {2,
             {{2, {fam_const(0), fam_lambda(), fam_const(0)}},
              {1, {fam_const(0), fam_const(0)}},
              {0, {fam_const(1)}}}};
    fam.rect = {-2.0, 2.0, -2.0, 2.0};
    return fam;
  }
  throw ConfigError("unknown built-in family: " + key);
}

// ---------------------------------------------------------------------------
// Scan grids
// ---------------------------------------------------------------------------

struct ScanGrid {
  int nx = 0, ny = 0;
  Rect rect;
  std::vector<double> value;  // row-major, j * nx + i
  std::vector<double> se;
  std::vector<char> masked;

  std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }
  double hx() const { return (rect.x1 - rect.x0) / nx; }
  double hy() const { return (rect.y1 - rect.y0) / ny; }
  cplx center(int i, int j) const {
    return {rect.x0 + (i + 0.5) * hx(), rect.y0 + (j + 0.5) * hy()};
  }
  void allocate() {
    value.assign(std::size_t(nx) * ny, 0.0);
    se.assign(std::size_t(nx) * ny, 0.0);
    masked.assign(std::size_t(nx) * ny, 0);
  }
  double max_unmasked_se() const {
    double m = 0.0;
    for (std::size_t k = 0; k < se.size(); ++k)
      if (!masked[k]) m = std::max(m, se[k]);
    return m;
  }
};

enum class ScanQuantity { sigma, theta, total };

namespace detail {

inline Estimate cell_exponent(const FiberedMap& f, std::size_t n, std::uint64_t seed,
                              ScanQuantity what) {
  if (what == ScanQuantity::theta) {
    BaseSample st = sample_base(f, n, seed);
    std::vector<double> jac(st.points.size());
    for (std::size_t i = 0; i < jac.size(); ++i)
      jac[i] = base_derivative_fs(f, st.points[i]);
    const ExpEntry e = log_mean_entry(jac, st.weights, "fs-derivative/base-sample");
    return {e.value, e.se, e.n};
  }
  PlaneSample sf = sample_equilibrium(f, n, seed);
  std::vector<double> jac(sf.points.size());
  for (std::size_t i = 0; i < jac.size(); ++i) {
    jac[i] = sectional_jacobian(f, sf.points[i]);
    if (what == ScanQuantity::total)
      jac[i] *= base_derivative_fs(f, base_of(sf.points[i]));
  }
  const ExpEntry e = log_mean_entry(jac, sf.weights, "sectional-jacobian/mu_f");
  return {e.value, e.se, e.n};
}

}  // namespace detail

/// Monte-Carlo exponent scan over the parameter rectangle. Failed cells are
/// masked, never fatal. Per-cell seeds derive from (seed, cell index).
inline ScanGrid scan_sigma(const ParamFamily& fam, int nx, int ny, std::size_t n,
                           std::uint64_t seed, int workers = 1,
                           ScanQuantity what = ScanQuantity::sigma) {
  ScanGrid g;
  g.nx = nx;
  g.ny = ny;
  g.rect = fam.rect;
  g.allocate();
  parallel_for(std::size_t(nx) * ny, workers, [&](std::size_t k) {
    const int i = int(k % nx), j = int(k / nx);
    try {
      FiberedMap f = fam.at(g.center(i, j));
      require_valid(f);
      const Estimate est = detail::cell_exponent(f, n, derive_seed(seed, k), what);
      g.value[k] = est.value;
      g.se[k] = est.se;
    } catch (const std::exception&) {
      g.masked[k] = 1;
    }
  });
  return g;
}

/// Deterministic periodic-fiber exponent scan (no sampling noise beyond the
/// root solver and green tails).
inline ScanGrid scan_sigma_periodic(const ParamFamily& fam, int period, int nx, int ny,
                                    int workers = 1, double tol_g = 1e-9) {
  if (std::pow(double(fam.d), period) > 1024.0)
    throw DegreeCapExceeded("periodic scan: d^n exceeds the grid cap");
  ScanGrid g;
  g.nx = nx;
  g.ny = ny;
  g.rect = fam.rect;
  g.allocate();
  parallel_for(std::size_t(nx) * ny, workers, [&](std::size_t k) {
    const int i = int(k % nx), j = int(k / nx);
    try {
      FiberedMap f = fam.at(g.center(i, j));
      require_valid(f);
      g.value[k] = sigma_periodic_approx(f, period, tol_g).value;
      g.se[k] = 0.0;
    } catch (const std::exception&) {
      g.masked[k] = 1;
    }
  });
  return g;
}

// ---------------------------------------------------------------------------
// Discrete Laplacian density (the dd^c proxy; |lambda|^2 has density 1)
// ---------------------------------------------------------------------------

struct LaplacianGrid {
  ScanGrid density;       // masked on the border and next to masked cells
  double eps_noise = 0.0; // 6 max SE / (hx hy)
  int negative_flagged = 0;
  int unmasked = 0;
};

inline LaplacianGrid laplacian_density(const ScanGrid& g) {
  LaplacianGrid out;
  out.density.nx = g.nx;
  out.density.ny = g.ny;
  out.density.rect = g.rect;
  out.density.allocate();
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  out.eps_noise = 6.0 * g.max_unmasked_se() / (g.hx() * g.hy());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.idx(i, j);
      if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1) {
        out.density.masked[k] = 1;
        continue;
      }
      if (g.masked[k] || g.masked[g.idx(i - 1, j)] || g.masked[g.idx(i + 1, j)] ||
          g.masked[g.idx(i, j - 1)] || g.masked[g.idx(i, j + 1)]) {
        out.density.masked[k] = 1;
        continue;
      }
      const double lap =
          (g.value[g.idx(i - 1, j)] - 2.0 * g.value[k] + g.value[g.idx(i + 1, j)]) * ihx2 +
          (g.value[g.idx(i, j - 1)] - 2.0 * g.value[k] + g.value[g.idx(i, j + 1)]) * ihy2;
      out.density.value[k] = 0.25 * lap;
      ++out.unmasked;
      if (out.density.value[k] < -out.eps_noise) ++out.negative_flagged;
    }
  return out;
}

/// Optional separable Gaussian blur of the cell values (radius in cells,
/// sigma = radius/2); the kernel renormalizes over unmasked neighbors.
inline ScanGrid gaussian_blur(const ScanGrid& g, double radius_cells) {
  if (radius_cells <= 0.0) return g;
  const int r = std::max(1, int(radius_cells + 0.5));
  const double sigma = 0.5 * radius_cells;
  std::vector<double> kernel(2 * r + 1);
  for (int k = -r; k <= r; ++k) kernel[k + r] = std::exp(-0.5 * k * k / (sigma * sigma));
  ScanGrid tmp = g, out = g;
  auto pass = [&](const ScanGrid& src, ScanGrid& dst, bool horizontal) {
    for (int j = 0; j < src.ny; ++j)
      for (int i = 0; i < src.nx; ++i) {
        const std::size_t c = src.idx(i, j);
        if (src.masked[c]) continue;
        double acc = 0.0, wsum = 0.0;
        for (int k = -r; k <= r; ++k) {
          const int ii = horizontal ? i + k : i;
          const int jj = horizontal ? j : j + k;
          if (ii < 0 || jj < 0 || ii >= src.nx || jj >= src.ny) continue;
          const std::size_t kk = src.idx(ii, jj);
          if (src.masked[kk]) continue;
          acc += kernel[k + r] * src.value[kk];
          wsum += kernel[k + r];
        }
        dst.value[c] = acc / wsum;
      }
  };
  pass(g, tmp, true);
  pass(tmp, out, false);
  return out;
}

// ---------------------------------------------------------------------------
// Pairings against a test bump and the periodic-vs-direct comparison table
// ---------------------------------------------------------------------------

/// Smooth radial bump, cos^2 profile, support in |lambda - center| < radius.
struct Bump {
  cplx center{};
  double radius = 1.0;
  double operator()(cplx lam) const {
    const double r = std::abs(lam - center) / radius;
    if (r >= 1.0) return 0.0;
    const double c = std::cos(0.5 * M_PI * r);
    return c * c;
  }
};

/// <density, phi> as a discrete sum of density * phi * cell area.
inline double grid_pairing(const ScanGrid& density, const Bump& phi) {
  const double area = density.hx() * density.hy();
  double acc = 0.0;
  for (int j = 0; j < density.ny; ++j)
    for (int i = 0; i < density.nx; ++i) {
      const std::size_t k = density.idx(i, j);
      if (density.masked[k]) continue;
      acc += density.value[k] * phi(density.center(i, j)) * area;
    }
  return acc;
}

struct BifComparison {
  double direct_pairing = 0.0;
  struct Row {
    int n = 1;
    double pairing = 0.0;
    double gap = 0.0;       // |pairing - direct|
    bool monotone = true;   // gap did not grow against the previous row
  };
  std::vector<Row> rows;
};

inline BifComparison bif_compare(const ParamFamily& fam, const std::vector<int>& n_list,
                                 const Bump& bump, int nx, int ny, std::size_t n_mc,
                                 std::uint64_t seed, int workers = 1,
                                 double tol_g = 1e-9) {
  BifComparison cmp;
  const ScanGrid direct = scan_sigma(fam, nx, ny, n_mc, seed, workers);
  cmp.direct_pairing = grid_pairing(laplacian_density(direct).density, bump);
  double prev_gap = 0.0;
  bool first = true;
  for (int n : n_list) {
    const ScanGrid per = scan_sigma_periodic(fam, n, nx, ny, workers, tol_g);
    BifComparison::Row row;
    row.n = n;
    row.pairing = grid_pairing(laplacian_density(per).density, bump);
    row.gap = std::abs(row.pairing - cmp.direct_pairing);
    row.monotone = first || row.gap <= prev_gap + 1e-12;
    prev_gap = row.gap;
    first = false;
    cmp.rows.push_back(row);
  }
  return cmp;
}

}  // namespace fibdyn
