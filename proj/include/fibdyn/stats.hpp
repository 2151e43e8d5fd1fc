#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fibdyn {

/// Pairwise (cascade) summation in index order. Deterministic regardless of
/// worker count, and more accurate than a running sum for long arrays.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline double combined_se(double a, double b) { return std::hypot(a, b); }

/// Weighted mean with a delete-block jackknife standard error. Blocks are
/// contiguous so chain autocorrelation is absorbed into the block means.
inline Estimate jackknife_mean(std::span<const double> x,
                               std::span<const double> w,
                               std::size_t blocks = 50) {
  Estimate est;
  est.n = x.size();
  if (x.empty()) return est;

  std::vector<double> wx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) wx[i] = w[i] * x[i];
  const double sw = pairwise_sum(w);
  const double swx = pairwise_sum(wx);
  est.value = swx / sw;

  const std::size_t b = std::min(blocks, x.size());
  if (b < 2) return est;

  std::vector<double> leave(b);
  double mean_leave = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t lo = k * x.size() / b;
    const std::size_t hi = (k + 1) * x.size() / b;
    double bw = 0.0, bwx = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      bw += w[i];
      bwx += wx[i];
    }
    const double dw = sw - bw;
    leave[k] = dw > 0.0 ? (swx - bwx) / dw : est.value;
    mean_leave += leave[k];
  }
  mean_leave /= double(b);
  double ss = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    const double d = leave[k] - mean_leave;
    ss += d * d;
  }
  est.se = std::sqrt(ss * double(b - 1) / double(b));
  return est;
}

inline Estimate jackknife_mean(std::span<const double> x, std::size_t blocks = 50) {
  std::vector<double> w(x.size(), 1.0);
  return jackknife_mean(x, w, blocks);
}

}  // namespace fibdyn
