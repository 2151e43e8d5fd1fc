#pragma once

#include <stdexcept>
#include <string>

namespace fibdyn {

/// Root finder hit its iteration cap with residuals above tolerance.
struct NonConvergence : std::runtime_error {
  explicit NonConvergence(const std::string& what, int failed = 0)
      : std::runtime_error(what), failed_count(failed) {}
  int failed_count;
};

/// Input is numerically meaningless (all-zero polynomial, overflowed
/// coefficients, missing data).
struct DegenerateInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Requested tail bound cannot be reached within the iteration cap.
struct ToleranceUnreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A fiber restriction lost its structure (identically zero critical form,
/// collapsed leading coefficient).
struct DegenerateFiber : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Too many sample points fell onto a log singularity.
struct SingularSample : std::runtime_error {
  SingularSample(const std::string& what, std::size_t dropped, std::size_t total)
      : std::runtime_error(what), dropped(dropped), total(total) {}
  std::size_t dropped;
  std::size_t total;
};

/// Composition would exceed the configured degree cap.
struct DegreeCapExceeded : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace fibdyn
