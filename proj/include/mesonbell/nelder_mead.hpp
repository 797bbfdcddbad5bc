#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mesonbell {

struct NelderMeadOptions {
  /// Largest vertex distance from the best vertex (max-norm) at which to stop.
  double x_tolerance = 1e-7;
  /// Spread of objective values across the simplex at which to stop.
  double f_tolerance = 1e-14;
  std::size_t max_evaluations = 20000;
  /// Initial simplex edge along coordinate i: relative_step * |start_i|, or
  /// zero_step when start_i is zero.
  double relative_step = 0.05;
  double zero_step = 0.00025;
};

struct NelderMeadResult {
  std::vector<double> point;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Minimizes `objective` from `start` with the standard reflection/expansion/
/// contraction/shrink moves (coefficients 1, 2, 1/2, 1/2).
NelderMeadResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& objective,
                                      std::span<const double> start,
                                      const NelderMeadOptions& options = {});

}  // namespace mesonbell
