#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mesonbell/correlation.hpp"
#include "mesonbell/model.hpp"

namespace mesonbell {

/// S must exceed 2 by more than this to count as a violation.
inline constexpr double kViolationMargin = 1e-6;

/// The four analyzer times (tau_A, tau_A', tau_B, tau_B'), in mean lifetimes.
struct ChshSettings {
  double tau_a = 0.0;
  double tau_a_prime = 0.0;
  double tau_b = 0.0;
  double tau_b_prime = 0.0;

  std::array<double, 4> as_array() const { return {tau_a, tau_a_prime, tau_b, tau_b_prime}; }
  static ChshSettings from_array(const std::array<double, 4>& t) { return {t[0], t[1], t[2], t[3]}; }

  /// Throws ValidationError unless every time is finite and within [0, t_max].
  void validate(double t_max) const;

  friend bool operator==(const ChshSettings&, const ChshSettings&) = default;
};

/// |E(A,B) - E(A,B')| + |E(A',B) + E(A',B')|.
double chsh_value(CorrelationKind kind, double x, double y, const ChshSettings& settings);

struct OptimizerOptions {
  double t_max = 8.0;
  /// Seeding grid points per axis (grid_points^4 seeds in total).
  std::size_t grid_points = 13;
  /// Best grid seeds handed to local refinement.
  std::size_t refined_seeds = 32;
  double parameter_tolerance = 1e-7;
  std::size_t max_evaluations_per_seed = 20000;
  /// Threads used for refinement. Results do not depend on this value.
  unsigned workers = 1;

  void validate() const;
};

struct MaxResult {
  double s_max = 0.0;
  ChshSettings settings;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Deterministic multistart search for sup S over [0, t_max]^4.
MaxResult maximize_chsh(CorrelationKind kind, double x, double y, const OptimizerOptions& options = {});

struct ThresholdOptions {
  OptimizerOptions optimizer;
  /// Final bracket width.
  double tolerance = 1e-3;
  double initial_lo = 0.5;
  double initial_hi = 10.0;
  double min_x = 0.01;
  double max_x = 100.0;
  /// Points of the crossing-uniqueness scan run over the bracket before bisecting.
  std::size_t check_points = 9;
};

struct ThresholdResult {
  double critical_x = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double s_at_critical = 0.0;
  std::size_t iterations = 0;
};

/// Bisects x on S_max(x) - 2 - kViolationMargin. Only NonUnitary and Unitary have
/// a threshold; Renormalized throws DomainError. Throws BracketingError when no
/// sign change exists in [min_x, max_x] or the scan shows more than one crossing.
ThresholdResult find_threshold(CorrelationKind kind, double y, const ThresholdOptions& options = {});

struct ScanPoint {
  double x = 0.0;
  MaxResult result;
};

/// One independent maximization per grid value, output in input order.
std::vector<ScanPoint> scan_x(CorrelationKind kind, double y, std::span<const double> x_grid,
                              const OptimizerOptions& options = {});

struct KindVerdict {
  CorrelationKind kind;
  bool violates = false;
  MaxResult result;
  std::optional<std::string> caveat;
};

/// Violation = S_max > 2 + kViolationMargin, with a caveat for one-sided x limits.
std::vector<KindVerdict> verdict(const ReducedSystem& system, SystemBound bound,
                                 std::span<const CorrelationKind> kinds,
                                 const OptimizerOptions& options = {});

}  // namespace mesonbell
