#include "mesonbell/chsh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "mesonbell/errors.hpp"
#include "mesonbell/nelder_mead.hpp"

namespace mesonbell {

namespace {

// Agreement required between the two best refined seeds to report convergence.
constexpr double kSeedAgreement = 1e-6;
constexpr double kTieTolerance = 1e-12;
// Seeds on a face of the box start this far inside it (in u). On the faces S is
// often flat at exactly 2, which leaves the simplex nothing to follow.
constexpr double kFaceOffset = 0.05;
// Fresh-simplex restarts from the incumbent after the first convergence.
constexpr int kRestarts = 2;

struct Candidate {
  double value;
  std::array<double, 4> times;
  bool converged;
  std::size_t evaluations;
};

// Higher S first, then lexicographically smaller settings.
bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.times < b.times;
}

double chsh_from_array(CorrelationKind kind, double x, double y, const std::array<double, 4>& t) {
  return chsh_value(kind, x, y, ChshSettings::from_array(t));
}

// Refines one seed. The box [0, t_max]^4 is mapped onto all of R^4 by
// tau = t_max sin^2(u), so the simplex can approach a face without clipping.
Candidate refine(CorrelationKind kind, double x, double y, const std::array<double, 4>& seed,
                 double seed_value, const OptimizerOptions& options) {
  const double t_max = options.t_max;
  auto to_times = [t_max](std::span<const double> u) {
    std::array<double, 4> t{};
    for (std::size_t i = 0; i < 4; ++i) {
      const double s = std::sin(u[i]);
      t[i] = std::clamp(t_max * s * s, 0.0, t_max);
    }
    return t;
  };

  std::vector<double> start(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const double u = std::asin(std::sqrt(std::clamp(seed[i] / t_max, 0.0, 1.0)));
    start[i] = std::clamp(u, kFaceOffset, 0.5 * std::numbers::pi - kFaceOffset);
  }

  NelderMeadOptions nm;
  // dtau = t_max sin(2u) du, so this angle tolerance bounds the time tolerance.
  nm.x_tolerance = options.parameter_tolerance / t_max;
  nm.f_tolerance = 1e-14;
  nm.max_evaluations = options.max_evaluations_per_seed;

  auto objective = [&](std::span<const double> u) { return -chsh_from_array(kind, x, y, to_times(u)); };
  auto result = nelder_mead_minimize(objective, start, nm);
  std::size_t evaluations = result.evaluations;
  for (int r = 0; r < kRestarts && result.converged; ++r) {
    auto again = nelder_mead_minimize(objective, result.point, nm);
    evaluations += again.evaluations;
    const bool improved = again.value < result.value;
    if (again.value <= result.value) result = std::move(again);
    if (!improved) break;
  }

  Candidate refined{chsh_from_array(kind, x, y, to_times(result.point)), to_times(result.point),
                    result.converged, 4 * evaluations};
  if (refined.value < seed_value) {
    refined.value = seed_value;
    refined.times = seed;
  }
  return refined;
}

void require_kernel_parameters(double x, double y) {
  if (!std::isfinite(x) || x < 0.0) throw ValidationError("x", fmt::format("x must be finite and >= 0, got {}", x));
  if (!(y >= 0.0 && y < 2.0)) throw DomainError(fmt::format("width asymmetry y must lie in [0, 2), got {}", y));
}

}  // namespace

void ChshSettings::validate(double t_max) const {
  static constexpr std::array<const char*, 4> kNames{"tau_a", "tau_a_prime", "tau_b", "tau_b_prime"};
  const auto t = as_array();
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(t[i]) || t[i] < 0.0 || t[i] > t_max) {
      throw ValidationError(kNames[i], fmt::format("{} must lie in [0, {}], got {}", kNames[i], t_max, t[i]));
    }
  }
}

double chsh_value(CorrelationKind kind, double x, double y, const ChshSettings& s) {
  auto e = [&](double l, double r) { return correlation(kind, x, y, TimePair(l, r)); };
  return std::abs(e(s.tau_a, s.tau_b) - e(s.tau_a, s.tau_b_prime)) +
         std::abs(e(s.tau_a_prime, s.tau_b) + e(s.tau_a_prime, s.tau_b_prime));
}

void OptimizerOptions::validate() const {
  if (!std::isfinite(t_max) || t_max <= 0.0) throw ValidationError("t_max", fmt::format("t_max must be > 0, got {}", t_max));
  if (grid_points < 2) throw ValidationError("grid_points", "grid_points must be at least 2");
  if (refined_seeds < 1) throw ValidationError("refined_seeds", "refined_seeds must be at least 1");
  if (!(parameter_tolerance > 0.0)) throw ValidationError("parameter_tolerance", "parameter_tolerance must be > 0");
  if (max_evaluations_per_seed < 10) throw ValidationError("max_evaluations_per_seed", "iteration cap too small");
}

MaxResult maximize_chsh(CorrelationKind kind, double x, double y, const OptimizerOptions& options) {
  options.validate();
  require_kernel_parameters(x, y);

  const std::size_t g = options.grid_points;
  std::vector<double> axis(g);
  for (std::size_t i = 0; i < g; ++i) axis[i] = options.t_max * static_cast<double>(i) / static_cast<double>(g - 1);

  std::vector<double> table(g * g);
  for (std::size_t l = 0; l < g; ++l) {
    for (std::size_t r = 0; r < g; ++r) table[l * g + r] = correlation(kind, x, y, TimePair(axis[l], axis[r]));
  }
  std::size_t evaluations = g * g;

  // Seeds in lexicographic index order; a stable partial ordering by value keeps
  // the earliest index among ties.
  std::vector<std::pair<double, std::uint32_t>> seeds;
  seeds.reserve(g * g * g * g);
  std::uint32_t index = 0;
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t ap = 0; ap < g; ++ap) {
      for (std::size_t b = 0; b < g; ++b) {
        for (std::size_t bp = 0; bp < g; ++bp, ++index) {
          const double s = std::abs(table[a * g + b] - table[a * g + bp]) + std::abs(table[ap * g + b] + table[ap * g + bp]);
          seeds.emplace_back(s, index);
        }
      }
    }
  }
  const std::size_t k = std::min(options.refined_seeds, seeds.size());
  std::partial_sort(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(k), seeds.end(),
                    [](const auto& p, const auto& q) { return p.first != q.first ? p.first > q.first : p.second < q.second; });

  auto seed_times = [&](std::uint32_t idx) {
    std::array<double, 4> t{};
    for (int i = 3; i >= 0; --i) {
      t[static_cast<std::size_t>(i)] = axis[idx % g];
      idx /= static_cast<std::uint32_t>(g);
    }
    return t;
  };

  std::vector<Candidate> refined(k);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < k; i = next++) {
      refined[i] = refine(kind, x, y, seed_times(seeds[i].second), seeds[i].first, options);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(k)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (auto& c : refined) {
    evaluations += c.evaluations;
    if (kind == CorrelationKind::Renormalized) {
      // Only time differences enter; the earliest-time representative keeps the
      // most pairs alive in a pseudo-experiment.
      const double earliest = *std::min_element(c.times.begin(), c.times.end());
      for (double& t : c.times) t -= earliest;
      c.value = chsh_from_array(kind, x, y, c.times);
    }
  }
  std::sort(refined.begin(), refined.end(), better);

  // Candidates within kTieTolerance of the best count as equal; the
  // lexicographically smallest settings among them is reported.
  const Candidate* chosen = &refined.front();
  for (const auto& c : refined) {
    if (c.value >= refined.front().value - kTieTolerance && c.times < chosen->times) chosen = &c;
  }

  MaxResult result;
  result.settings = ChshSettings::from_array(chosen->times);
  result.s_max = chosen->value;
  result.evaluations = evaluations;
  result.converged = refined.front().converged &&
                     (k == 1 || refined[1].value >= refined.front().value - kSeedAgreement);
  return result;
}

std::vector<ScanPoint> scan_x(CorrelationKind kind, double y, std::span<const double> x_grid,
                              const OptimizerOptions& options) {
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!std::isfinite(x_grid[i]) || x_grid[i] < 0.0) {
      throw ValidationError("x_grid", fmt::format("x_grid[{}] = {} must be finite and >= 0", i, x_grid[i]));
    }
    if (i > 0 && !(x_grid[i] > x_grid[i - 1])) {
      throw ValidationError("x_grid", fmt::format("x_grid must be strictly increasing at index {}", i));
    }
  }
  std::vector<ScanPoint> points;
  points.reserve(x_grid.size());
  for (double x : x_grid) {
    try {
      points.push_back({x, maximize_chsh(kind, x, y, options)});
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("at x = {}: {}", x, e.what()));
    }
  }
  return points;
}

ThresholdResult find_threshold(CorrelationKind kind, double y, const ThresholdOptions& options) {
  if (kind == CorrelationKind::Renormalized) {
    throw DomainError("the renormalized correlation exceeds S = 2 for every x > 0; it has no threshold");
  }
  if (!(options.tolerance > 0.0)) throw ValidationError("tolerance", "tolerance must be > 0");
  if (!(options.min_x > 0.0 && options.min_x <= options.initial_lo && options.initial_lo < options.initial_hi &&
        options.initial_hi <= options.max_x)) {
    throw ValidationError("bracket", "need 0 < min_x <= initial_lo < initial_hi <= max_x");
  }
  if (options.check_points < 2) throw ValidationError("check_points", "check_points must be at least 2");
  require_kernel_parameters(1.0, y);

  auto excess = [&](double x) { return maximize_chsh(kind, x, y, options.optimizer).s_max - 2.0 - kViolationMargin; };

  double lo = options.initial_lo;
  double hi = options.initial_hi;
  while (excess(lo) > 0.0) {
    if (lo <= options.min_x) throw BracketingError(fmt::format("S_max exceeds 2 already at x = {}", lo));
    hi = lo;
    lo = std::max(options.min_x, 0.5 * lo);
  }
  while (!(excess(hi) > 0.0)) {
    if (hi >= options.max_x) throw BracketingError(fmt::format("S_max does not exceed 2 up to x = {}", hi));
    lo = hi;
    hi = std::min(options.max_x, 2.0 * hi);
  }

  // The bisection relies on a single crossing; check the sign pattern on a scan.
  std::vector<double> grid(options.check_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  const auto scan = scan_x(kind, y, grid, options.optimizer);
  std::size_t first_violating = scan.size();
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const bool violating = scan[i].result.s_max - 2.0 - kViolationMargin > 0.0;
    if (violating && first_violating == scan.size()) first_violating = i;
    if (!violating && first_violating != scan.size()) {
      throw BracketingError(fmt::format("S_max(x) crosses 2 more than once in [{}, {}]", lo, hi));
    }
  }
  if (first_violating == 0 || first_violating == scan.size()) {
    throw BracketingError(fmt::format("no sign change of S_max - 2 on the scan of [{}, {}]", lo, hi));
  }
  lo = grid[first_violating - 1];
  hi = grid[first_violating];

  std::size_t iterations = 0;
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? hi : lo) = mid;
    ++iterations;
  }

  ThresholdResult result;
  result.x_lo = lo;
  result.x_hi = hi;
  result.critical_x = 0.5 * (lo + hi);
  result.s_at_critical = maximize_chsh(kind, result.critical_x, y, options.optimizer).s_max;
  result.iterations = iterations;
  return result;
}

std::vector<KindVerdict> verdict(const ReducedSystem& system, SystemBound bound,
                                 std::span<const CorrelationKind> kinds, const OptimizerOptions& options) {
  std::vector<KindVerdict> out;
  out.reserve(kinds.size());
  for (auto kind : kinds) {
    KindVerdict v{kind, false, maximize_chsh(kind, system.x(), system.y(), options), std::nullopt};
    v.violates = v.result.s_max > 2.0 + kViolationMargin;
    switch (bound) {
      case SystemBound::Exact: break;
      case SystemBound::UpperBound:
        v.caveat = "x is an experimental upper bound: no violation for all x below bound";
        break;
      case SystemBound::LowerBound:
        v.caveat = "x is an experimental lower bound: violation for all x above bound given monotone crossing";
        break;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mesonbell
