#include "mesonbell/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "mesonbell/errors.hpp"

namespace mesonbell {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-event values under each question; Renormalized uses the NonUnitary map
// restricted to both-alive events.
double side_value(CorrelationKind kind, Outcome outcome) {
  switch (outcome) {
    case Outcome::MesonAlive: return 1.0;
    case Outcome::AntimesonAlive: return -1.0;
    case Outcome::Decayed: return kind == CorrelationKind::Unitary ? -1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(SettingIndex setting) {
  switch (setting) {
    case SettingIndex::AB: return "AB";
    case SettingIndex::ABPrime: return "AB'";
    case SettingIndex::APrimeB: return "A'B";
    case SettingIndex::APrimeBPrime: return "A'B'";
  }
  return "unknown";
}

TimePair time_pair(const ChshSettings& s, SettingIndex setting) {
  switch (setting) {
    case SettingIndex::AB: return {s.tau_a, s.tau_b};
    case SettingIndex::ABPrime: return {s.tau_a, s.tau_b_prime};
    case SettingIndex::APrimeB: return {s.tau_a_prime, s.tau_b};
    case SettingIndex::APrimeBPrime: return {s.tau_a_prime, s.tau_b_prime};
  }
  return {s.tau_a, s.tau_b};
}

double counter_uniform(std::uint64_t seed, SettingIndex setting, std::uint64_t index) {
  // Stream key from (seed, setting); the value is splitmix64 at position `index`.
  const std::uint64_t key = mix64(seed ^ mix64(static_cast<std::uint64_t>(setting) + 1));
  const std::uint64_t bits = mix64(key + (index + 1) * kGolden);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::pair<Outcome, Outcome> draw_outcome(const JointOutcomeTable& table, double u) {
  double cumulative = 0.0;
  std::pair<Outcome, Outcome> last_positive{Outcome::Decayed, Outcome::Decayed};
  for (auto left : kAllOutcomes) {
    for (auto right : kAllOutcomes) {
      const double p = table(left, right);
      if (p <= 0.0) continue;
      cumulative += p;
      last_positive = {left, right};
      if (u < cumulative) return last_positive;
    }
  }
  // Rounding left the cumulative total just below u.
  return last_positive;
}

std::vector<EventRecord> sample_events(double x, double y, const ChshSettings& settings,
                                       std::size_t n_per_setting, std::uint64_t seed, unsigned workers) {
  if (n_per_setting < 1) throw ValidationError("n_per_setting", "n_per_setting must be at least 1");
  settings.validate(std::numeric_limits<double>::max());

  std::array<JointOutcomeTable, 4> tables{
      joint_table(x, y, time_pair(settings, SettingIndex::AB)),
      joint_table(x, y, time_pair(settings, SettingIndex::ABPrime)),
      joint_table(x, y, time_pair(settings, SettingIndex::APrimeB)),
      joint_table(x, y, time_pair(settings, SettingIndex::APrimeBPrime)),
  };

  const std::size_t total = 4 * n_per_setting;
  std::vector<EventRecord> events(total);
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto setting = static_cast<SettingIndex>(i / n_per_setting);
      const std::size_t k = i % n_per_setting;
      const auto [left, right] =
          draw_outcome(tables[static_cast<std::size_t>(setting)], counter_uniform(seed, setting, k));
      events[i] = {setting, left, right};
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(workers, 1, total);
  if (n_workers == 1) {
    fill(0, total);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (total + n_workers - 1) / n_workers;
    for (std::size_t begin = 0; begin < total; begin += chunk) {
      pool.emplace_back(fill, begin, std::min(total, begin + chunk));
    }
  }
  return events;
}

EstimatorResult estimate_correlation(std::span<const EventRecord> events, CorrelationKind kind) {
  if (events.empty()) throw DegenerateSampleError("no events to estimate from");
  const SettingIndex setting = events.front().setting;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t used = 0;
  for (const auto& e : events) {
    if (e.setting != setting) {
      throw ValidationError("events", "estimate_correlation expects events from a single setting");
    }
    if (kind == CorrelationKind::Renormalized && (e.left == Outcome::Decayed || e.right == Outcome::Decayed)) {
      continue;
    }
    const double v = side_value(kind, e.left) * side_value(kind, e.right);
    sum += v;
    sum_sq += v * v;
    ++used;
  }
  if (used == 0) {
    throw DegenerateSampleError(fmt::format("no both-alive events at setting {} to condition on", to_string(setting)));
  }

  EstimatorResult r;
  r.n_used = used;
  r.n_total = events.size();
  const double n = static_cast<double>(used);
  r.value = sum / n;
  if (used > 1) {
    const double variance = std::max(0.0, (sum_sq - n * r.value * r.value) / (n - 1.0));
    r.std_error = std::sqrt(variance / n);
  }
  return r;
}

ChshEstimate estimate_chsh(std::span<const EventRecord> events, CorrelationKind kind) {
  std::array<std::vector<EventRecord>, 4> by_setting;
  for (const auto& e : events) by_setting[static_cast<std::size_t>(e.setting)].push_back(e);

  ChshEstimate out;
  for (auto setting : kAllSettings) {
    const auto i = static_cast<std::size_t>(setting);
    try {
      out.per_setting[i] = estimate_correlation(by_setting[i], kind);
    } catch (const DegenerateSampleError& e) {
      throw DegenerateSampleError(fmt::format("setting {}: {}", to_string(setting), e.what()));
    }
  }

  const auto& [ab, abp, apb, apbp] = out.per_setting;
  const double first = ab.value - abp.value;
  const double second = apb.value + apbp.value;
  const double first_err = std::hypot(ab.std_error, abp.std_error);
  const double second_err = std::hypot(apb.std_error, apbp.std_error);

  // Delta method through |.|: the sign of each argument only flips the
  // derivative, so the errors add in quadrature.
  out.chsh.value = std::abs(first) + std::abs(second);
  out.chsh.std_error = std::hypot(first_err, second_err);
  out.chsh.near_kink = (first_err > 0.0 && std::abs(first) < first_err) ||
                       (second_err > 0.0 && std::abs(second) < second_err);
  for (const auto& r : out.per_setting) {
    out.chsh.n_used += r.n_used;
    out.chsh.n_total += r.n_total;
  }
  return out;
}

}  // namespace mesonbell
