#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mesonbell/chsh.hpp"
#include "mesonbell/correlation.hpp"

namespace mesonbell {

/// Which of the four time pairs of the CHSH combination an event was drawn at.
enum class SettingIndex : std::uint8_t { AB = 0, ABPrime = 1, APrimeB = 2, APrimeBPrime = 3 };

inline constexpr std::array<SettingIndex, 4> kAllSettings{SettingIndex::AB, SettingIndex::ABPrime,
                                                          SettingIndex::APrimeB,
                                                          SettingIndex::APrimeBPrime};

std::string_view to_string(SettingIndex setting);

/// (tau_l, tau_r) of one setting pair.
TimePair time_pair(const ChshSettings& settings, SettingIndex setting);

struct EventRecord {
  SettingIndex setting;
  Outcome left;
  Outcome right;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Counter-based uniform variate in [0, 1): a splitmix64 stream keyed by
/// (seed, setting) and evaluated at position `index`. Identical arguments always
/// give the same value, independent of how generation is split across threads.
double counter_uniform(std::uint64_t seed, SettingIndex setting, std::uint64_t index);

/// Inverse-CDF draw over the nine cells in row-major order (left outer, right inner,
/// each in MesonAlive, AntimesonAlive, Decayed order).
std::pair<Outcome, Outcome> draw_outcome(const JointOutcomeTable& table, double u);

/// 4 * n_per_setting events, setting-major: all AB events first, then AB', A'B, A'B'.
std::vector<EventRecord> sample_events(double x, double y, const ChshSettings& settings,
                                       std::size_t n_per_setting, std::uint64_t seed,
                                       unsigned workers = 1);

struct EstimatorResult {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_used = 0;
  std::size_t n_total = 0;
  /// Set by estimate_chsh when an absolute-value argument is within one
  /// standard error of zero, where the propagated error is unreliable.
  bool near_kink = false;
};

/// `events` must all share one setting (else ValidationError). Throws
/// DegenerateSampleError when no event is eligible for the estimator.
EstimatorResult estimate_correlation(std::span<const EventRecord> events, CorrelationKind kind);

struct ChshEstimate {
  EstimatorResult chsh;
  std::array<EstimatorResult, 4> per_setting;
};

/// CHSH combination of the per-setting estimates with errors added in quadrature.
ChshEstimate estimate_chsh(std::span<const EventRecord> events, CorrelationKind kind);

}  // namespace mesonbell
