#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mesonbell {

/// Which dichotomic question is asked of each side.
///   NonUnitary:   "meson or antimeson?" with decays scored 0.
///   Unitary:      "meson or not?" with decays scored as "not".
///   Renormalized: NonUnitary conditioned on both mesons surviving.
enum class CorrelationKind { NonUnitary, Unitary, Renormalized };

inline constexpr std::array<CorrelationKind, 3> kAllKinds{
    CorrelationKind::NonUnitary, CorrelationKind::Unitary, CorrelationKind::Renormalized};

std::string_view to_string(CorrelationKind kind);
/// Accepts "nonunitary", "unitary", "renormalized" (case-sensitive).
std::optional<CorrelationKind> parse_kind(std::string_view text);

/// Measurement times on the left and right side in units of the mean lifetime.
class TimePair {
 public:
  /// Throws ValidationError for negative or non-finite times.
  TimePair(double tau_left, double tau_right);

  double left() const noexcept { return left_; }
  double right() const noexcept { return right_; }
  double delta() const noexcept { return left_ - right_; }

 private:
  double left_;
  double right_;
};

/// Per-side outcome of a measurement at a fixed time.
enum class Outcome : std::uint8_t { MesonAlive = 0, AntimesonAlive = 1, Decayed = 2 };

inline constexpr std::array<Outcome, 3> kAllOutcomes{Outcome::MesonAlive, Outcome::AntimesonAlive,
                                                     Outcome::Decayed};

std::string_view to_string(Outcome outcome);

/// Joint probabilities p(left, right) over the three per-side outcomes.
class JointOutcomeTable {
 public:
  using Cells = std::array<std::array<double, 3>, 3>;

  /// Clamps entries in (-1e-15, 0) to zero. Throws InternalConsistencyError for
  /// anything more negative, above 1, or a total off by more than 1e-12.
  explicit JointOutcomeTable(const Cells& cells);

  double operator()(Outcome left, Outcome right) const noexcept {
    return cells_[static_cast<int>(left)][static_cast<int>(right)];
  }
  const Cells& cells() const noexcept { return cells_; }

  double total() const noexcept;
  /// Mass on the four cells where neither side has decayed.
  double both_alive() const noexcept;

 private:
  Cells cells_;
};

/// -cos(x dtau) exp(-(tau_l + tau_r)).
double corr_nonunitary(double x, TimePair times);

/// Non-unitary term plus the decay-product contributions with widths 1 +- y/2.
/// Throws DomainError unless 0 <= y < 2.
double corr_unitary(double x, double y, TimePair times);

/// -cos(x dtau) / cosh(y dtau / 2).
double corr_renormalized(double x, double y, TimePair times);

double correlation(CorrelationKind kind, double x, double y, TimePair times);

/// Outcome probabilities of the entangled pair evolved to (tau_l, tau_r).
/// Throws DomainError unless 0 <= y < 2.
JointOutcomeTable joint_table(double x, double y, TimePair times);

/// Expectation of the product of per-side values under the given question.
/// Renormalized throws DegenerateConditioningError if no both-alive mass remains.
double corr_from_table(const JointOutcomeTable& table, CorrelationKind kind);

}  // namespace mesonbell
