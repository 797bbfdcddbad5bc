#include "mesonbell/correlation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mesonbell/errors.hpp"

namespace mesonbell {

namespace {

// Arguments beyond this are flushed to an exact zero instead of an underflowing exp.
constexpr double kFlushExponent = 700.0;
constexpr double kClampNoise = 1e-15;
constexpr double kSumTolerance = 1e-12;

double decay(double exponent) { return exponent > kFlushExponent ? 0.0 : std::exp(-exponent); }

// 1 - exp(-exponent), accurate for small exponents.
double decayed(double exponent) { return exponent > kFlushExponent ? 1.0 : -std::expm1(-exponent); }

void require_width_asymmetry(double y) {
  if (!(y >= 0.0 && y < 2.0)) {
    throw DomainError(fmt::format("width asymmetry y must lie in [0, 2), got {}", y));
  }
}

// Value assigned to a per-side outcome under each question.
double question_value(CorrelationKind kind, Outcome outcome) {
  switch (outcome) {
    case Outcome::MesonAlive: return 1.0;
    case Outcome::AntimesonAlive: return -1.0;
    case Outcome::Decayed: return kind == CorrelationKind::Unitary ? -1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::NonUnitary: return "nonunitary";
    case CorrelationKind::Unitary: return "unitary";
    case CorrelationKind::Renormalized: return "renormalized";
  }
  return "unknown";
}

std::optional<CorrelationKind> parse_kind(std::string_view text) {
  for (auto kind : kAllKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::MesonAlive: return "meson";
    case Outcome::AntimesonAlive: return "antimeson";
    case Outcome::Decayed: return "decayed";
  }
  return "unknown";
}

TimePair::TimePair(double tau_left, double tau_right) : left_(tau_left), right_(tau_right) {
  if (!std::isfinite(tau_left) || tau_left < 0.0) {
    throw ValidationError("tau_l", fmt::format("left time must be finite and >= 0, got {}", tau_left));
  }
  if (!std::isfinite(tau_right) || tau_right < 0.0) {
    throw ValidationError("tau_r", fmt::format("right time must be finite and >= 0, got {}", tau_right));
  }
}

JointOutcomeTable::JointOutcomeTable(const Cells& cells) : cells_(cells) {
  for (auto& row : cells_) {
    for (double& p : row) {
      if (!std::isfinite(p) || p < -kClampNoise || p > 1.0 + kClampNoise) {
        throw InternalConsistencyError(fmt::format("joint probability {} outside [0, 1]", p));
      }
      if (p < 0.0) p = 0.0;
      if (p > 1.0) p = 1.0;
    }
  }
  if (std::abs(total() - 1.0) > kSumTolerance) {
    throw InternalConsistencyError(fmt::format("joint probabilities sum to {}", total()));
  }
}

double JointOutcomeTable::total() const noexcept {
  double sum = 0.0;
  for (const auto& row : cells_) {
    for (double p : row) sum += p;
  }
  return sum;
}

double JointOutcomeTable::both_alive() const noexcept {
  return cells_[0][0] + cells_[0][1] + cells_[1][0] + cells_[1][1];
}

double corr_nonunitary(double x, TimePair times) {
  return -std::cos(x * times.delta()) * decay(times.left() + times.right());
}

double corr_unitary(double x, double y, TimePair times) {
  require_width_asymmetry(y);
  const double g1 = 1.0 + 0.5 * y;
  const double g2 = 1.0 - 0.5 * y;
  const double l = times.left();
  const double r = times.right();
  return corr_nonunitary(x, times) + 0.5 * decayed(g1 * l) * decayed(g2 * r) +
         0.5 * decayed(g2 * l) * decayed(g1 * r);
}

double corr_renormalized(double x, double y, TimePair times) {
  require_width_asymmetry(y);
  const double dt = times.delta();
  return -std::cos(x * dt) / std::cosh(0.5 * y * dt);
}

double correlation(CorrelationKind kind, double x, double y, TimePair times) {
  switch (kind) {
    case CorrelationKind::NonUnitary: return corr_nonunitary(x, times);
    case CorrelationKind::Unitary: return corr_unitary(x, y, times);
    case CorrelationKind::Renormalized: return corr_renormalized(x, y, times);
  }
  return 0.0;
}

JointOutcomeTable joint_table(double x, double y, TimePair times) {
  require_width_asymmetry(y);
  const double g1 = 1.0 + 0.5 * y;
  const double g2 = 1.0 - 0.5 * y;
  const double l = times.left();
  const double r = times.right();
  const double dt = times.delta();

  // Surviving amplitude of (M2 M1 - M1 M2)/sqrt(2): both-alive mass splits into
  //   same flavor     s/4 (cosh(y dt/2) - cos(x dt))
  //   opposite flavor s/4 (cosh(y dt/2) + cos(x dt))
  // with s = exp(-(l + r)). Each is written as a sum of non-negative pieces.
  const double s = decay(l + r);
  const double cross_12 = decay(g1 * l + g2 * r);
  const double cross_21 = decay(g2 * l + g1 * r);
  const double k = 0.5 * y * dt;
  // s (cosh k - 1) without cancellation for small k or overflow for large k.
  const double cosh_excess =
      std::abs(k) <= 1.0 ? 2.0 * s * std::pow(std::sinh(0.5 * k), 2) : 0.5 * (cross_12 + cross_21) - s;
  const double sin_half = std::sin(0.5 * x * dt);
  const double cos_half = std::cos(0.5 * x * dt);
  const double same = 0.25 * (cosh_excess + 2.0 * s * sin_half * sin_half);
  const double opposite = 0.25 * (cosh_excess + 2.0 * s * cos_half * cos_half);

  // Alive on one side only: single-side survival minus the both-alive mass.
  // Orthogonality of the decay products to the meson states makes these exact.
  const double left_only = 0.25 * (decay(g1 * l) * decayed(g2 * r) + decay(g2 * l) * decayed(g1 * r));
  const double right_only = 0.25 * (decayed(g1 * l) * decay(g2 * r) + decayed(g2 * l) * decay(g1 * r));
  const double none = 0.5 * (decayed(g1 * l) * decayed(g2 * r) + decayed(g2 * l) * decayed(g1 * r));

  return JointOutcomeTable(JointOutcomeTable::Cells{{
      {same, opposite, left_only},
      {opposite, same, left_only},
      {right_only, right_only, none},
  }});
}

double corr_from_table(const JointOutcomeTable& table, CorrelationKind kind) {
  const CorrelationKind scoring =
      kind == CorrelationKind::Renormalized ? CorrelationKind::NonUnitary : kind;
  double expectation = 0.0;
  for (auto left : kAllOutcomes) {
    for (auto right : kAllOutcomes) {
      expectation += question_value(scoring, left) * question_value(scoring, right) * table(left, right);
    }
  }
  if (kind != CorrelationKind::Renormalized) return expectation;

  const double alive = table.both_alive();
  if (!(alive > 0.0)) {
    throw DegenerateConditioningError("no surviving pairs to condition on");
  }
  return expectation / alive;
}

}  // namespace mesonbell
