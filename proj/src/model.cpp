#include "mesonbell/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mesonbell/errors.hpp"

namespace mesonbell {

namespace {

void require_positive_width(const char* field, double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ValidationError(field, fmt::format("{} must be a positive finite width, got {}", field, value));
  }
}

}  // namespace

MesonSystem make_system(std::string name, double gamma1, double gamma2, double delta_m) {
  require_positive_width("gamma1", gamma1);
  require_positive_width("gamma2", gamma2);
  if (!std::isfinite(delta_m)) {
    throw ValidationError("delta_m", fmt::format("delta_m must be finite, got {}", delta_m));
  }
  return MesonSystem{std::move(name), gamma1, gamma2, delta_m};
}

ReducedSystem ReducedSystem::make(double x, double y) {
  if (!std::isfinite(x) || x < 0.0) {
    throw ValidationError("x", fmt::format("x must be finite and >= 0, got {}", x));
  }
  if (!std::isfinite(y) || y < 0.0 || y >= 2.0) {
    throw ValidationError("y", fmt::format("y must lie in [0, 2), got {}", y));
  }
  return ReducedSystem(x, y);
}

ReducedSystem reduce(const MesonSystem& system) {
  const MesonSystem checked = make_system(system.name, system.gamma1, system.gamma2, system.delta_m);
  const double gamma = 0.5 * (checked.gamma1 + checked.gamma2);
  return ReducedSystem::make(std::abs(checked.delta_m) / gamma,
                             std::abs(checked.gamma1 - checked.gamma2) / gamma);
}

std::string_view to_string(SystemBound bound) {
  switch (bound) {
    case SystemBound::Exact: return "exact";
    case SystemBound::UpperBound: return "upper_bound";
    case SystemBound::LowerBound: return "lower_bound";
  }
  return "unknown";
}

double width_asymmetry_from_lifetime_ratio(double ratio) {
  if (!std::isfinite(ratio) || ratio < 1.0) {
    throw ValidationError("ratio", fmt::format("lifetime ratio must be >= 1, got {}", ratio));
  }
  return 2.0 * (ratio - 1.0) / (ratio + 1.0);
}

std::vector<BuiltinSystem> builtin_systems(double kaon_y) {
  return {
      {"B0", ReducedSystem::make(0.77, 0.0), SystemBound::Exact},
      {"K0", ReducedSystem::make(0.95, kaon_y), SystemBound::Exact},
      {"D0", ReducedSystem::make(0.03, 0.0), SystemBound::UpperBound},
      {"Bs", ReducedSystem::make(20.60, 0.0), SystemBound::LowerBound},
  };
}

std::optional<BuiltinSystem> find_builtin(std::string_view name, double kaon_y) {
  for (auto& entry : builtin_systems(kaon_y)) {
    if (entry.name == name) return entry;
  }
  return std::nullopt;
}

}  // namespace mesonbell
