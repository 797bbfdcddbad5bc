#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mesonbell {

/// Physical parameters of a neutral meson species, in inverse time units with hbar = 1.
/// Only the mass difference is housed; absolute masses never enter a correlation.
struct MesonSystem {
  std::string name;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double delta_m = 0.0;
};

/// Throws ValidationError naming the field for non-positive or non-finite input.
MesonSystem make_system(std::string name, double gamma1, double gamma2, double delta_m);

/// Dimensionless mixing x = |dm|/Gamma and width asymmetry y = |dGamma|/Gamma,
/// with Gamma the mean width. Kernels are even in dm, so the sign is dropped.
class ReducedSystem {
 public:
  /// Throws ValidationError unless x >= 0 and 0 <= y < 2.
  static ReducedSystem make(double x, double y);

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }

  friend bool operator==(const ReducedSystem&, const ReducedSystem&) = default;

 private:
  ReducedSystem(double x, double y) : x_(x), y_(y) {}
  double x_;
  double y_;
};

ReducedSystem reduce(const MesonSystem& system);

/// Whether a tabulated x is a measured value or a one-sided experimental limit.
enum class SystemBound { Exact, UpperBound, LowerBound };

std::string_view to_string(SystemBound bound);

struct BuiltinSystem {
  std::string name;
  ReducedSystem reduced;
  SystemBound bound;
};

/// Lifetime ratio tau(K_L)/tau(K_S) used to derive the kaon width asymmetry.
inline constexpr double kKaonLifetimeRatio = 579.0;

/// y = 2 (G_short - G_long) / (G_short + G_long) for a lifetime ratio G_short/G_long.
double width_asymmetry_from_lifetime_ratio(double ratio);

/// Default kaon y (rounded from the lifetime ratio above).
inline constexpr double kDefaultKaonY = 1.993;

/// The four tabulated systems, in the order B0, K0, D0, Bs.
std::vector<BuiltinSystem> builtin_systems(double kaon_y = kDefaultKaonY);

/// Case-sensitive lookup by the short names "B0", "K0", "D0", "Bs".
std::optional<BuiltinSystem> find_builtin(std::string_view name, double kaon_y = kDefaultKaonY);

}  // namespace mesonbell
