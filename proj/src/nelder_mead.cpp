#include "mesonbell/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mesonbell {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Vertex {
  std::vector<double> point;
  double value;
};

}  // namespace

NelderMeadResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& objective,
                                      std::span<const double> start, const NelderMeadOptions& options) {
  const std::size_t n = start.size();
  std::size_t evaluations = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++evaluations;
    return objective(p);
  };

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  std::vector<double> origin(start.begin(), start.end());
  simplex.push_back({origin, eval(origin)});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p = origin;
    p[i] = p[i] != 0.0 ? p[i] * (1.0 + options.relative_step) : options.zero_step;
    simplex.push_back({p, eval(p)});
  }

  // Stable sort keeps the older vertex first among equal values, so ties resolve
  // the same way on every run.
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
  };
  auto converged = [&] {
    const auto& best = simplex.front();
    double spread = simplex.back().value - best.value;
    double size = 0.0;
    for (std::size_t v = 1; v <= n; ++v) {
      for (std::size_t i = 0; i < n; ++i) {
        size = std::max(size, std::abs(simplex[v].point[i] - best.point[i]));
      }
    }
    return size <= options.x_tolerance && spread <= options.f_tolerance;
  };
  auto along = [&](const std::vector<double>& centroid, const std::vector<double>& from, double t) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (from[i] - centroid[i]);
    return p;
  };

  order();
  bool done = converged();
  while (!done && evaluations < options.max_evaluations) {
    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].point[i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    Vertex& worst = simplex.back();
    const double second_worst = simplex[n - 1].value;
    auto reflected = along(centroid, worst.point, -kReflect);
    const double f_reflected = eval(reflected);

    if (f_reflected < simplex.front().value) {
      auto expanded = along(centroid, worst.point, -kExpand);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        worst = {std::move(expanded), f_expanded};
      } else {
        worst = {std::move(reflected), f_reflected};
      }
    } else if (f_reflected < second_worst) {
      worst = {std::move(reflected), f_reflected};
    } else {
      const bool outside = f_reflected < worst.value;
      auto contracted = outside ? along(centroid, reflected, kContract) : along(centroid, worst.point, kContract);
      const double f_contracted = eval(contracted);
      if (f_contracted < std::min(f_reflected, worst.value)) {
        worst = {std::move(contracted), f_contracted};
      } else {
        const auto best = simplex.front().point;
        for (std::size_t v = 1; v <= n; ++v) {
          for (std::size_t i = 0; i < n; ++i) {
            simplex[v].point[i] = best[i] + kShrink * (simplex[v].point[i] - best[i]);
          }
          simplex[v].value = eval(simplex[v].point);
        }
      }
    }
    order();
    done = converged();
  }

  return {simplex.front().point, simplex.front().value, evaluations, done};
}

}  // namespace mesonbell
