#include "mesonbell/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mesonbell/chsh.hpp"
#include "mesonbell/correlation.hpp"
#include "mesonbell/errors.hpp"
#include "mesonbell/model.hpp"
#include "mesonbell/montecarlo.hpp"

namespace mesonbell::cli {

namespace {

using nlohmann::ordered_json;

constexpr double kQuotedNI = 2.6;
constexpr double kQuotedNII = 2.0;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  std::string output;
  std::string format;
  double t_max = 8.0;
  std::size_t grid_points = 13;
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double kaon_y = kDefaultKaonY;
};

ordered_json num(double value) { return std::strtod(format_number(value).c_str(), nullptr); }

ordered_json settings_json(const ChshSettings& s) {
  return {{"tau_a", num(s.tau_a)},
          {"tau_a_prime", num(s.tau_a_prime)},
          {"tau_b", num(s.tau_b)},
          {"tau_b_prime", num(s.tau_b_prime)}};
}

std::string quoted_x(std::string_view name) {
  if (name == "B0") return "0.77";
  if (name == "K0") return "0.95";
  if (name == "D0") return "< 0.03";
  if (name == "Bs") return "> 20.60";
  return "";
}

CorrelationKind kind_from_flag(const std::string& text) {
  auto kind = parse_kind(text);
  if (!kind) throw UsageError(fmt::format("--kind: unknown correlation kind '{}'", text));
  return *kind;
}

BuiltinSystem system_from_flag(const std::string& name, double kaon_y) {
  auto system = find_builtin(name, kaon_y);
  if (!system) throw UsageError(fmt::format("--system: unknown system '{}' (expected B0, K0, D0 or Bs)", name));
  return *system;
}

OptimizerOptions optimizer_from(const GlobalFlags& g) {
  OptimizerOptions o;
  o.t_max = g.t_max;
  o.grid_points = g.grid_points;
  o.workers = g.workers;
  return o;
}

// Resolves --system versus --x/--y into reduced parameters.
struct Target {
  std::optional<std::string> system;
  ReducedSystem reduced;
  SystemBound bound = SystemBound::Exact;
};

Target resolve_target(const std::string& system, std::optional<double> x, std::optional<double> y,
                      double kaon_y) {
  if (!system.empty()) {
    auto builtin = system_from_flag(system, kaon_y);
    return {builtin.name, builtin.reduced, builtin.bound};
  }
  if (!x) throw UsageError("--x: required unless --system is given");
  try {
    return {std::nullopt, ReducedSystem::make(*x, y.value_or(0.0)), SystemBound::Exact};
  } catch (const ValidationError& e) {
    throw UsageError(fmt::format("--{}: {}", e.field(), e.what()));
  }
}

class Emitter {
 public:
  Emitter(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::out | std::ios::trunc);
      if (!file_) throw std::runtime_error(fmt::format("--output: cannot open '{}' for writing", path));
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

void write_json(const GlobalFlags& g, std::ostream& out, const ordered_json& doc) {
  Emitter emitter(g.output, out);
  emitter.stream() << doc.dump(2) << '\n';
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) return "0";
  return fmt::format("{:.9g}", value);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell-CHSH analysis of entangled neutral-meson pairs", "mesonbell"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--output", g.output, "Write primary output to this file instead of stdout");
  app.add_option("--format", g.format, "Output format (json or csv)")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--t-max", g.t_max, "Upper end of the time domain, in mean lifetimes")->capture_default_str();
  app.add_option("--grid-points", g.grid_points, "Seeding grid points per time axis")->capture_default_str();
  app.add_option("--tolerance", g.tolerance, "Threshold bracket width")->capture_default_str();
  app.add_option("--seed", g.seed, "Pseudo-experiment seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (results do not depend on this)")->capture_default_str();
  app.add_option("--kaon-y", g.kaon_y, "Width asymmetry used for the K0 system")->capture_default_str();

  // threshold
  auto* threshold = app.add_subcommand("threshold", "Critical x at which S_max first exceeds 2");
  std::string threshold_kind;
  double threshold_y = 0.0;
  bool threshold_quote = false;
  threshold->add_option("--kind", threshold_kind, "nonunitary or unitary")->required();
  threshold->add_option("--y", threshold_y, "Width asymmetry y in [0, 2)")->capture_default_str();
  threshold->add_flag("--quote-paper", threshold_quote, "Print the published bounds next to the result");

  // scan
  auto* scan = app.add_subcommand("scan", "S_max over an evenly spaced x grid");
  std::string scan_kind;
  double scan_y = 0.0;
  double x_from = 0.0;
  double x_to = 0.0;
  std::size_t x_steps = 0;
  scan->add_option("--kind", scan_kind, "nonunitary, unitary or renormalized")->required();
  scan->add_option("--y", scan_y, "Width asymmetry y in [0, 2)")->capture_default_str();
  scan->add_option("--x-from", x_from, "First x value")->required();
  scan->add_option("--x-to", x_to, "Last x value")->required();
  scan->add_option("--x-steps", x_steps, "Number of grid points (>= 1)")->required();

  // maximize
  auto* maximize = app.add_subcommand("maximize", "Maximize S over the four measurement times");
  std::string max_kind;
  std::string max_system;
  std::optional<double> max_x;
  std::optional<double> max_y;
  maximize->add_option("--kind", max_kind, "nonunitary, unitary or renormalized")->required();
  auto* max_system_opt = maximize->add_option("--system", max_system, "Built-in system: B0, K0, D0, Bs");
  maximize->add_option("--x", max_x, "Mixing parameter x = dm/Gamma")->excludes(max_system_opt);
  maximize->add_option("--y", max_y, "Width asymmetry y = dGamma/Gamma")->excludes(max_system_opt);

  // verdict
  auto* verdict_cmd = app.add_subcommand("verdict", "Violation verdicts for the built-in systems");
  std::string verdict_target;
  std::string verdict_system;
  std::vector<std::string> verdict_kinds{"nonunitary", "unitary"};
  bool verdict_quote = false;
  verdict_cmd->add_option("target", verdict_target, "'all' or a system name");
  verdict_cmd->add_option("--system", verdict_system, "Built-in system: B0, K0, D0, Bs");
  verdict_cmd->add_option("--kinds", verdict_kinds, "Correlation kinds to evaluate")->capture_default_str();
  verdict_cmd->add_flag("--quote-paper", verdict_quote, "Print the published x table and bounds");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Pseudo-experiment estimate of the correlations and S");
  std::string sim_kind;
  std::string sim_system;
  std::optional<double> sim_x;
  std::optional<double> sim_y;
  std::size_t n_events = 100000;
  std::array<std::optional<double>, 4> taus;
  std::string events_csv;
  simulate->add_option("--kind", sim_kind, "nonunitary, unitary or renormalized")->required();
  auto* sim_system_opt = simulate->add_option("--system", sim_system, "Built-in system: B0, K0, D0, Bs");
  simulate->add_option("--x", sim_x, "Mixing parameter x = dm/Gamma")->excludes(sim_system_opt);
  simulate->add_option("--y", sim_y, "Width asymmetry y = dGamma/Gamma")->excludes(sim_system_opt);
  simulate->add_option("--n-events", n_events, "Events per setting")->capture_default_str();
  simulate->add_option("--tau-a", taus[0], "Time tau_A (all four or none; none = maximizing settings)");
  simulate->add_option("--tau-a-prime", taus[1], "Time tau_A'");
  simulate->add_option("--tau-b", taus[2], "Time tau_B");
  simulate->add_option("--tau-b-prime", taus[3], "Time tau_B'");
  simulate->add_option("--events-csv", events_csv, "Also dump every event to this CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!(g.t_max > 0.0)) throw UsageError("--t-max: must be > 0");
    if (g.grid_points < 2) throw UsageError("--grid-points: must be at least 2");
    if (!(g.tolerance > 0.0)) throw UsageError("--tolerance: must be > 0");
    if (!(g.kaon_y >= 0.0 && g.kaon_y < 2.0)) throw UsageError("--kaon-y: must lie in [0, 2)");
    const OptimizerOptions optimizer = optimizer_from(g);

    if (threshold->parsed()) {
      const auto kind = kind_from_flag(threshold_kind);
      if (kind == CorrelationKind::Renormalized) {
        throw UsageError("--kind: the renormalized correlation has no threshold (S_max > 2 for every x > 0)");
      }
      if (!(threshold_y >= 0.0 && threshold_y < 2.0)) throw UsageError("--y: must lie in [0, 2)");
      ThresholdOptions options;
      options.optimizer = optimizer;
      options.tolerance = g.tolerance;
      const auto r = find_threshold(kind, threshold_y, options);
      ordered_json doc{{"command", "threshold"},
                       {"kind", to_string(kind)},
                       {"y", num(threshold_y)},
                       {"critical_x", num(r.critical_x)},
                       {"bracket", {num(r.x_lo), num(r.x_hi)}},
                       {"iterations", r.iterations},
                       {"s_at_critical", num(r.s_at_critical)},
                       {"t_max", num(g.t_max)},
                       {"grid_points", g.grid_points},
                       {"tolerance", num(g.tolerance)}};
      if (threshold_quote) {
        doc["quoted"] = {{"N_I", kQuotedNI}, {"N_II", kQuotedNII},
                         {"value", kind == CorrelationKind::Unitary ? kQuotedNI : kQuotedNII}};
      }
      write_json(g, out, doc);
      return kExitOk;
    }

    if (scan->parsed()) {
      const auto kind = kind_from_flag(scan_kind);
      if (x_steps < 1) throw UsageError("--x-steps: must be at least 1");
      if (x_steps > 1 && !(x_to > x_from)) throw UsageError("--x-to: must exceed --x-from");
      if (!(scan_y >= 0.0 && scan_y < 2.0)) throw UsageError("--y: must lie in [0, 2)");
      std::vector<double> grid(x_steps);
      for (std::size_t i = 0; i < x_steps; ++i) {
        grid[i] = x_steps == 1 ? x_from
                               : x_from + (x_to - x_from) * static_cast<double>(i) / static_cast<double>(x_steps - 1);
      }
      const auto points = scan_x(kind, scan_y, grid, optimizer);
      Emitter emitter(g.output, out);
      auto& os = emitter.stream();
      if (g.format == "json") {
        ordered_json doc{{"command", "scan"}, {"kind", to_string(kind)}, {"y", num(scan_y)}, {"points", ordered_json::array()}};
        for (const auto& p : points) {
          doc["points"].push_back({{"x", num(p.x)},
                                   {"s_max", num(p.result.s_max)},
                                   {"settings", settings_json(p.result.settings)},
                                   {"converged", p.result.converged}});
        }
        os << doc.dump(2) << '\n';
      } else {
        os << "x,s_max,tau_a,tau_a_prime,tau_b,tau_b_prime,converged\n";
        for (const auto& p : points) {
          const auto& s = p.result.settings;
          os << format_number(p.x) << ',' << format_number(p.result.s_max) << ',' << format_number(s.tau_a) << ','
             << format_number(s.tau_a_prime) << ',' << format_number(s.tau_b) << ','
             << format_number(s.tau_b_prime) << ',' << (p.result.converged ? "true" : "false") << '\n';
        }
      }
      return kExitOk;
    }

    if (maximize->parsed()) {
      const auto kind = kind_from_flag(max_kind);
      const auto target = resolve_target(max_system, max_x, max_y, g.kaon_y);
      const auto r = maximize_chsh(kind, target.reduced.x(), target.reduced.y(), optimizer);
      ordered_json doc{{"command", "maximize"}, {"kind", to_string(kind)}};
      if (target.system) doc["system"] = *target.system;
      doc["x"] = num(target.reduced.x());
      doc["y"] = num(target.reduced.y());
      doc["s_max"] = num(r.s_max);
      doc["violates"] = r.s_max > 2.0 + kViolationMargin;
      doc["settings"] = settings_json(r.settings);
      doc["evaluations"] = r.evaluations;
      doc["converged"] = r.converged;
      doc["t_max"] = num(g.t_max);
      doc["grid_points"] = g.grid_points;
      write_json(g, out, doc);
      return kExitOk;
    }

    if (verdict_cmd->parsed()) {
      std::vector<CorrelationKind> kinds;
      for (const auto& k : verdict_kinds) kinds.push_back(kind_from_flag(k));
      if (!verdict_system.empty() && !verdict_target.empty()) {
        throw UsageError("--system: give either a positional target or --system, not both");
      }
      const std::string selected = !verdict_system.empty() ? verdict_system : verdict_target;
      std::vector<BuiltinSystem> systems;
      if (selected.empty() || selected == "all") {
        systems = builtin_systems(g.kaon_y);
      } else {
        systems.push_back(system_from_flag(selected, g.kaon_y));
      }

      ordered_json doc{{"command", "verdict"}, {"kaon_y", num(g.kaon_y)}, {"systems", ordered_json::array()}};
      std::ostringstream csv;
      csv << "system,kind,x,y,bound,s_max,violates,caveat\n";
      for (const auto& system : systems) {
        ordered_json row{{"name", system.name},
                         {"x", num(system.reduced.x())},
                         {"y", num(system.reduced.y())},
                         {"bound", to_string(system.bound)}};
        if (verdict_quote) row["quoted_x"] = quoted_x(system.name);
        row["kinds"] = ordered_json::array();
        for (const auto& v : verdict(system.reduced, system.bound, kinds, optimizer)) {
          ordered_json k{{"kind", to_string(v.kind)},
                         {"violates", v.violates},
                         {"s_max", num(v.result.s_max)},
                         {"settings", settings_json(v.result.settings)}};
          if (v.caveat) k["caveat"] = *v.caveat;
          row["kinds"].push_back(std::move(k));
          csv << system.name << ',' << to_string(v.kind) << ',' << format_number(system.reduced.x()) << ','
              << format_number(system.reduced.y()) << ',' << to_string(system.bound) << ','
              << format_number(v.result.s_max) << ',' << (v.violates ? "true" : "false") << ','
              << (v.caveat ? "\"" + *v.caveat + "\"" : std::string()) << '\n';
        }
        doc["systems"].push_back(std::move(row));
      }
      if (verdict_quote) doc["quoted"] = {{"N_I", kQuotedNI}, {"N_II", kQuotedNII}};
      Emitter emitter(g.output, out);
      if (g.format == "csv") {
        emitter.stream() << csv.str();
      } else {
        emitter.stream() << doc.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (simulate->parsed()) {
      const auto kind = kind_from_flag(sim_kind);
      const auto target = resolve_target(sim_system, sim_x, sim_y, g.kaon_y);
      if (n_events < 1) throw UsageError("--n-events: must be at least 1");
      const double x = target.reduced.x();
      const double y = target.reduced.y();

      const auto given = std::count_if(taus.begin(), taus.end(), [](const auto& t) { return t.has_value(); });
      ChshSettings settings;
      if (given == 4) {
        settings = {*taus[0], *taus[1], *taus[2], *taus[3]};
        try {
          settings.validate(std::numeric_limits<double>::max());
        } catch (const ValidationError& e) {
          throw UsageError(fmt::format("--{}: {}", e.field() == "tau_a"         ? "tau-a"
                                                   : e.field() == "tau_a_prime" ? "tau-a-prime"
                                                   : e.field() == "tau_b"       ? "tau-b"
                                                                                : "tau-b-prime",
                                       e.what()));
        }
      } else if (given == 0) {
        settings = maximize_chsh(kind, x, y, optimizer).settings;
      } else {
        throw UsageError("--tau-a: give all four --tau flags or none");
      }

      std::optional<std::ofstream> dump;
      if (!events_csv.empty()) {
        dump.emplace(events_csv, std::ios::out | std::ios::trunc);
        if (!*dump) throw std::runtime_error(fmt::format("--events-csv: cannot open '{}' for writing", events_csv));
      }
      Emitter emitter(g.output, out);

      const auto events = sample_events(x, y, settings, n_events, g.seed, g.workers);
      const auto estimate = estimate_chsh(events, kind);

      ordered_json doc{{"command", "simulate"}, {"kind", to_string(kind)}};
      if (target.system) doc["system"] = *target.system;
      doc["x"] = num(x);
      doc["y"] = num(y);
      doc["seed"] = g.seed;
      doc["n_events_per_setting"] = n_events;
      doc["settings"] = settings_json(settings);
      doc["per_setting"] = ordered_json::array();
      for (auto setting : kAllSettings) {
        const auto& r = estimate.per_setting[static_cast<std::size_t>(setting)];
        const auto times = time_pair(settings, setting);
        doc["per_setting"].push_back({{"setting", to_string(setting)},
                                      {"tau_l", num(times.left())},
                                      {"tau_r", num(times.right())},
                                      {"value", num(r.value)},
                                      {"std_error", num(r.std_error)},
                                      {"n_used", r.n_used},
                                      {"n_total", r.n_total},
                                      {"closed_form", num(correlation(kind, x, y, times))}});
      }
      const auto& c = estimate.chsh;
      doc["chsh"] = {{"value", num(c.value)},
                     {"std_error", num(c.std_error)},
                     {"n_used", c.n_used},
                     {"n_total", c.n_total},
                     {"near_kink", c.near_kink},
                     {"closed_form", num(chsh_value(kind, x, y, settings))}};
      doc["violation"] = c.value > 2.0 && c.value - 2.0 > 3.0 * c.std_error;
      emitter.stream() << doc.dump(2) << '\n';

      if (dump) {
        *dump << "setting,left,right\n";
        for (const auto& e : events) *dump << to_string(e.setting) << ',' << to_string(e.left) << ',' << to_string(e.right) << '\n';
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mesonbell::cli
