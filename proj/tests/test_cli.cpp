#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mesonbell/cli.hpp"

using nlohmann::json;
namespace cli = mesonbell::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"mesonbell"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> result;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) result.push_back(line);
  return result;
}

}  // namespace

TEST_CASE("format_number") {
  CHECK(cli::format_number(0.0) == "0");
  CHECK(cli::format_number(-0.0) == "0");
  CHECK(cli::format_number(2.0) == "2");
  CHECK(cli::format_number(0.1) == "0.1");
  CHECK(cli::format_number(2.8284271247461903) == "2.82842712");
  CHECK(cli::format_number(1.0 / 3.0) == "0.333333333");
}

TEST_CASE("threshold") {
  const auto r = run({"threshold", "--kind", "nonunitary", "--y", "0"});
  REQUIRE(r.code == cli::kExitOk);
  const auto doc = json::parse(r.out);
  CHECK(doc["command"] == "threshold");
  CHECK(doc["kind"] == "nonunitary");
  const double x = doc["critical_x"];
  CHECK(x > 2.0);
  CHECK(x < 2.2);
  CHECK(doc["bracket"][0].get<double>() < x);
  CHECK(doc["bracket"][1].get<double>() > x);
  CHECK_FALSE(doc.contains("quoted"));

  const auto quoted = run({"threshold", "--kind", "unitary", "--quote-paper"});
  REQUIRE(quoted.code == cli::kExitOk);
  CHECK(json::parse(quoted.out)["quoted"]["value"] == 2.6);

  const auto renorm = run({"threshold", "--kind", "renormalized"});
  CHECK(renorm.code == cli::kExitUsage);
  CHECK(renorm.err.find("--kind") != std::string::npos);
  CHECK(renorm.out.empty());
}

TEST_CASE("scan writes CSV rows by default and JSON on request") {
  const auto r = run({"scan", "--kind", "nonunitary", "--y", "0", "--x-from", "0.5", "--x-to", "4", "--x-steps", "8"});
  REQUIRE(r.code == cli::kExitOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == "x,s_max,tau_a,tau_a_prime,tau_b,tau_b_prime,converged");
  CHECK(rows[1].rfind("0.5,", 0) == 0);
  CHECK(rows[8].rfind("4,", 0) == 0);

  const auto j = run({"--format", "json", "scan", "--kind", "renormalized", "--x-from", "1", "--x-to", "2", "--x-steps", "2"});
  REQUIRE(j.code == cli::kExitOk);
  const auto doc = json::parse(j.out);
  REQUIRE(doc["points"].size() == 2);
  CHECK(doc["points"][1]["s_max"].get<double>() == doctest::Approx(2.828427).epsilon(1e-4));

  CHECK(run({"scan", "--kind", "unitary", "--x-from", "2", "--x-to", "1", "--x-steps", "3"}).code == cli::kExitUsage);
  CHECK(run({"scan", "--kind", "unitary", "--x-from", "1", "--x-to", "2", "--x-steps", "0"}).code == cli::kExitUsage);
}

TEST_CASE("maximize") {
  const auto r = run({"maximize", "--kind", "renormalized", "--x", "0.77"});
  REQUIRE(r.code == cli::kExitOk);
  const auto doc = json::parse(r.out);
  CHECK(doc["violates"] == true);
  CHECK(doc["s_max"].get<double>() == doctest::Approx(2.828427).epsilon(1e-4));
  CHECK_FALSE(doc.contains("system"));

  const auto sys = run({"maximize", "--kind", "unitary", "--system", "Bs"});
  REQUIRE(sys.code == cli::kExitOk);
  const auto sdoc = json::parse(sys.out);
  CHECK(sdoc["system"] == "Bs");
  CHECK(sdoc["x"] == 20.6);
  CHECK(sdoc["violates"] == true);

  CHECK(run({"maximize", "--kind", "unitary"}).code == cli::kExitUsage);
  CHECK(run({"maximize", "--kind", "unitary", "--system", "Bs", "--x", "1"}).code == cli::kExitUsage);
  CHECK(run({"maximize", "--kind", "sideways", "--x", "1"}).code == cli::kExitUsage);
  CHECK(run({"maximize", "--kind", "unitary", "--x", "1", "--y", "2"}).code == cli::kExitUsage);
}

TEST_CASE("verdict all flags only Bs") {
  const auto r = run({"verdict", "all"});
  REQUIRE(r.code == cli::kExitOk);
  const auto doc = json::parse(r.out);
  REQUIRE(doc["systems"].size() == 4);
  for (const auto& system : doc["systems"]) {
    const bool expected = system["name"] == "Bs";
    REQUIRE(system["kinds"].size() == 2);
    for (const auto& k : system["kinds"]) CHECK(k["violates"] == expected);
  }

  const auto csv = run({"--format", "csv", "verdict", "--system", "D0", "--kinds", "unitary"});
  REQUIRE(csv.code == cli::kExitOk);
  const auto rows = lines(csv.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "system,kind,x,y,bound,s_max,violates,caveat");
  CHECK(rows[1].rfind("D0,unitary,0.03,0,upper_bound,", 0) == 0);

  const auto quoted = run({"verdict", "Bs", "--quote-paper"});
  REQUIRE(quoted.code == cli::kExitOk);
  const auto qdoc = json::parse(quoted.out);
  CHECK(qdoc["systems"][0]["quoted_x"] == "> 20.60");
  CHECK(qdoc.contains("quoted"));
}

TEST_CASE("kaon y flag reaches the K0 system") {
  const auto r = run({"--kaon-y", "1.5", "verdict", "K0", "--kinds", "nonunitary"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(json::parse(r.out)["systems"][0]["y"] == 1.5);
  CHECK(run({"--kaon-y", "2", "verdict", "K0"}).code == cli::kExitUsage);
}

TEST_CASE("simulate") {
  const auto r = run({"--seed", "42", "simulate", "--kind", "renormalized", "--system", "B0", "--n-events", "20000",
                      "--tau-a", "0", "--tau-a-prime", "2.04", "--tau-b", "1.02", "--tau-b-prime", "3.06"});
  REQUIRE(r.code == cli::kExitOk);
  const auto doc = json::parse(r.out);
  CHECK(doc["seed"] == 42);
  REQUIRE(doc["per_setting"].size() == 4);
  CHECK(doc["per_setting"][1]["setting"] == "AB'");
  CHECK(doc["per_setting"][1]["tau_r"] == 3.06);
  const double value = doc["chsh"]["value"];
  const double se = doc["chsh"]["std_error"];
  const double exact = doc["chsh"]["closed_form"];
  CHECK(std::abs(value - exact) <= 5 * se);
  CHECK(doc["violation"] == (value > 2.0 && value - 2.0 > 3.0 * se));

  CHECK(run({"simulate", "--kind", "unitary", "--x", "1", "--tau-a", "0"}).code == cli::kExitUsage);
  CHECK(run({"simulate", "--kind", "unitary", "--x", "1", "--tau-a", "0", "--tau-a-prime", "1", "--tau-b", "-1",
             "--tau-b-prime", "1"})
            .code == cli::kExitUsage);
  CHECK(run({"simulate", "--kind", "unitary", "--x", "1", "--n-events", "0"}).code == cli::kExitUsage);
}

TEST_CASE("simulate without taus uses the maximizing settings") {
  const auto max = json::parse(run({"maximize", "--kind", "unitary", "--x", "3"}).out);
  const auto sim = run({"simulate", "--kind", "unitary", "--x", "3", "--n-events", "100"});
  REQUIRE(sim.code == cli::kExitOk);
  CHECK(json::parse(sim.out)["settings"] == max["settings"]);
}

TEST_CASE("output is byte-identical across runs and worker counts") {
  const auto a = run({"--seed", "5", "simulate", "--kind", "unitary", "--x", "2", "--y", "0.3", "--n-events", "5000"});
  const auto b = run({"--seed", "5", "simulate", "--kind", "unitary", "--x", "2", "--y", "0.3", "--n-events", "5000"});
  const auto c = run({"--seed", "5", "--workers", "3", "simulate", "--kind", "unitary", "--x", "2", "--y", "0.3",
                      "--n-events", "5000"});
  REQUIRE(a.code == cli::kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);

  const auto s1 = run({"scan", "--kind", "unitary", "--x-from", "1", "--x-to", "3", "--x-steps", "3"});
  const auto s2 = run({"--workers", "2", "scan", "--kind", "unitary", "--x-from", "1", "--x-to", "3", "--x-steps", "3"});
  CHECK(s1.out == s2.out);
}

TEST_CASE("--output and --events-csv write files") {
  const auto dir = std::filesystem::temp_directory_path() / "mesonbell_cli_test";
  std::filesystem::create_directories(dir);
  const auto out_path = (dir / "result.json").string();
  const auto csv_path = (dir / "events.csv").string();

  const auto r = run({"--output", out_path.c_str(), "simulate", "--kind", "nonunitary", "--x", "1", "--n-events", "10",
                      "--tau-a", "0", "--tau-a-prime", "1", "--tau-b", "0.5", "--tau-b-prime", "1.5", "--events-csv",
                      csv_path.c_str()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.empty());
  CHECK(json::parse(slurp(out_path))["command"] == "simulate");
  const auto rows = lines(slurp(csv_path));
  REQUIRE(rows.size() == 41);
  CHECK(rows[0] == "setting,left,right");
  CHECK(rows[1].rfind("AB,", 0) == 0);
  CHECK(rows[40].rfind("A'B',", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("errors exit nonzero with a message") {
  const auto unknown = run({"verdict", "--system", "Xi"});
  CHECK(unknown.code != cli::kExitOk);
  CHECK(unknown.err.find("Xi") != std::string::npos);

  CHECK(run({"maximize", "--kind", "unitary", "--x", "abc"}).code != cli::kExitOk);
  CHECK(run({"--t-max", "0", "maximize", "--kind", "unitary", "--x", "1"}).code == cli::kExitUsage);
  CHECK(run({"--grid-points", "1", "maximize", "--kind", "unitary", "--x", "1"}).code == cli::kExitUsage);
  CHECK(run({"--format", "xml", "verdict"}).code == cli::kExitUsage);
  CHECK(run({}).code != cli::kExitOk);

  const auto unwritable = run({"--output", "/nonexistent-dir/out.json", "maximize", "--kind", "unitary", "--x", "1"});
  CHECK(unwritable.code == cli::kExitFailure);
  CHECK(unwritable.err.find("--output") != std::string::npos);
}
