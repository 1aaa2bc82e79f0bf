#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Output {
  int code = -1;
  std::string text;
};

Output run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "hubopt_cli_test.log";
  const std::string cmd = std::string("'") + HUBOPT_CLI + "' " + args + " > '" + log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  Output out;
  out.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  out.text = ss.str();
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hubopt_cli_" + std::to_string(std::rand()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

json small_case(std::size_t hours) {
  return {{"name", "cli_small"},
          {"scenario", "H2_to_grid"},
          {"co2_recovery_ratio", 0.9},
          {"co2_tax", 150},
          {"max_re", 0.5},
          {"price_year", 2019},
          {"horizon", {{"weeks", json::array()}, {"hours", hours}, {"offset", 0}}},
          {"solver", "reference"}};
}

void write_json(const fs::path& path, const json& doc) { std::ofstream(path) << doc.dump(2); }

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("validate exit codes") {
  TempDir tmp;
  write_json(tmp.path / "ok.json", small_case(48));
  auto ok = run("validate '" + (tmp.path / "ok.json").string() + "'");
  CHECK(ok.code == 0);
  CHECK(contains(ok.text, "alpha_MeOH"));

  json bad = small_case(48);
  bad["co2_recovery_ratio"] = 1.2;
  write_json(tmp.path / "bad.json", bad);
  auto invalid = run("validate '" + (tmp.path / "bad.json").string() + "'");
  CHECK(invalid.code == 1);
  CHECK(contains(invalid.text, "co2_recovery_ratio 1.2 out of range"));

  const fs::path partial = tmp.path / "market";
  fs::create_directories(partial);
  for (const auto& e : fs::directory_iterator(fs::path(HUBOPT_DATA_DIR) / "synthetic" / "2019"))
    fs::copy_file(e.path(), partial / e.path().filename());
  fs::remove(partial / "solar_cf.csv");
  json missing = small_case(48);
  missing["data_dir"] = partial.string();
  write_json(tmp.path / "missing.json", missing);
  auto io = run("validate '" + (tmp.path / "missing.json").string() + "'");
  CHECK(io.code == 2);
  CHECK(contains(io.text, "solar_cf.csv"));

  CHECK(run("validate '" + (tmp.path / "absent.json").string() + "'").code == 2);
  CHECK(run("frobnicate").code == 1);
}

TEST_CASE("run writes results and refuses to overwrite") {
  TempDir tmp;
  write_json(tmp.path / "case.json", small_case(24));
  const fs::path out = tmp.path / "out";
  auto first = run("run '" + (tmp.path / "case.json").string() + "' --out '" + out.string() + "'");
  REQUIRE(first.code == 0);
  CHECK(contains(first.text, "LCOH:"));
  CHECK(contains(first.text, "EUR/kg"));
  CHECK(contains(first.text, "LCOM:"));
  CHECK(contains(first.text, "EUR/t"));
  for (const char* f : {"result.json", "capacities.csv", "prices_stats.csv", "breakdown.csv", "duals_hourly.csv",
                        "summary.txt", "provenance.json", "config.json"})
    CHECK_MESSAGE(fs::exists(out / f), f);

  json prov = json::parse(std::ifstream(out / "provenance.json"));
  CHECK(prov["config_hash"].get<std::string>().size() == 16);
  CHECK(prov["data_files"].size() == 7);
  CHECK(contains(prov["solver"].get<std::string>(), "reference"));
  CHECK(!prov["catalog_version"].get<std::string>().empty());

  json result = json::parse(std::ifstream(out / "result.json"));
  CHECK(result["solver"]["status"] == "optimal");

  auto again = run("run '" + (tmp.path / "case.json").string() + "' --out '" + out.string() + "'");
  CHECK(again.code == 1);
  CHECK(contains(again.text, "--force"));
  CHECK(run("run '" + (tmp.path / "case.json").string() + "' --out '" + out.string() + "' --force").code == 0);
}

TEST_CASE("reference solver refuses a large horizon") {
  TempDir tmp;
  write_json(tmp.path / "big.json", small_case(1500));
  auto r = run("run '" + (tmp.path / "big.json").string() + "' --solver reference --out '" +
               (tmp.path / "out").string() + "'");
  CHECK(r.code == 1);
  CHECK(contains(r.text, "reference solver limit"));
}

TEST_CASE("sweep and report") {
  TempDir tmp;
  json spec = {{"base", small_case(24)},
               {"grid",
                {{"scenarios", {"H2_to_grid"}},
                 {"co2_tax", {150}},
                 {"co2_recovery_ratio", {0.8, 0.9}},
                 {"max_re", {0.5}},
                 {"price_year", {2019}},
                 {"dh_enabled", {false}},
                 {"biochar_enabled", {false}}}},
               {"output_dir", "sweep_out"},
               {"jobs", 1},
               {"solver", "reference"}};
  write_json(tmp.path / "spec.json", spec);
  auto s = run("sweep '" + (tmp.path / "spec.json").string() + "' --jobs 2");
  REQUIRE(s.code == 0);
  CHECK(contains(s.text, "completed 2"));

  auto resumed = run("sweep '" + (tmp.path / "spec.json").string() + "'");
  CHECK(resumed.code == 0);
  CHECK(contains(resumed.text, "resumed 2"));

  const fs::path report_dir = tmp.path / "report";
  auto rep = run("report '" + (tmp.path / "sweep_out").string() + "' --out '" + report_dir.string() + "'");
  CHECK(rep.code == 0);
  for (const char* f : {"aggregate_long.csv", "correlations.csv", "cost_vs_recovery.csv", "cost_vs_recovery.gp"})
    CHECK_MESSAGE(fs::exists(report_dir / f), f);
  std::ifstream rec(report_dir / "cost_vs_recovery.csv");
  std::string line;
  int lines = 0;
  while (std::getline(rec, line)) ++lines;
  CHECK(lines == 3);

  fs::create_directories(tmp.path / "empty");
  CHECK(run("report '" + (tmp.path / "empty").string() + "'").code == 1);
  CHECK(run("report '" + (tmp.path / "nowhere").string() + "'").code == 2);
}
