#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "gtdesign/cli.hpp"
#include "gtdesign/design_io.hpp"

using namespace gtdesign;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "gtdesign");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kChlamydia{"--p0", "0.07", "--p1", "0.93", "--p2", "0.96",
                                          "--xl", "1",    "--xu", "61"};

std::vector<std::string> with(std::vector<std::string> extra) {
  std::vector<std::string> args = kChlamydia;
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gtdesign_test_" + name);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("design command") {
  const auto d = run(with({"--criterion", "d", "--n", "3000", "design"}));
  REQUIRE(d.code == 0);
  const auto j = json::parse(d.out);
  CHECK(j["schema_version"] == 1);
  CHECK(std::abs(j["approximate"]["sizes"][1].get<double>() - 16.79) <= 0.01);
  CHECK(j["exact"]["sizes"] == json::array({1, 17, 61}));
  CHECK(j["exact"]["counts"] == json::array({1000, 1000, 1000}));
  CHECK(j["constants"]["bracket_count"] == 1);
  CHECK(j["constants"].contains("c"));
  CHECK(j["constants"].contains("delta0"));
  CHECK(j["criterion_values"]["d"].is_number());

  const auto s = run(with({"--criterion", "ds", "design"}));
  REQUIRE(s.code == 0);
  const auto js = json::parse(s.out);
  CHECK(js["exact"]["sizes"] == json::array({1, 16, 61}));
  CHECK(js["exact"]["counts"] == json::array({393, 1884, 723}));

  const auto csv = run(with({"--criterion", "ds", "--format", "csv", "design"}));
  REQUIRE(csv.code == 0);
  const auto rows = csv_rows(csv.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"size", "count", "weight"});
  CHECK(rows[2][0] == "16");
  CHECK(rows[2][1] == "1884");
}

TEST_CASE("usage errors") {
  CHECK(run({"--p0", "0.07", "--p1", "0.4", "--p2", "0.96", "--xl", "1", "--xu", "61", "design"}).code == 2);
  CHECK(run({"design"}).code == 2);
  CHECK(run(with({"--criterion", "a", "design"})).code == 2);
  CHECK(run(with({"--format", "xml", "design"})).code == 2);
  CHECK(run(with({"--bogus", "design"})).code == 2);
  CHECK(run(with({})).code == 2);
  CHECK(run(with({"--xu", "0.5", "design"})).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("design documents round-trip and verify") {
  const auto path = temp_path("design.json");
  REQUIRE(run(with({"--out", path.string(), "design"})).code == 0);
  const auto doc = read_design_file(path);
  CHECK(doc.criterion == Criterion::D);
  REQUIRE(doc.approximate);
  REQUIRE(doc.exact);
  CHECK(doc.exact->counts() == Eigen::Vector3i(1000, 1000, 1000));
  CHECK(doc.theta.prevalence() == 0.07);
  CHECK(doc.bounds.upper() == 61);
  CHECK(to_json(doc).dump() == to_json(read_design_file(path)).dump());

  const auto ok = run({"verify", path.string()});
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out)["certified"] == true);

  auto edited = json::parse(read_text_file(path));
  edited["approximate"]["sizes"][1] = 25.0;
  const auto bad_path = temp_path("edited.json");
  write_text_file(bad_path, edited.dump());
  const auto bad = run({"verify", bad_path.string()});
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.out)["max_violation"].get<double>() > 0);

  CHECK(run({"verify", temp_path("missing.json").string()}).code == 4);
  write_text_file(bad_path, "{not json");
  CHECK(run({"verify", bad_path.string()}).code == 4);

  // Two-point design: information is singular, a solver-class error.
  json two = json::parse(read_text_file(path));
  two["approximate"] = {{"sizes", {1.0, 61.0}}, {"weights", {0.5, 0.5}}};
  two.erase("exact");
  write_text_file(bad_path, two.dump());
  CHECK(run({"verify", bad_path.string()}).code == 3);

  const auto ds_path = temp_path("ds.json");
  REQUIRE(run(with({"--criterion", "ds", "--out", ds_path.string(), "design"})).code == 0);
  CHECK(run({"verify", ds_path.string()}).code == 0);
}

TEST_CASE("round command") {
  const auto path = temp_path("round.json");
  REQUIRE(run(with({"--criterion", "ds", "--out", path.string(), "design"})).code == 0);
  const auto r = run({"--n", "300", "round", path.string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["exact"]["n"] == 300);
  CHECK(j["exact"]["sizes"] == json::array({1, 16, 61}));
}

TEST_CASE("simulate command") {
  const auto path = temp_path("sim.json");
  REQUIRE(run(with({"--out", path.string(), "design"})).code == 0);
  const auto smoke = run({"--reps", "1", "simulate", path.string()});
  CHECK(smoke.code == 0);
  CHECK(json::parse(smoke.out)["mse"]["replications"] == 1);

  const auto a = run({"--reps", "300", "--seed", "4", "simulate", path.string()});
  const auto b = run({"--reps", "300", "--seed", "4", "--threads", "3", "simulate", path.string()});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = json::parse(a.out);
  CHECK(j["eff_d"].get<double>() > 0.8);
  CHECK(j["eff_s"].get<double>() > 0.5);

  const auto csv = run({"--reps", "50", "--format", "csv", "simulate", path.string()});
  CHECK(csv_rows(csv.out).size() == 2);
}

TEST_CASE("sweep command") {
  const auto d = run(with({"--reps", "0", "sweep"}));
  REQUIRE(d.code == 0);
  const auto rows = csv_rows(d.out);
  REQUIRE(rows.size() == 485);
  CHECK(rows[0] == std::vector<std::string>{"p0", "p1", "p2", "x_mid", "w1", "w2", "w3", "efficiency"});
  int lo = 1000, hi = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    lo = std::min(lo, std::stoi(rows[i][3]));
    hi = std::max(hi, std::stoi(rows[i][3]));
    CHECK(rows[i][7] == "nan");
  }
  CHECK(lo == 12);
  CHECK(hi == 25);

  const auto single = run(with({"--grid-p0", "0.07", "--grid-p1", "0.93", "--grid-p2", "0.96",
                                "--reps", "2000", "sweep"}));
  REQUIRE(single.code == 0);
  const auto one = csv_rows(single.out);
  REQUIRE(one.size() == 2);
  CHECK(one[1][3] == "17");
  CHECK(std::abs(std::stod(one[1][7]) - 1) < 0.05);

  const auto ds = run(with({"--criterion", "ds", "--reps", "0", "sweep"}));
  REQUIRE(ds.code == 0);
  const auto ds_rows = csv_rows(ds.out);
  REQUIRE(ds_rows.size() == 101);
  for (std::size_t i = 1; i < ds_rows.size(); ++i) {
    const int x = std::stoi(ds_rows[i][3]);
    CHECK(x >= 11);
    CHECK(x <= 25);
    // Weights as reported, to two decimals.
    CHECK(std::abs(std::round(std::stod(ds_rows[i][4]) * 100) / 100 - 0.14) <= 0.05 + 1e-12);
    CHECK(std::abs(std::round(std::stod(ds_rows[i][5]) * 100) / 100 - 0.67) <= 0.14 + 1e-12);
    CHECK(std::abs(std::round(std::stod(ds_rows[i][6]) * 100) / 100 - 0.19) <= 0.12 + 1e-12);
  }

  CHECK(run(with({"--grid-p1", "0.3", "--reps", "0", "sweep"})).code == 2);
  const auto js = run(with({"--grid-p0", "0.07", "--reps", "0", "--format", "json", "sweep"}));
  REQUIRE(js.code == 0);
  CHECK(json::parse(js.out).size() == 121);
}

TEST_CASE("config files") {
  const auto cfg = temp_path("config.json");
  write_text_file(cfg, R"({"p0": 0.07, "p1": 0.93, "p2": 0.96, "xl": 1, "xu": 61, "criterion": "ds"})");
  const auto a = run({"--config", cfg.string(), "design"});
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["exact"]["counts"] == json::array({393, 1884, 723}));

  // Flags override the file.
  const auto b = run({"--config", cfg.string(), "--criterion", "d", "design"});
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["exact"]["counts"] == json::array({1000, 1000, 1000}));

  const auto ini = temp_path("config.ini");
  write_text_file(ini, "p0=0.07\np1=0.93\np2=0.96\nxl=1\nxu=61\ncriterion=ds\nn=3000\n");
  const auto c = run({"--config", ini.string(), "design"});
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out)["exact"]["counts"] == json::array({393, 1884, 723}));

  const auto grid = temp_path("grid.json");
  write_text_file(grid, R"({"grid_p0": [0.04, 0.07], "grid_p1": [0.93], "grid_p2": [0.96], "reps": 0})");
  const auto g = run(with({"--config", grid.string(), "sweep"}));
  REQUIRE(g.code == 0);
  CHECK(csv_rows(g.out).size() == 3);

  CHECK(run({"--config", temp_path("nope.ini").string(), "design"}).code == 4);
}

TEST_CASE("installed tool binary") {
  const std::string tool = GTDESIGN_TOOL;
  const auto out = temp_path("tool.json");
  const std::string cmd = "\"" + tool + "\" --p0 0.07 --p1 0.93 --p2 0.96 --xl 1 --xu 61 --out \"" +
                          out.string() + "\" design";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(read_design_file(out).exact->sizes() == Eigen::Vector3i(1, 17, 61));
  const std::string bad = "\"" + tool + "\" --p0 0.07 --p1 0.4 --p2 0.96 --xl 1 --xu 61 design 2>/dev/null";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
