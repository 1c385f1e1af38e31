/*
 * Copyright 2026 The flee Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("flee_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

Run run(const std::string& args, const std::string& tag = "out") {
  fs::path out = scratch() / (tag + ".dat");
  fs::remove(out);
  std::string cmd = std::string(FLEE_CLI) + " " + args + " --out " + out.string() + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, fs::exists(out) ? slurp(out) : std::string()};
}

std::string sample(const std::string& name) { return std::string(FLEE_SAMPLES) + "/" + name; }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.push_back("");
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  EXPECT_NE(it, header.end()) << name;
  return std::size_t(it - header.begin());
}

void expect_rectangular(const std::vector<std::vector<std::string>>& rows) {
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_EQ(r.size(), rows[0].size());
}

const double pi = 3.14159265358979323846;

}  // namespace

TEST(Cli, SigmaWaveguideBenchmark) {
  auto r = run("--config " + sample("sigma_waveguide.json") + " sigma");
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["command"], "sigma");
  auto m = j["points"][0]["matrix"][0][0];
  EXPECT_NEAR(m[0].get<double>(), 8 * pi / (3 * std::sqrt(3.0)), 1e-6);
  EXPECT_NEAR(m[1].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(j["points"][0]["parts"]["contour"][0][0][0].get<double>(), -4 * pi / (3 * std::sqrt(3.0)), 1e-6);
  EXPECT_NEAR(j["points"][0]["parts"]["poles"][0]["contribution"][0][0][0].get<double>(), 4 * pi / std::sqrt(3.0), 1e-6);
}

TEST(Cli, SigmaCrossCheckCsv) {
  auto r = run("--config " + sample("sigma_massless_grid.json") + " --format csv sigma --cross-check");
  ASSERT_EQ(r.code, 0);
  auto rows = parse_csv(r.out);
  expect_rectangular(rows);
  std::size_t c = column(rows[0], "discrepancy");
  ASSERT_GT(rows.size(), 1u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(std::stod(rows[i][c]), 1e-6);
}

TEST(Cli, MalformedJsonExitsTwoWithoutOutput) {
  auto p = write_config("bad.json", "{\"model\": ");
  auto r = run("--config " + p.string() + " sigma");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(fs::exists(scratch() / "out.dat"));
}

TEST(Cli, UnknownKeysAndBadFlagsExitTwo) {
  auto p = write_config("unknown.json", R"({"model":{"preset":"waveguide","params":{"m":1,"gamma":1},"positions":[0],"epsilon":[1]},
    "sigma":{"E":[0.5],"colour":"red"}})");
  EXPECT_EQ(run("--config " + p.string() + " sigma").code, 2);
  auto q = write_config("unknown_top.json", R"({"model":{"preset":"waveguide","params":{"m":1,"gamma":1},"positions":[0],"epsilon":[1]},
    "extra":{}})");
  EXPECT_EQ(run("--config " + q.string() + " sigma").code, 2);
  EXPECT_EQ(run("--config " + p.string() + " --format xml sigma").code, 2);
  EXPECT_EQ(run("--config " + p.string() + " --tol -1 sigma").code, 2);
  EXPECT_EQ(run("--config " + p.string()).code, 2);
}

TEST(Cli, HypothesisFailureExitsThree) {
  auto p = write_config("odd.json", R"({"model":{"dispersion":{"expr":"linear","params":{"c":1}},
    "form_factor":{"expr":"constant","params":{"g":1}},"positions":[0],"epsilon":[1]},"sigma":{"z":[[0.5,0.5]]}})");
  EXPECT_EQ(run("--config " + p.string() + " sigma").code, 3);
  EXPECT_EQ(run("--config " + sample("check_odd_dispersion.json") + " check").code, 3);
}

TEST(Cli, NumericalFailureExitsFour) {
  auto p = write_config("critical.json", R"({"model":{"preset":"waveguide","params":{"m":1,"gamma":1},"positions":[0],"epsilon":[1]},
    "sigma":{"E":[1.0]}})");
  auto r = run("--config " + p.string() + " sigma");
  EXPECT_EQ(r.code, 4);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ModesExamples) {
  auto z = run("--config " + sample("modes_zero_coupling.json") + " modes");
  ASSERT_EQ(z.code, 0);
  auto jz = json::parse(z.out);
  ASSERT_EQ(jz["modes"].size(), 2u);
  EXPECT_NEAR(jz["modes"][0]["z"][0].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(jz["modes"][1]["z"][0].get<double>(), 2.0, 1e-9);

  auto b = run("--config " + sample("modes_waveguide_bic.json") + " modes --neglect-corrections");
  ASSERT_EQ(b.code, 0);
  auto jb = json::parse(b.out);
  ASSERT_GE(jb["modes"].size(), 1u);
  EXPECT_NEAR(jb["modes"][0]["z"][0].get<double>(), std::sqrt(pi * pi + 1.0), 1e-6);
  EXPECT_EQ(jb["corrections"], "neglect");

  auto r = run("--config " + sample("modes_massless_resonance.json") + " modes");
  ASSERT_EQ(r.code, 0);
  auto jr = json::parse(r.out);
  int res = 0;
  for (const auto& m : jr["modes"])
    if (m["kind"] == "Resonance") {
      ++res;
      EXPECT_LT(m["z"][1].get<double>(), 0.0);
    }
  EXPECT_EQ(res, 1);
}

TEST(Cli, PhaseSweepExamples) {
  auto one = write_config("ps1.json", R"({"phase_sweep":{"positions":[0],"k_min":0,"k_max":5,"step":0.5}})");
  auto r1 = run("--config " + one.string() + " --format csv phase-sweep");
  ASSERT_EQ(r1.code, 0);
  auto rows = parse_csv(r1.out);
  expect_rectangular(rows);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::stod(rows[i][2]), 0.0);
    EXPECT_EQ(std::stod(rows[i][3]), -1.0);
  }
  auto eta = write_config("ps_eta.json", R"({"phase_sweep":{"positions":[0,1,1.5],"k_min":0,"k_max":20,"step":0.1,"eta":1.0}})");
  auto r2 = run("--config " + eta.string() + " --format csv phase-sweep");
  ASSERT_EQ(r2.code, 0);
  auto rows2 = parse_csv(r2.out);
  for (std::size_t i = 1; i < rows2.size(); ++i) {
    double re = std::stod(rows2[i][2]), im = std::stod(rows2[i][3]);
    EXPECT_LE(std::hypot(re, im + 1.0), 2.0 * std::exp(-0.5) + 1e-12);
  }
  auto fig = write_config("ps_fig.json", R"({"phase_sweep":{"positions":[0,1,1.5],"k_min":0,"k_max":200,"step":0.05}})");
  auto r3 = run("--config " + fig.string() + " phase-sweep");
  ASSERT_EQ(r3.code, 0);
  auto j = json::parse(r3.out);
  EXPECT_NEAR(j["period"].get<double>(), 2 * pi, 1e-12);
  for (const auto& row : j["branches"]) {
    ASSERT_EQ(row.size(), 3u);
    double sum = 0.0;
    for (const auto& v : row) {
      sum += v[1].get<double>();
      EXPECT_GE(-v[1].get<double>(), -1e-9);
      EXPECT_LE(-v[1].get<double>(), 3.0 + 1e-9);
    }
    EXPECT_NEAR(sum, -3.0, 1e-9);
  }
}

TEST(Cli, EvolveExamples) {
  auto zero = write_config("ev0.json", R"({"model":{"preset":"massless-flat","params":{"g":0},"positions":[0],"epsilon":[1]},
    "evolve":{"t":{"min":0,"max":5,"count":11}}})");
  auto r0 = run("--config " + zero.string() + " --format csv evolve");
  ASSERT_EQ(r0.code, 0);
  auto rows = parse_csv(r0.out);
  expect_rectangular(rows);
  std::size_t c = column(rows[0], "abs2_A_ode");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][c]), 1.0, 1e-9);

  auto rb = run("--config " + sample("evolve_benchmark.json") + " --format csv evolve --method both");
  ASSERT_EQ(rb.code, 0);
  auto rows_b = parse_csv(rb.out);
  std::size_t d = column(rows_b[0], "discrepancy");
  for (std::size_t i = 1; i < rows_b.size(); ++i) EXPECT_LE(std::stod(rows_b[i][d]), 1e-3);

  auto empty = write_config("ev_empty.json", R"({"model":{"preset":"massless-flat","params":{"g":0.4},"positions":[0],"epsilon":[1]},
    "evolve":{"t_grid":[]}})");
  EXPECT_EQ(run("--config " + empty.string() + " evolve").code, 2);
}

TEST(Cli, CheckExamples) {
  auto w = run("--config " + sample("check_waveguide.json") + " check");
  ASSERT_EQ(w.code, 0);
  auto jw = json::parse(w.out);
  EXPECT_TRUE(jw["pass"].get<bool>());
  EXPECT_NEAR(jw["normalization"]["omega"]["value"].get<double>(), pi, 1e-8);
  EXPECT_LT(jw["invariants"]["decomposed_vs_direct"].get<double>(), 1e-6);

  auto ml = write_config("check_ml.json", R"({"model":{"preset":"massless-flat","params":{"g":1},"positions":[0,1],"epsilon":[1,1]}})");
  auto m = run("--config " + ml.string() + " check");
  ASSERT_EQ(m.code, 0);
  auto jm = json::parse(m.out);
  bool note = false;
  for (const auto& s : jm["notes"]) note |= s.get<std::string>().find("entire: contour term identically zero") != std::string::npos;
  EXPECT_TRUE(note);

  auto o = run("--config " + sample("check_odd_dispersion.json") + " check");
  EXPECT_EQ(o.code, 3);
  auto jo = json::parse(o.out);
  for (const auto& h : jo["hypotheses"])
    if (h["name"] == "H2") EXPECT_FALSE(h["pass"].get<bool>());
}

TEST(Cli, OutputsRoundTripAndAreDeterministic) {
  const std::vector<std::string> cmds{
      "--config " + sample("sigma_massless_grid.json") + " sigma --cross-check --parts",
      "--config " + sample("modes_massless_resonance.json") + " modes",
      "--config " + sample("check_waveguide.json") + " check",
  };
  for (const auto& c : cmds) {
    auto a = run(c + " --threads 1", "a");
    auto b = run(c + " --threads 3", "b");
    ASSERT_EQ(a.code, 0) << c;
    EXPECT_EQ(a.out, b.out) << c;
    auto j = json::parse(a.out);
    EXPECT_TRUE(j.contains("command"));
    EXPECT_TRUE(j.contains("model"));
    auto again = json::parse(j.dump());
    EXPECT_EQ(again, j);
  }
}

TEST(Cli, FullPrecisionOutput) {
  auto r = run("--config " + sample("sigma_waveguide.json") + " --format csv sigma");
  ASSERT_EQ(r.code, 0);
  auto rows = parse_csv(r.out);
  double v = std::stod(rows[1][4]);
  EXPECT_EQ(v, std::strtod(rows[1][4].c_str(), nullptr));
  EXPECT_GE(rows[1][4].size(), 15u);
}
