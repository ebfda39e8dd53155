#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

using nlohmann::json;

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(RETMAP_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

json run_json(const std::string& args) {
  const auto r = run(args);
  EXPECT_EQ(r.code, 0) << args;
  return json::parse(r.out);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("retmap_cli_test_" + name);
}

double c1_beta() { return std::tgamma(0.25) * std::tgamma(2.5) / (8.0 * std::tgamma(2.75)); }

TEST(Cli, CoeffsSchemaAndFirstRow) {
  const auto doc = run_json("coeffs --order 3");
  ASSERT_TRUE(doc.contains("meta"));
  ASSERT_TRUE(doc.contains("data"));
  EXPECT_EQ(doc["meta"]["command"], "coeffs");
  const auto& rows = doc["data"]["coefficients"];
  ASSERT_EQ(rows.size(), 3u);
  const double c1 = rows[0]["c_n"]["value"];
  const double x1 = rows[0]["X_n"]["value"];
  EXPECT_NEAR(c1, c1_beta(), 1e-9);
  EXPECT_DOUBLE_EQ(x1, -2.0 * std::sqrt(2.0) * c1);
  for (const auto& row : rows) {
    EXPECT_TRUE(row["c_n"].contains("error"));
    EXPECT_TRUE(row["X_n"].contains("error"));
  }
}

TEST(Cli, CoarseGridReportsLargerDifference) {
  const auto coarse = run_json("coeffs --order 1 --grid 64");
  const auto fine = run_json("coeffs --order 1 --grid 4096");
  const double a = coarse["data"]["coefficients"][0]["c_n"]["value"];
  const double b = fine["data"]["coefficients"][0]["c_n"]["value"];
  EXPECT_GT(std::abs(a - b), 0.0);
  EXPECT_GT(coarse["meta"]["grid_error"].get<double>(), fine["meta"]["grid_error"].get<double>());
  EXPECT_FALSE(coarse["meta"]["grid_converged"].get<bool>());
}

TEST(Cli, DeterministicOutput) {
  const auto a = run("coeffs --order 4 --grid 512");
  const auto b = run("coeffs --order 4 --grid 512");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto c = run("verify --order 2 --epsilon 0.2 0.3 0.4");
  const auto d = run("verify --order 2 --epsilon 0.2 0.3 0.4");
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(c.out, d.out);
}

TEST(Cli, CsvHasOneHeaderAndFullPrecision) {
  const auto r = run("coeffs --order 2 --format csv");
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "n,c_n,c_n_error,X_n,X_n_error");
  std::string row;
  std::getline(is, row);
  const std::string c1 = row.substr(2, row.find(',', 2) - 2);
  EXPECT_EQ(std::stod(c1), std::stod(c1));
  EXPECT_GE(c1.size(), 18u);  // "0." plus 17 significant digits (give or take exponent form)
  int lines = 2;
  while (std::getline(is, row)) ++lines;
  EXPECT_EQ(lines, 3);
}

TEST(Cli, VerifyOrdersPointsAndFitsSlopes) {
  const auto doc = run_json("verify --order 3 --epsilon-range 0.15:0.45:7");
  const auto& pts = doc["data"]["points"];
  ASSERT_EQ(pts.size(), 7u);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i]["epsilon"], pts[i - 1]["epsilon"]);
  const auto& fits = doc["data"]["slope_fits"];
  EXPECT_NEAR(fits[0]["slope"]["value"].get<double>(), 4.0, 0.3);
  EXPECT_NEAR(fits[3]["slope"]["value"].get<double>(), 13.0, 1.0);
}

TEST(Cli, FixedPointZeroDelta) {
  const auto doc = run_json("fixedpoint --delta 0");
  EXPECT_EQ(doc["data"]["iterations"], 1);
  for (const auto& s : doc["data"]["samples"]) EXPECT_EQ(s["v"]["value"].get<double>(), 0.0);
}

TEST(Cli, MelnikovAgreement) {
  const auto doc = run_json("melnikov --T 1");
  const auto& row = doc["data"]["melnikov"][0];
  EXPECT_NEAR(row["closed_form"]["value"].get<double>(), row["quadrature"]["value"].get<double>(), 1e-10);
}

TEST(Cli, TraceEventsInRotationOrder) {
  const auto doc = run_json("trace --eta 1 --alpha 0.05");
  const auto& ev = doc["data"]["events"];
  ASSERT_EQ(ev.size(), 4u);
  EXPECT_EQ(ev[0]["axis"], "positive-y");
  EXPECT_EQ(ev[1]["axis"], "negative-x");
  EXPECT_EQ(ev[2]["axis"], "negative-y");
  EXPECT_EQ(ev[3]["axis"], "positive-x");
}

TEST(Cli, ConfigFileAndPrecedence) {
  const auto path = temp_file("config.ini");
  {
    std::ofstream f(path);
    f << "# flat key = value\norder = 2\ngrid = 256\n";
  }
  const auto from_file = run_json("coeffs --config " + path.string());
  EXPECT_EQ(from_file["data"]["coefficients"].size(), 2u);
  EXPECT_EQ(from_file["meta"]["config"]["grid"], 256);
  const auto overridden = run_json("coeffs --config " + path.string() + " --order 4");
  EXPECT_EQ(overridden["data"]["coefficients"].size(), 4u);
  EXPECT_EQ(overridden["meta"]["config"]["grid"], 256);
  std::filesystem::remove(path);
}

TEST(Cli, OutFile) {
  const auto path = temp_file("out.json");
  const auto r = run("melnikov --T 2 --out " + path.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  const auto doc = json::parse(f);
  EXPECT_EQ(doc["data"]["melnikov"][0]["T"], 2.0);
  std::filesystem::remove(path);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("coeffs --order 0").code, 2);
  EXPECT_EQ(run("coeffs --grid 32").code, 2);
  EXPECT_EQ(run("coeffs --format xml").code, 2);
  EXPECT_EQ(run("verify --epsilon 0.7").code, 2);
  EXPECT_EQ(run("verify --epsilon-range 0.1-0.2").code, 2);
  EXPECT_EQ(run("trace --eta 3").code, 2);
  EXPECT_EQ(run("melnikov --T -1").code, 2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("coeffs --config /nonexistent/retmap.ini").code, 2);
}

TEST(Cli, NumericalFailureExitsThree) {
  EXPECT_EQ(run("fixedpoint --delta 0.3 --max-iter 2").code, 3);
}

}  // namespace
