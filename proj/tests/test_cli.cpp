#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsa/config.hpp"
#include "nsa/errors.hpp"
#include "nsa/experiments.hpp"

using namespace nsa;
using nsa::cli::parse_config;
using nsa::cli::resolved_config_json;
using nsa::cli::run_experiment;
using nlohmann::json;

namespace {

const char* kMinimalRotatedWell = R"({
  "experiment": "model-spectrum",
  "potential": {"dim": 1, "terms": [{"coeff": [0.0, 1.0], "alpha": [2]}]}
})";

// Fresh directory under the system temp root; wiped before use so reruns
// of the suite start clean.
std::filesystem::path scratch_dir(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / "nsa-cli-tests" / leaf;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  for (std::string field; std::getline(in, field, ',');) fields.push_back(field);
  return fields;
}

json with_output(const char* base_config, const std::filesystem::path& dir) {
  json root = json::parse(base_config);
  root["output_dir"] = dir.string();
  return root;
}

}  // namespace

TEST_CASE("absent keys resolve to the documented defaults") {
  auto config = parse_config(kMinimalRotatedWell);
  CHECK(config.experiment == "model-spectrum");
  CHECK(config.window.search_bound == 8.0);
  CHECK(config.window.reference_a == 2.0);
  CHECK(config.window.line_half_width == 5.0);
  CHECK(config.contour.radius_factor == 0.5);
  CHECK(config.contour.nodes == 32);
  CHECK(config.output_dir == "out");
  CHECK(config.seed == 1);
  CHECK(!config.grid.has_value());
  CHECK(config.h_values.empty());
  REQUIRE(config.spec.has_value());
  CHECK(config.spec->dim == 1);
  REQUIRE(config.spec->v_terms.size() == 1);
  CHECK(config.spec->v_terms[0].coeff == Cplx(0.0, 1.0));
}

TEST_CASE("unknown keys are rejected at every nesting level") {
  auto rejects = [](const std::string& text) {
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  };
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "budget": 3})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "mass": 1.0, "terms": [{"coeff": 1.0, "alpha": [2]}]}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2], "power": 2}]}})");
  rejects(R"({"experiment": "eigs",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "grid": {"L": 4.0, "N": 64, "M": 3}, "h": [0.1]})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "window": {"C": 8.0, "b": 1.0}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "contour": {"nodes": 32, "points": 16}})");
}

TEST_CASE("malformed configs fail with a configuration error") {
  auto rejects = [](const std::string& text) {
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  };
  rejects("{nope");
  rejects("[]");
  rejects(R"({"potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]}})");
  rejects(R"({"experiment": "fly",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]}})");
  rejects(R"({"experiment": "eigs"})");
  rejects(R"({"experiment": "model-spectrum", "potential": {"dim": 0, "terms": []}})");
  rejects(R"({"experiment": "model-spectrum", "potential": {"dim": 1, "terms": []}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": [1.0, 0.0, 0.0], "alpha": [2]}]}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2, 0]}]}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}],
                            "minima": [[0.0, 0.0]]}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "b": [[0.0, 1.0]], "terms": [{"coeff": 1.0, "alpha": [2]}]}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]}, "seed": -1})");
  rejects(R"({"experiment": "eigs",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "grid": {"L": 4.0, "N": 64}, "h": [0.1, -0.05]})");
  rejects(R"({"experiment": "eigs",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "grid": {"L": 4.0, "N": 1}, "h": [0.1]})");
  rejects(R"({"experiment": "eigs",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "grid": {"L": -4.0, "N": 64}, "h": [0.1]})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1,
                            "terms": [{"coeff": 1.0, "alpha": [3], "damp": 1.5}]}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "window": {"delta": 0.0}})");
  rejects(R"({"experiment": "model-spectrum",
              "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]},
              "contour": {"nodes": 2}})");
}

TEST_CASE("grid and h lists are demanded exactly where they are used") {
  for (const std::string kind : {"eigs", "resolvent-map", "semigroup-decay"}) {
    std::string base = R"({"experiment": ")" + kind +
                       R"(", "potential": {"dim": 1, "terms": [{"coeff": 1.0, "alpha": [2]}]})";
    CHECK_THROWS_AS(parse_config(base + "}"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + R"(, "grid": {"L": 4.0, "N": 64}})"), ConfigError);
    CHECK_NOTHROW(parse_config(base + R"(, "grid": {"L": 4.0, "N": 64}, "h": [0.1]})"));
  }
  CHECK_NOTHROW(parse_config(kMinimalRotatedWell));
}

TEST_CASE("verify-all needs no potential") {
  auto config = parse_config(R"({"experiment": "verify-all"})");
  CHECK(config.experiment == "verify-all");
  CHECK(!config.spec.has_value());
}

TEST_CASE("term coefficients accept bare reals and re-im pairs") {
  auto config = parse_config(R"({
    "experiment": "model-spectrum",
    "potential": {"dim": 1,
                  "terms": [{"coeff": 2.5, "alpha": [2]},
                            {"coeff": [1.0, -3.0], "alpha": [4], "damp": 1}]}
  })");
  REQUIRE(config.spec->v_terms.size() == 2);
  CHECK(config.spec->v_terms[0].coeff == Cplx(2.5, 0.0));
  CHECK(config.spec->v_terms[1].coeff == Cplx(1.0, -3.0));
  CHECK(config.spec->v_terms[1].damp == 1);
}

TEST_CASE("resolving a config is idempotent") {
  const char* damped_tail = R"({
    "experiment": "model-spectrum",
    "potential": {"dim": 1,
                  "terms": [{"coeff": [1.0, 1.0], "alpha": [2]},
                            {"coeff": 1.0, "alpha": [3], "damp": 1}]}
  })";
  std::string tail_once = resolved_config_json(parse_config(damped_tail));
  CHECK(tail_once == resolved_config_json(parse_config(tail_once)));

  std::string once = resolved_config_json(parse_config(kMinimalRotatedWell));
  std::string twice = resolved_config_json(parse_config(once));
  CHECK(once == twice);
  json echoed = json::parse(once);
  CHECK(echoed.at("experiment") == "model-spectrum");
  CHECK(echoed.at("window").at("C") == 8.0);
  CHECK(echoed.at("window").at("a") == 2.0);
  CHECK(echoed.at("contour").at("nodes") == 32);
  CHECK(echoed.at("potential").at("terms")[0].at("coeff") == json::array({0.0, 1.0}));
}

TEST_CASE("missing config files report a configuration error") {
  CHECK_THROWS_AS(nsa::cli::load_config("/nonexistent/nsa.json"), ConfigError);
}

TEST_CASE("model spectrum run writes the lattice table and reruns bit-exact") {
  auto dir = scratch_dir("model-spectrum");
  auto config = parse_config(with_output(kMinimalRotatedWell, dir).dump());
  CHECK(run_experiment(config) == 0);

  auto rows = lines_of(slurp(dir / "model_spectrum.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "re_mu,im_mu,nu,multiplicity");
  auto first = fields_of(rows[1]);
  REQUIRE(first.size() == 4);
  CHECK(std::stod(first[0]) == doctest::Approx(0.70710678118654746).epsilon(1e-12));
  CHECK(std::stod(first[1]) == doctest::Approx(0.70710678118654746).epsilon(1e-12));
  CHECK(first[2] == "0");
  CHECK(first[3] == "1");

  json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("pass") == true);
  CHECK(report.at("config").at("experiment") == "model-spectrum");
  CHECK(report.at("outputs") == json::array({"model_spectrum.csv"}));
  CHECK(report.at("results").at("mu0")[0].get<double>() ==
        doctest::Approx(0.70710678118654746).epsilon(1e-12));

  std::string csv_before = slurp(dir / "model_spectrum.csv");
  CHECK(run_experiment(config) == 0);
  CHECK(slurp(dir / "model_spectrum.csv") == csv_before);
}

TEST_CASE("potential checks pass for an admissible well and fail honestly") {
  auto dir = scratch_dir("check-potential");
  json good = json::parse(R"({
    "experiment": "check-potential",
    "potential": {"dim": 1,
                  "terms": [{"coeff": [1.0, 1.0], "alpha": [2]},
                            {"coeff": 1.0, "alpha": [3], "damp": 1}],
                  "minima": [[0.0]]}
  })");
  good["output_dir"] = (dir / "good").string();
  CHECK(run_experiment(parse_config(good.dump())) == 0);
  auto rows = lines_of(slurp(dir / "good" / "assumptions.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "id,pass,margin,constant");
  for (size_t i = 1; i < rows.size(); ++i) CHECK(fields_of(rows[i])[1] == "1");

  // a purely imaginary well has Re V = 0 everywhere, so ellipticity at
  // infinity cannot hold and the run must report failure, not throw
  json bad = json::parse(kMinimalRotatedWell);
  bad["experiment"] = "check-potential";
  bad["potential"]["minima"] = {{0.0}};
  bad["output_dir"] = (dir / "bad").string();
  CHECK(run_experiment(parse_config(bad.dump())) == 1);
  json report = json::parse(slurp(dir / "bad" / "report.json"));
  CHECK(report.at("pass") == false);
}

TEST_CASE("eigenvalue run tracks h times the model lattice") {
  auto dir = scratch_dir("eigs");
  json root = json::parse(R"({
    "experiment": "eigs",
    "potential": {"dim": 1, "terms": [{"coeff": [1.0, 1.0], "alpha": [2]}]},
    "grid": {"L": 6.0, "N": 300},
    "h": [0.1]
  })");
  root["output_dir"] = dir.string();
  CHECK(run_experiment(parse_config(root.dump())) == 0);

  auto rows = lines_of(slurp(dir / "eigs.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "h,re_lambda,im_lambda,residual,paired_re_mu,paired_im_mu");
  auto first = fields_of(rows[1]);
  REQUIRE(first.size() == 6);
  double h = std::stod(first[0]);
  Cplx scaled(std::stod(first[1]) / h, std::stod(first[2]) / h);
  CHECK(std::abs(scaled - std::sqrt(Cplx(1.0, 1.0))) < 0.02);
  CHECK(std::stod(first[3]) < 1e-10);
  CHECK(std::stod(first[4]) == doctest::Approx(1.0986841134678098).epsilon(1e-9));
}

TEST_CASE("resolvent map run keeps the line sup and axis spread in band") {
  auto dir = scratch_dir("resolvent-map");
  json root = json::parse(R"({
    "experiment": "resolvent-map",
    "potential": {"dim": 1, "terms": [{"coeff": [1.0, 1.0], "alpha": [2]}]},
    "grid": {"L": 8.0, "N": 400},
    "h": [0.1, 0.05]
  })");
  root["output_dir"] = dir.string();
  CHECK(run_experiment(parse_config(root.dump())) == 0);

  auto rows = lines_of(slurp(dir / "resolvent_map.csv"));
  CHECK(rows[0] == "h,re_z,im_z,norm,compensated");
  // 11 line samples plus 3 axis probes per h value
  CHECK(rows.size() == 1 + 2 * 14);
  json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("pass") == true);
  double lo = report.at("results").at("line_sup_min").get<double>();
  double hi = report.at("results").at("line_sup_max").get<double>();
  CHECK(hi / lo < 2.0);
}

TEST_CASE("reference line too close to a lattice point is refused") {
  json root = json::parse(R"({
    "experiment": "resolvent-map",
    "potential": {"dim": 1, "terms": [{"coeff": [1.0, 1.0], "alpha": [2]}]},
    "grid": {"L": 8.0, "N": 400},
    "h": [0.1],
    "window": {"a": 1.0986841134678098}
  })");
  CHECK_THROWS_AS(run_experiment(parse_config(root.dump())), ConfigError);
}

TEST_CASE("semigroup decay run fits the spectral gap rate") {
  auto dir = scratch_dir("semigroup-decay");
  json root = json::parse(R"({
    "experiment": "semigroup-decay",
    "potential": {"dim": 1, "terms": [{"coeff": [1.0, 1.0], "alpha": [2]}]},
    "grid": {"L": 4.5, "N": 300},
    "h": [0.05],
    "window": {"a": 2.0},
    "seed": 7
  })");
  root["output_dir"] = dir.string();
  CHECK(run_experiment(parse_config(root.dump())) == 0);

  auto rows = lines_of(slurp(dir / "semigroup_decay.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "h,t,remainder,fitted_rate,a");
  auto first = fields_of(rows[1]);
  REQUIRE(first.size() == 5);
  double rate = std::stod(first[3]);
  CHECK(rate >= 1.9);
  CHECK(rate == doctest::Approx(3.2960).epsilon(0.02));
  CHECK(std::stod(first[4]) == 2.0);
  for (size_t i = 2; i < rows.size(); ++i)
    CHECK(std::stod(fields_of(rows[i])[3]) == rate);
}
