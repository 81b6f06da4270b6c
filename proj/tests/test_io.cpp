#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hrd/depth.hpp"
#include "hrd/io.hpp"

using namespace hrd;
using nlohmann::json;

namespace {

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("grid function CSV round trip is exact") {
  Grid g;
  g.axis1 = {0.0, 1.0 / 3.0, 0.70000000000000007, 1.0};
  const GridFunction f(g, {1.0, -0.12345678901234567, 3e-300, 7.0});
  const auto path = tmp_file("hrd_gf.csv");
  io::write_gridfunction_csv(path.string(), f);
  const auto back = io::read_gridfunction_csv(path.string());
  CHECK(back.grid == f.grid);
  CHECK(back.values == f.values);
  std::filesystem::remove(path);
}

TEST_CASE("2D grid function CSV round trip") {
  const auto g = Grid::uniform01_2d(2);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i) - 0.4;
  const GridFunction f(g, v);
  const auto path = tmp_file("hrd_gf2.csv");
  io::write_gridfunction_csv(path.string(), f);
  const auto back = io::read_gridfunction_csv(path.string());
  CHECK(back.grid == f.grid);
  CHECK(back.values == f.values);
  std::filesystem::remove(path);
}

TEST_CASE("ensemble CSV + sidecar round trip preserves depth exactly") {
  const auto ens = simulate(ProcessModel::SymmetricStable(1.3), 200, 16, 77);
  const auto csv = tmp_file("hrd_ens.csv");
  const auto sidecar = tmp_file("hrd_ens.csv.json");
  io::write_ensemble_csv(csv.string(), ens);
  io::write_ensemble_sidecar(sidecar.string(), ens);
  const auto back = io::read_ensemble_csv(csv.string(), sidecar.string());
  CHECK(back.grid == ens.grid);
  CHECK(back.data == ens.data);
  CHECK(back.seed == ens.seed);
  CHECK(back.smoothed == ens.smoothed);

  const auto h = GridFunction::constant(ens.grid, 0.1);
  const auto d0 = empirical_depth(ens, h);
  const auto d1 = empirical_depth(back, h);
  CHECK(d0.value == d1.value);
  CHECK(d0.count_above == d1.count_above);
  CHECK(d0.count_below == d1.count_below);
  std::filesystem::remove(csv);
  std::filesystem::remove(sidecar);
}

TEST_CASE("2D ensembles round trip through the sidecar grid") {
  const auto ens = simulate(ProcessModel::BrownianSheet(), 20, 4, 5);
  const auto csv = tmp_file("hrd_sheet.csv");
  const auto sidecar = tmp_file("hrd_sheet.csv.json");
  io::write_ensemble_csv(csv.string(), ens);
  io::write_ensemble_sidecar(sidecar.string(), ens);
  const auto back = io::read_ensemble_csv(csv.string(), sidecar.string());
  CHECK(back.grid == ens.grid);
  CHECK(back.data == ens.data);
  std::filesystem::remove(csv);
  std::filesystem::remove(sidecar);
}

TEST_CASE("model JSON round trip") {
  const auto model = ProcessModel::CompoundPoisson(2.5, MarginalSpec::TwoPoint(1.0, 0.25))
                         .with_smoothing(SmoothingDensity::Cauchy(0.5));
  const auto j = io::to_json(model);
  const auto back = io::model_from_json(j);
  CHECK(back.kind == model.kind);
  CHECK(back.lambda == model.lambda);
  CHECK(back.jump.c == model.jump.c);
  CHECK(back.smoothing->family == model.smoothing->family);
  CHECK(io::to_json(back) == j);

  const auto prod = ProcessModel::ProductSequence(
      {MarginalSpec::Gaussian(0, 1),
       MarginalSpec::MixtureAtomContinuous(0.0, 0.4, MarginalSpec::Uniform(-1, 1))});
  CHECK(io::to_json(io::model_from_json(io::to_json(prod))) == io::to_json(prod));
}

TEST_CASE("schema validation rejects unknown keys and wrong types") {
  const auto schema = json::parse(io::run_config_schema());
  json good{{"experiment", "consistency"},
            {"model", {{"kind", "bm"}, {"smoothing", {{"family", "gaussian"}, {"scale", 1.0}}}}},
            {"n_schedule", {100, 1000}},
            {"reps", 5}};
  CHECK_NOTHROW(io::validate_against_schema(good, schema));

  json unknown = good;
  unknown["typo_key"] = 1;
  CHECK_THROWS_AS(io::validate_against_schema(unknown, schema), std::invalid_argument);

  json bad_enum = good;
  bad_enum["experiment"] = "nonsense";
  CHECK_THROWS_AS(io::validate_against_schema(bad_enum, schema), std::invalid_argument);

  json bad_type = good;
  bad_type["reps"] = "many";
  CHECK_THROWS_AS(io::validate_against_schema(bad_type, schema), std::invalid_argument);

  json nested_unknown = good;
  nested_unknown["model"]["volatility"] = 2.0;
  CHECK_THROWS_AS(io::validate_against_schema(nested_unknown, schema), std::invalid_argument);
}

TEST_CASE("config hash is stable and key-order independent") {
  const json a{{"x", 1}, {"y", {1, 2, 3}}};
  const json b{{"y", {1, 2, 3}}, {"x", 1}};
  CHECK(io::config_hash(a) == io::config_hash(b));  // nlohmann objects sort keys
  CHECK(io::config_hash(a).size() == 16);
  const json c{{"x", 2}, {"y", {1, 2, 3}}};
  CHECK(io::config_hash(a) != io::config_hash(c));
}

TEST_CASE("depth report JSON carries the required fields") {
  const auto ens = simulate(ProcessModel::Poisson(1.0), 1000, 8, 3);
  const auto d = empirical_depth(ens, GridFunction::constant(ens.grid, 0.0));
  const auto j = io::depth_report(d, "deadbeef00000000");
  for (const char* key : {"value", "count_above", "count_below", "n", "ci_half_width",
                          "grid_size", "seed", "model", "config_hash"})
    CHECK(j.contains(key));
}
