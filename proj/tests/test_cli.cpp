#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code;
  std::string output;  // stdout only
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(HRD_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "hrd_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("simulate is byte-identical across runs") {
  TempDir dir;
  const auto a = dir.file("a.csv");
  const auto b = dir.file("b.csv");
  CHECK(run("simulate --model bm --n 4 --m 8 --seed 7 --out " + a).exit_code == 0);
  CHECK(run("simulate --model bm --n 4 --m 8 --seed 7 --out " + b).exit_code == 0);
  const auto ca = slurp(a);
  CHECK(!ca.empty());
  CHECK(ca == slurp(b));
  CHECK(slurp(a + ".json") == slurp(b + ".json"));
}

TEST_CASE("depth on the three-constant fixture reports 1/3") {
  TempDir dir;
  const auto paths = dir.file("paths.csv");
  const auto query = dir.file("h.csv");
  {
    std::ofstream out(paths);
    out << "0,0.5,1\n1,1,1\n2,2,2\n-1,-1,-1\n";
  }
  {
    std::ofstream out(query);
    out << "t,value\n0,0\n0.5,0\n1,0\n";
  }
  const auto r = run("depth --paths " + paths + " --query " + query);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report["value"].get<double>() == doctest::Approx(1.0 / 3.0));
  CHECK(report["count_above"] == 2);
  CHECK(report["count_below"] == 1);
  CHECK(report.contains("config_hash"));
}

TEST_CASE("check sparre prints the m=10 value") {
  const auto r = run("check sparre --m 10");
  CHECK(r.exit_code == 0);
  CHECK(r.output == "0.176197\n");
}

TEST_CASE("check lemma1 and gradl1") {
  const auto r = run("check lemma1 --family gaussian --scale 1 --delta 0.1");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("bound_holds=yes") != std::string::npos);

  const auto g = run("check gradl1 --family laplace --scale 1");
  CHECK(g.exit_code == 0);
  CHECK(g.output.substr(0, 4) == "1.00");
}

TEST_CASE("smooth -> depth pipeline through files") {
  TempDir dir;
  const auto raw = dir.file("raw.csv");
  const auto smoothed = dir.file("smoothed.csv");
  const auto query = dir.file("zero.csv");
  REQUIRE(run("simulate --model bm --n 2000 --m 8 --seed 5 --out " + raw).exit_code == 0);
  REQUIRE(run("smooth --paths " + raw + " --family gaussian --scale 1 --seed 9 --out " +
              smoothed)
              .exit_code == 0);
  {
    std::ofstream out(query);
    out << "t,value\n";
    for (int i = 0; i <= 8; ++i) out << (i / 8.0) << ",0\n";
  }
  const auto r = run("depth --paths " + smoothed + " --query " + query);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.output);
  // Smoothed BM at h = 0 sits near 1/4 even on a coarse grid.
  CHECK(report["value"].get<double>() > 0.2);
  CHECK(report["value"].get<double>() < 0.4);
}

TEST_CASE("exact subcommand") {
  const auto r = run("exact --marginals "
                     "'[{\"kind\":\"gaussian\",\"mu\":0,\"sigma\":1},"
                     "{\"kind\":\"gaussian\",\"mu\":0,\"sigma\":1}]' --at 0,0 "
                     "--tail '{\"kind\":\"constant\",\"c\":1}'");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report["exact_depth"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(report["verdict"] == "zero-by-divergence");

  // Without a tail the two-coordinate product is a legitimate positive case.
  const auto fin = run("exact --marginals "
                       "'[{\"kind\":\"gaussian\",\"mu\":0,\"sigma\":1},"
                       "{\"kind\":\"gaussian\",\"mu\":0,\"sigma\":1}]' --at 0,0");
  REQUIRE(fin.exit_code == 0);
  CHECK(json::parse(fin.output)["verdict"] == "positive");
}

TEST_CASE("experiment with config file, plot, and schema validation") {
  TempDir dir;
  const auto cfg_path = dir.file("cfg.json");
  const auto out_path = dir.file("report.json");
  const auto plot_path = dir.file("plot.svg");
  {
    std::ofstream out(cfg_path);
    out << R"({"experiment":"zero-trend","model":{"kind":"bm"},"h":0,
               "m_schedule":[4,8],"n":2000,"seed":3})";
  }
  const auto r = run("experiment zero-trend --config " + cfg_path + " --out " + out_path +
                     " --plot " + plot_path);
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(slurp(out_path));
  CHECK(report["kind"] == "zero-trend");
  CHECK(report["series"]["depth"].size() == 2);
  CHECK(report["series"]["oracle"].size() == 2);
  CHECK(report.contains("config_hash"));
  const auto svg = slurp(plot_path);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected with exit code 2") {
  TempDir dir;
  const auto cfg_path = dir.file("bad.json");
  {
    std::ofstream out(cfg_path);
    out << R"({"experiment":"zero-trend","model":{"kind":"bm"},"banana":1})";
  }
  CHECK(run("experiment zero-trend --config " + cfg_path).exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("simulate --model warp-drive --out /tmp/x.csv").exit_code == 2);
  CHECK(run("depth --paths /nonexistent.csv --query /nonexistent2.csv").exit_code == 2);
}

TEST_CASE("schema subcommand prints the published schema") {
  const auto r = run("schema");
  REQUIRE(r.exit_code == 0);
  const json schema = json::parse(r.output);
  CHECK(schema["properties"].contains("experiment"));
  CHECK(schema["additionalProperties"] == false);
}

TEST_CASE("rerunning a report's embedded config reproduces it bit-for-bit") {
  TempDir dir;
  const auto out1 = dir.file("r1.json");
  const auto out2 = dir.file("r2.json");
  const auto cfg2 = dir.file("cfg2.json");
  const auto rep_csv = dir.file("reps.csv");
  REQUIRE(run("experiment consistency --model bm --smooth-family gaussian --smooth-scale 1 "
              "--m 8 --eps 0.5 --reps 5 --n-schedule 100 200 --seed 11 --out " +
              out1 + " --rep-csv " + rep_csv)
              .exit_code == 0);
  json r1 = json::parse(slurp(out1));
  {
    std::ofstream out(cfg2);
    out << r1["config"].dump();
  }
  REQUIRE(run("experiment consistency --config " + cfg2 + " --out " + out2).exit_code == 0);
  json r2 = json::parse(slurp(out2));
  r1.erase("wall_seconds");
  r2.erase("wall_seconds");
  CHECK(r1 == r2);

  // The flat per-rep CSV carries reps for both schedule points.
  const auto csv = slurp(rep_csv);
  CHECK(csv.rfind("x,rep,value\n", 0) == 0);
  CHECK(csv.find("\n100,0,") != std::string::npos);
  CHECK(csv.find("\n200,4,") != std::string::npos);
}

TEST_CASE("c2-gap experiment through the CLI") {
  const auto r = run("experiment c2-gap --model reflected-bm --level 0 --level2 0.01 --n 2000 --m 16 "
                     "--seed 4");
  REQUIRE(r.exit_code == 0);
  const json report = json::parse(r.output);
  CHECK(report["scalars"]["gap"].get<double>() == doctest::Approx(1.0));
}
