// hrdepth: simulate stochastic processes, smooth them, compute half-region
// depths, and run the verification experiments. Exit codes: 0 success,
// 2 configuration error, 3 numeric failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hrd/analysis.hpp"
#include "hrd/depth.hpp"
#include "hrd/io.hpp"
#include "hrd/kernels.hpp"
#include "hrd/numeric.hpp"
#include "hrd/smoothing.hpp"
#include "hrd/svg.hpp"

using nlohmann::json;
namespace io = hrd::io;

namespace {

struct ModelFlags {
  std::string kind = "bm";
  double alpha = 2.0;
  double lambda = 1.0;
  std::string smooth_family;
  double smooth_scale = 1.0;
  std::string model_json;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", kind,
                    "bm|stable|poisson|compound-poisson|sheet|reflected-bm|"
                    "integrated-poisson|product");
    cmd->add_option("--alpha", alpha, "stable index in (0,2]");
    cmd->add_option("--lambda", lambda, "Poisson jump rate");
    cmd->add_option("--smooth-family", smooth_family, "gaussian|laplace|cauchy");
    cmd->add_option("--smooth-scale", smooth_scale, "smoothing density scale");
    cmd->add_option("--model-json", model_json, "full model spec as JSON (overrides flags)");
  }

  hrd::ProcessModel build() const {
    if (!model_json.empty()) return io::model_from_json(json::parse(model_json));
    json j{{"kind", kind}};
    if (kind == "stable") j["alpha"] = alpha;
    if (kind == "poisson" || kind == "integrated-poisson" || kind == "compound-poisson")
      j["lambda"] = lambda;
    if (kind == "compound-poisson") j["jump"] = {{"kind", "gaussian"}, {"mu", 0}, {"sigma", 1}};
    hrd::ProcessModel model = io::model_from_json(j);
    if (!smooth_family.empty())
      model = model.with_smoothing(
          io::density_from_json(json{{"family", smooth_family}, {"scale", smooth_scale}}));
    return model;
  }

  json describe() const {
    if (!model_json.empty()) return json::parse(model_json);
    return io::to_json(build());
  }
};

hrd::SmoothingDensity density_from_flags(const std::string& family, double scale,
                                         const std::string& density_json) {
  if (!density_json.empty()) return io::density_from_json(json::parse(density_json));
  return io::density_from_json(json{{"family", family}, {"scale", scale}});
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stoul(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_intervals(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (!cur.empty()) {
        const auto dash = cur.find('-');
        if (dash == std::string::npos)
          throw std::invalid_argument("interval must look like u-v: " + cur);
        out.emplace_back(std::stoul(cur.substr(0, dash)), std::stoul(cur.substr(dash + 1)));
      }
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << std::endl;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

// Merge <config file> under the CLI flags: the file provides values, the
// schema gates it, explicitly-passed flags win.
json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  json doc;
  in >> doc;
  io::validate_against_schema(doc, json::parse(io::run_config_schema()));
  return doc;
}

hrd::FamilySpec family_from_config(const json& cfg, const hrd::Grid& grid) {
  const json fam = cfg.value("family", json{{"kind", "constants"}, {"radius", 2.0}});
  const std::string kind = fam.at("kind").get<std::string>();
  if (kind == "constants") {
    if (fam.contains("levels")) {
      std::vector<hrd::GridFunction> members;
      for (double c : fam["levels"].get<std::vector<double>>())
        members.push_back(hrd::GridFunction::constant(grid, c));
      return hrd::FamilySpec::finite_list(std::move(members));
    }
    return hrd::FamilySpec::constants(grid, fam.value("radius", 2.0));
  }
  if (kind == "finite-list") {
    std::vector<hrd::GridFunction> members;
    for (double c : fam.at("levels").get<std::vector<double>>())
      members.push_back(hrd::GridFunction::constant(grid, c));
    return hrd::FamilySpec::finite_list(std::move(members));
  }
  if (kind == "lipschitz-ball")
    return hrd::FamilySpec::lipschitz_ball(grid, fam.value("radius", 1.0), fam.value("lip", 1.0));
  if (kind == "smooth-ball")
    return hrd::FamilySpec::smooth_ball(grid, fam.value("radius", 1.0), fam.value("lip", 1.0),
                                        fam.value("lip2", 1.0));
  throw std::invalid_argument("unknown family kind: " + kind);
}

hrd::OraclePolicy oracle_from_config(const json& cfg) {
  hrd::OraclePolicy policy;
  if (const char* env = std::getenv("HRDEPTH_CACHE")) policy.cache_dir = env;
  if (cfg.contains("oracle")) {
    const json& o = cfg["oracle"];
    policy.n_ref = o.value("n_ref", policy.n_ref);
    policy.seed = o.value("seed", policy.seed);
    policy.cache_dir = o.value("cache_dir", policy.cache_dir);
    policy.margin_conditioning = o.value("margin_conditioning", true);
  }
  return policy;
}

void plot_report(const std::string& path, const hrd::ExperimentReport& r) {
  using hrd::svg::Series;
  std::vector<Series> series;
  hrd::svg::ChartSpec spec;
  if (r.kind == "zero-trend") {
    spec = {"depth of h by grid resolution", "m", "depth", true, false};
    series.push_back({"empirical", r.series.at("m"), r.series.at("depth")});
    if (r.series.count("oracle")) series.push_back({"exact", r.series.at("m"), r.series.at("oracle")});
  } else if (r.kind == "rate") {
    spec = {"tail of sup sqrt(n)|D_n - D|", "r^2", "exceedance", false, true};
    Series s{"pooled exceedance", {}, {}};
    for (const auto& t : r.tail)
      if (t.exceedance > 0) {
        s.x.push_back(t.r * t.r);
        s.y.push_back(t.exceedance);
      }
    series.push_back(std::move(s));
  } else {
    spec = {r.kind + " sup error by n", "n", "median sup error", true, true};
    Series s{"median", {}, {}};
    for (const auto& row : r.rows) {
      s.x.push_back(row.x);
      s.y.push_back(row.q50);
    }
    series.push_back(std::move(s));
  }
  hrd::svg::write_line_chart(path, spec, series);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"half-region depth laboratory for stochastic processes"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate a seeded path ensemble");
  ModelFlags sim_model;
  sim_model.attach(sim);
  std::size_t sim_n = 100, sim_m = 64;
  std::uint64_t sim_seed = 1;
  unsigned sim_jobs = 0;
  std::string sim_out = "paths.csv";
  sim->add_option("--n", sim_n, "number of paths");
  sim->add_option("--m", sim_m, "grid resolution (steps; per axis for sheet)");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--jobs", sim_jobs, "worker threads (default: cores, env HRDEPTH_JOBS)");
  sim->add_option("--out", sim_out, "output CSV path (sidecar written alongside)");

  // ---- smooth ----
  auto* smo = app.add_subcommand("smooth", "add one smoothing draw to every path");
  std::string smo_paths, smo_sidecar, smo_out = "smoothed.csv", smo_family = "gaussian",
              smo_density_json;
  double smo_scale = 1.0;
  std::uint64_t smo_seed = 1;
  smo->add_option("--paths", smo_paths, "input ensemble CSV")->required();
  smo->add_option("--sidecar", smo_sidecar, "input sidecar JSON (default: <paths>.json)");
  smo->add_option("--family", smo_family, "gaussian|laplace|cauchy");
  smo->add_option("--scale", smo_scale, "density scale");
  smo->add_option("--density-json", smo_density_json, "density spec JSON {family, scale}");
  smo->add_option("--seed", smo_seed, "smoothing seed");
  smo->add_option("--out", smo_out, "output CSV path");

  // ---- depth ----
  auto* dep = app.add_subcommand("depth", "empirical half-region depth of a query function");
  std::string dep_paths, dep_sidecar, dep_query, dep_subset, dep_intervals, dep_out;
  unsigned dep_jobs = 0;
  dep->add_option("--paths", dep_paths, "ensemble CSV")->required();
  dep->add_option("--sidecar", dep_sidecar, "ensemble sidecar JSON");
  dep->add_option("--query", dep_query, "query grid function CSV")->required();
  dep->add_option("--subset", dep_subset, "comma-separated grid indices (subset depth)");
  dep->add_option("--intervals", dep_intervals, "disjoint index pairs u-v,... (increment depth)");
  dep->add_option("--jobs", dep_jobs, "worker threads");
  dep->add_option("--out", dep_out, "report JSON path (default: stdout)");

  // ---- exact ----
  auto* exa = app.add_subcommand("exact", "exact product-law depth and zero-depth verdict");
  std::string exa_marginals, exa_at, exa_tail, exa_out;
  exa->add_option("--marginals", exa_marginals, "JSON array of marginal specs (or file path)")
      ->required();
  exa->add_option("--at", exa_at, "comma-separated sequence a_t")->required();
  exa->add_option("--tail", exa_tail, "tail model JSON, e.g. {\"kind\":\"geometric\",...}");
  exa->add_option("--out", exa_out, "report JSON path (default: stdout)");

  // ---- check ----
  auto* chk = app.add_subcommand("check", "closed-form sanity checks");
  chk->require_subcommand(1);
  auto* chk_lemma = chk->add_subcommand("lemma1", "L1 shift bound for a smoothing density");
  std::string chk_family = "gaussian";
  double chk_scale = 1.0, chk_delta = 0.1;
  chk_lemma->add_option("--family", chk_family);
  chk_lemma->add_option("--scale", chk_scale);
  chk_lemma->add_option("--delta", chk_delta);
  auto* chk_sparre = chk->add_subcommand("sparre", "symmetric-walk persistence C(2m,m)/4^m");
  std::size_t chk_m = 10;
  chk_sparre->add_option("--m", chk_m);
  auto* chk_grad = chk->add_subcommand("gradl1", "total variation of a smoothing density");
  chk_grad->add_option("--family", chk_family);
  chk_grad->add_option("--scale", chk_scale);

  // ---- experiment ----
  auto* exp = app.add_subcommand("experiment", "run a verification experiment");
  exp->require_subcommand(1);
  std::string exp_config, exp_out, exp_plot, exp_rep_csv;
  ModelFlags exp_model;
  double exp_h = 0.0, exp_h2 = 0.01, exp_eps = 0.05;
  std::size_t exp_n = 100000, exp_m = 64, exp_reps = 100, exp_r = 3, exp_subsets = 200;
  std::uint64_t exp_seed = 1;
  unsigned exp_jobs = 0;
  std::vector<std::size_t> exp_mschedule{4, 16, 64, 256};
  std::vector<std::size_t> exp_nschedule;
  std::vector<CLI::App*> exp_cmds;
  for (const char* name : {"zero-trend", "consistency", "rate", "limit-law", "subset", "c2-gap"}) {
    auto* cmd = exp->add_subcommand(name);
    cmd->add_option("--config", exp_config, "config JSON (validated against the schema)");
    cmd->add_option("--out", exp_out, "report JSON path (default: stdout)");
    cmd->add_option("--plot", exp_plot, "SVG chart path");
    cmd->add_option("--rep-csv", exp_rep_csv, "flat per-replication CSV path");
    exp_model.attach(cmd);
    cmd->add_option("--level", exp_h, "constant query level h");
    cmd->add_option("--level2", exp_h2, "upper constant level (c2-gap)");
    cmd->add_option("--eps", exp_eps, "net resolution");
    cmd->add_option("--n", exp_n, "paths per run");
    cmd->add_option("--m", exp_m, "grid resolution");
    cmd->add_option("--reps", exp_reps, "replications");
    cmd->add_option("--r", exp_r, "max subset cardinality");
    cmd->add_option("--n-subsets", exp_subsets, "sampled subsets");
    cmd->add_option("--seed", exp_seed, "experiment seed");
    cmd->add_option("--jobs", exp_jobs, "worker threads");
    cmd->add_option("--m-schedule", exp_mschedule, "grid resolutions");
    cmd->add_option("--n-schedule", exp_nschedule, "sample sizes");
    exp_cmds.push_back(cmd);
  }

  // ---- schema ----
  auto* sch = app.add_subcommand("schema", "print the experiment config JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints usage/help
    return code == 0 ? 0 : 2;
  }

  if (*sim) {
    const auto model = sim_model.build();
    const auto ens = simulate(model, sim_n, sim_m, sim_seed, {.jobs = sim_jobs});
    io::write_ensemble_csv(sim_out, ens);
    io::write_ensemble_sidecar(sim_out + ".json", ens);
    json cfg{{"cmd", "simulate"}, {"model", sim_model.describe()}, {"n", sim_n},
             {"m", sim_m},        {"seed", sim_seed}};
    std::cerr << "wrote " << sim_out << " (config " << io::config_hash(cfg) << ", seed "
              << sim_seed << ")\n";
    return 0;
  }

  if (*smo) {
    const std::string sidecar = smo_sidecar.empty() ? smo_paths + ".json" : smo_sidecar;
    std::ifstream probe(sidecar);
    const auto ens = io::read_ensemble_csv(smo_paths, probe.good() ? sidecar : "");
    const auto density = density_from_flags(smo_family, smo_scale, smo_density_json);
    const auto out = smooth_ensemble(ens, density, smo_seed);
    io::write_ensemble_csv(smo_out, out);
    io::write_ensemble_sidecar(smo_out + ".json", out);
    std::cerr << "wrote " << smo_out << " (seed " << smo_seed << ")\n";
    return 0;
  }

  if (*dep) {
    std::ifstream probe(dep_sidecar.empty() ? dep_paths + ".json" : dep_sidecar);
    const auto ens = io::read_ensemble_csv(
        dep_paths, probe.good() ? (dep_sidecar.empty() ? dep_paths + ".json" : dep_sidecar) : "");
    const auto h = io::read_gridfunction_csv(dep_query);
    hrd::DepthEstimate est;
    if (!dep_intervals.empty()) {
      est = empirical_increment_depth(ens, h, parse_intervals(dep_intervals), dep_jobs);
    } else if (!dep_subset.empty()) {
      est = empirical_depth_subset(
          ens, h, hrd::IndexSubset::of(parse_index_list(dep_subset), ens.n_values()), dep_jobs);
    } else {
      est = empirical_depth(ens, h, dep_jobs);
    }
    json cfg{{"cmd", "depth"},
             {"paths", dep_paths},
             {"query", dep_query},
             {"subset", dep_subset},
             {"intervals", dep_intervals}};
    write_json(dep_out, io::depth_report(est, io::config_hash(cfg)));
    return 0;
  }

  if (*exa) {
    json margs_json;
    std::ifstream file(exa_marginals);
    if (file.good())
      file >> margs_json;
    else
      margs_json = json::parse(exa_marginals);
    std::vector<hrd::MarginalSpec> margs;
    for (const auto& j : margs_json) margs.push_back(io::marginal_from_json(j));
    std::vector<double> at;
    std::string cur;
    for (char c : exa_at + ",") {
      if (c == ',') {
        if (!cur.empty()) at.push_back(std::stod(cur));
        cur.clear();
      } else
        cur.push_back(c);
    }
    const auto tail =
        exa_tail.empty() ? hrd::TailModel::None() : io::tail_from_json(json::parse(exa_tail));
    const auto verdict = nasc_verdict(margs, at, tail);
    json out{{"exact_depth", exact_product_depth(margs, at)}};
    switch (verdict.kind) {
      case hrd::ZeroDepthVerdict::Kind::zero_by_boundary:
        out["verdict"] = "zero-by-boundary";
        out["witness_t"] = verdict.witness_t;
        break;
      case hrd::ZeroDepthVerdict::Kind::zero_by_divergence:
        out["verdict"] = "zero-by-divergence";
        out["partial_sums"] = verdict.partial_sums;
        break;
      case hrd::ZeroDepthVerdict::Kind::positive:
        out["verdict"] = "positive";
        out["value"] = verdict.value;
        break;
    }
    json cfg{{"cmd", "exact"}, {"marginals", margs_json}, {"at", at}};
    out["config_hash"] = io::config_hash(cfg);
    write_json(exa_out, out);
    return 0;
  }

  if (*chk) {
    if (*chk_sparre) {
      std::printf("%.6f\n", hrd::sparre_andersen_exact(chk_m));
      return 0;
    }
    const auto density = density_from_flags(chk_family, chk_scale, "");
    if (*chk_lemma) {
      const auto r = hrd::tv_shift_check(density, chk_delta);
      std::printf("lhs=%.9f rhs=%.9f w3_bound=%.9f bound_holds=%s\n", r.lhs, r.rhs, r.w3_bound,
                  r.lhs <= r.rhs ? "yes" : "no");
      return r.lhs <= r.rhs ? 0 : 3;
    }
    std::printf("%.9f\n", density.grad_l1());
    return 0;
  }

  if (*sch) {
    std::cout << json::parse(io::run_config_schema()).dump(2) << std::endl;
    return 0;
  }

  if (*exp) {
    json cfg = exp_config.empty() ? json::object() : load_config(exp_config);
    const std::string kind = exp->get_subcommands().front()->get_name();
    if (cfg.contains("experiment") && cfg["experiment"] != kind)
      throw std::invalid_argument("config experiment kind disagrees with the subcommand");
    cfg["experiment"] = kind;
    CLI::App* cmd = exp->get_subcommands().front();
    // Explicit flags override the config file.
    if (cmd->count("--model") || cmd->count("--model-json") || cmd->count("--smooth-family") ||
        !cfg.contains("model"))
      cfg["model"] = exp_model.describe();
    auto put_if = [&](const char* flag, const char* key, auto value) {
      if (cmd->count(flag) || !cfg.contains(key)) cfg[key] = value;
    };
    put_if("--level", "h", exp_h);
    put_if("--level2", "h2", exp_h2);
    put_if("--eps", "eps", exp_eps);
    put_if("--n", "n", exp_n);
    put_if("--m", "m", exp_m);
    put_if("--reps", "reps", exp_reps);
    put_if("--r", "r", exp_r);
    put_if("--n-subsets", "n_subsets", exp_subsets);
    put_if("--seed", "seed", exp_seed);
    put_if("--jobs", "jobs", exp_jobs);
    put_if("--m-schedule", "m_schedule", exp_mschedule);
    if (!exp_nschedule.empty() || !cfg.contains("n_schedule"))
      cfg["n_schedule"] = exp_nschedule.empty() ? std::vector<std::size_t>{100, 1000, 10000}
                                                : exp_nschedule;
    io::validate_against_schema(cfg, json::parse(io::run_config_schema()));
    if (exp_out.empty() && cfg.contains("out")) exp_out = cfg["out"].get<std::string>();
    if (exp_plot.empty() && cfg.contains("plot")) exp_plot = cfg["plot"].get<std::string>();
    if (exp_rep_csv.empty() && cfg.contains("rep_csv"))
      exp_rep_csv = cfg["rep_csv"].get<std::string>();

    const auto model = io::model_from_json(cfg["model"]);
    const auto policy = oracle_from_config(cfg);
    const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
    const unsigned jobs = cfg["jobs"].get<unsigned>();
    const std::size_t m = cfg["m"].get<std::size_t>();
    hrd::ExperimentReport report;

    if (kind == "zero-trend") {
      const auto schedule = cfg["m_schedule"].get<std::vector<std::size_t>>();
      const std::size_t finest = *std::max_element(schedule.begin(), schedule.end());
      hrd::ZeroTrendConfig c{model,
                             hrd::GridFunction::constant(grid_for(model, finest),
                                                         cfg["h"].get<double>()),
                             schedule, cfg["n"].get<std::size_t>(), seed, jobs};
      report = zero_depth_trend(c);
    } else if (kind == "consistency") {
      hrd::ConsistencyConfig c{model,
                               family_from_config(cfg, grid_for(model, m)),
                               cfg["eps"].get<double>(),
                               m,
                               cfg["n_schedule"].get<std::vector<std::size_t>>(),
                               cfg["reps"].get<std::size_t>(),
                               seed,
                               policy,
                               jobs};
      report = consistency_experiment(c);
    } else if (kind == "rate") {
      hrd::RateConfig c;
      c.model = model;
      c.family = family_from_config(cfg, grid_for(model, m));
      c.eps = cfg["eps"].get<double>();
      c.m = m;
      c.n_schedule = cfg["n_schedule"].get<std::vector<std::size_t>>();
      c.reps = cfg["reps"].get<std::size_t>();
      if (cfg.contains("r_grid")) c.r_grid = cfg["r_grid"].get<std::vector<double>>();
      c.seed = seed;
      c.oracle = policy;
      c.jobs = jobs;
      report = rate_experiment(c);
    } else if (kind == "limit-law") {
      hrd::LimitLawConfig c{model,
                            hrd::GridFunction::constant(grid_for(model, m), cfg["h"].get<double>()),
                            m,
                            cfg["n"].get<std::size_t>(),
                            cfg["reps"].get<std::size_t>(),
                            seed,
                            policy,
                            jobs};
      report = limit_law_demo(c);
    } else if (kind == "subset") {
      hrd::SubsetConsistencyConfig c;
      c.model = model;
      c.family = family_from_config(cfg, grid_for(model, m));
      c.eps = cfg["eps"].get<double>();
      c.r = cfg["r"].get<std::size_t>();
      c.n_subsets = cfg["n_subsets"].get<std::size_t>();
      c.m = m;
      c.n_schedule = cfg["n_schedule"].get<std::vector<std::size_t>>();
      c.reps = cfg["reps"].get<std::size_t>();
      c.seed = seed;
      c.oracle = policy;
      c.jobs = jobs;
      report = subset_consistency_experiment(c);
    } else {  // c2-gap
      const auto grid = grid_for(model, m);
      hrd::C2GapConfig c{model, hrd::GridFunction::constant(grid, cfg["h"].get<double>()),
                         hrd::GridFunction::constant(grid, cfg["h2"].get<double>()),
                         cfg["n"].get<std::size_t>(), seed, jobs};
      report = c2_gap_report(c);
    }

    json out_doc = io::experiment_report(report, io::config_hash(cfg));
    out_doc["config"] = cfg;  // rerunning the embedded config reproduces the report
    write_json(exp_out, out_doc);
    if (!exp_plot.empty()) plot_report(exp_plot, report);
    if (!exp_rep_csv.empty()) io::write_rep_stats_csv(exp_rep_csv, report);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const hrd::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
