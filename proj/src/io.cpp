#include "hrd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hrd/hashutil.hpp"

namespace hrd::io {

using nlohmann::json;

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open for reading: " + path);
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric field in " + what + ": '" + s + "'");
  }
  require(pos == s.size(), "trailing junk in numeric field of " + what + ": '" + s + "'");
  return v;
}

}  // namespace

void write_gridfunction_csv(const std::string& path, const GridFunction& f) {
  f.validate();
  auto out = open_out(path);
  if (!f.grid.is_2d()) {
    out << "t,value\n";
    for (std::size_t i = 0; i < f.size(); ++i)
      out << fmt17(f.grid.axis1[i]) << ',' << fmt17(f.values[i]) << '\n';
  } else {
    out << "t1,t2,value\n";
    const std::size_t n2 = f.grid.axis2.size();
    for (std::size_t i1 = 0; i1 < f.grid.axis1.size(); ++i1)
      for (std::size_t i2 = 0; i2 < n2; ++i2)
        out << fmt17(f.grid.axis1[i1]) << ',' << fmt17(f.grid.axis2[i2]) << ','
            << fmt17(f.values[i1 * n2 + i2]) << '\n';
  }
}

GridFunction read_gridfunction_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty grid function CSV: " + path);
  const auto header = split_csv_line(line);
  const bool two_d = header.size() == 3;
  require(two_d ? (header[0] == "t1" && header[1] == "t2" && header[2] == "value")
                : (header.size() == 2 && header[0] == "t" && header[1] == "value"),
          "grid function CSV header must be 't,value' or 't1,t2,value'");

  Grid grid;
  std::vector<double> values;
  if (!two_d) {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      require(fields.size() == 2, "grid function CSV rows need 2 fields");
      grid.axis1.push_back(parse_double(fields[0], path));
      values.push_back(parse_double(fields[1], path));
    }
  } else {
    std::vector<double> t1s, t2s;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      require(fields.size() == 3, "grid function CSV rows need 3 fields");
      t1s.push_back(parse_double(fields[0], path));
      t2s.push_back(parse_double(fields[1], path));
      values.push_back(parse_double(fields[2], path));
    }
    // Rows are written t1-major over a rectangular lattice.
    for (double t : t2s) {
      if (!grid.axis2.empty() && t == grid.axis2.front()) break;
      grid.axis2.push_back(t);
    }
    require(!grid.axis2.empty() && t1s.size() % grid.axis2.size() == 0,
            "2D grid function CSV is not a rectangular lattice");
    for (std::size_t i = 0; i < t1s.size(); i += grid.axis2.size())
      grid.axis1.push_back(t1s[i]);
  }
  return GridFunction(std::move(grid), std::move(values));
}

void write_ensemble_csv(const std::string& path, const PathEnsemble& ens) {
  auto out = open_out(path);
  const std::size_t m = ens.n_values();
  if (!ens.grid.is_2d()) {
    for (std::size_t i = 0; i < m; ++i)
      out << (i ? "," : "") << fmt17(ens.grid.axis1[i]);
  } else {
    for (std::size_t i = 0; i < m; ++i) out << (i ? "," : "") << i;
  }
  out << '\n';
  for (std::size_t j = 0; j < ens.n_paths; ++j) {
    const auto p = ens.path(j);
    for (std::size_t i = 0; i < m; ++i) out << (i ? "," : "") << fmt17(p[i]);
    out << '\n';
  }
}

void write_ensemble_sidecar(const std::string& path, const PathEnsemble& ens) {
  json j{{"model", ens.model_tag},
         {"seed", ens.seed},
         {"n", ens.n_paths},
         {"grid_size", ens.n_values()},
         {"smoothed", ens.smoothed},
         {"axis1", ens.grid.axis1}};
  if (ens.grid.is_2d()) j["axis2"] = ens.grid.axis2;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

PathEnsemble read_ensemble_csv(const std::string& path, const std::string& sidecar_path) {
  PathEnsemble ens;
  json sidecar;
  if (!sidecar_path.empty()) {
    auto in = open_in(sidecar_path);
    in >> sidecar;
    ens.model_tag = sidecar.value("model", "");
    ens.seed = sidecar.value("seed", std::uint64_t{0});
    ens.smoothed = sidecar.value("smoothed", false);
  }

  auto in = open_in(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty ensemble CSV: " + path);
  const auto head = split_csv_line(line);
  if (sidecar.contains("axis1")) {
    ens.grid.axis1 = sidecar["axis1"].get<std::vector<double>>();
    if (sidecar.contains("axis2")) ens.grid.axis2 = sidecar["axis2"].get<std::vector<double>>();
    require(ens.grid.size() == head.size(), "ensemble CSV and sidecar grid size disagree");
  } else {
    ens.grid.axis1.reserve(head.size());
    for (const auto& f : head) ens.grid.axis1.push_back(parse_double(f, path));
  }
  ens.grid.validate();

  const std::size_t m = ens.grid.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    require(fields.size() == m, "ensemble CSV row width mismatch");
    for (const auto& f : fields) ens.data.push_back(parse_double(f, path));
    ++ens.n_paths;
  }
  require(ens.n_paths >= 1, "ensemble CSV has no paths");
  return ens;
}

// --- spec (de)serialization -----------------------------------------------------

json to_json(const MarginalSpec& spec) {
  switch (spec.kind) {
    case MarginalSpec::Kind::gaussian:
      return {{"kind", "gaussian"}, {"mu", spec.mu}, {"sigma", spec.sigma}};
    case MarginalSpec::Kind::point_mass:
      return {{"kind", "point-mass"}, {"x", spec.atom}};
    case MarginalSpec::Kind::two_point:
      return {{"kind", "two-point"}, {"c", spec.c}, {"d", spec.d}};
    case MarginalSpec::Kind::uniform:
      return {{"kind", "uniform"}, {"a", spec.lo}, {"b", spec.hi}};
    case MarginalSpec::Kind::mixture_atom_continuous:
      return {{"kind", "mixture"},
              {"atom", spec.atom},
              {"weight", spec.atom_weight},
              {"continuous", to_json(*spec.continuous)}};
  }
  throw std::invalid_argument("to_json: unknown marginal kind");
}

MarginalSpec marginal_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") return MarginalSpec::Gaussian(j.value("mu", 0.0), j.value("sigma", 1.0));
  if (kind == "point-mass") return MarginalSpec::PointMass(j.at("x").get<double>());
  if (kind == "two-point")
    return MarginalSpec::TwoPoint(j.at("c").get<double>(), j.at("d").get<double>());
  if (kind == "uniform")
    return MarginalSpec::Uniform(j.at("a").get<double>(), j.at("b").get<double>());
  if (kind == "mixture")
    return MarginalSpec::MixtureAtomContinuous(j.at("atom").get<double>(),
                                               j.at("weight").get<double>(),
                                               marginal_from_json(j.at("continuous")));
  throw std::invalid_argument("unknown marginal kind: " + kind);
}

json to_json(const SmoothingDensity& d) {
  return {{"family", d.family_name()}, {"scale", d.scale}};
}

SmoothingDensity density_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  const double scale = j.at("scale").get<double>();
  if (family == "gaussian") return SmoothingDensity::Gaussian(scale);
  if (family == "laplace") return SmoothingDensity::Laplace(scale);
  if (family == "cauchy") return SmoothingDensity::Cauchy(scale);
  throw std::invalid_argument("unknown smoothing family: " + family);
}

json to_json(const ProcessModel& m) {
  json j{{"kind", m.kind_name()}};
  switch (m.kind) {
    case ProcessModel::Kind::symmetric_stable: j["alpha"] = m.alpha; break;
    case ProcessModel::Kind::poisson:
    case ProcessModel::Kind::integrated_poisson: j["lambda"] = m.lambda; break;
    case ProcessModel::Kind::compound_poisson:
      j["lambda"] = m.lambda;
      j["jump"] = to_json(m.jump);
      break;
    case ProcessModel::Kind::product_sequence: {
      json arr = json::array();
      for (const auto& s : m.marginals) arr.push_back(to_json(s));
      j["marginals"] = arr;
      break;
    }
    default: break;
  }
  if (m.smoothing) j["smoothing"] = to_json(*m.smoothing);
  return j;
}

ProcessModel model_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  ProcessModel m;
  if (kind == "bm") {
    m = ProcessModel::BrownianMotion();
  } else if (kind == "stable") {
    m = ProcessModel::SymmetricStable(j.at("alpha").get<double>());
  } else if (kind == "poisson") {
    m = ProcessModel::Poisson(j.value("lambda", 1.0));
  } else if (kind == "compound-poisson") {
    m = ProcessModel::CompoundPoisson(j.value("lambda", 1.0), marginal_from_json(j.at("jump")));
  } else if (kind == "sheet") {
    m = ProcessModel::BrownianSheet();
  } else if (kind == "reflected-bm") {
    m = ProcessModel::ReflectedBM();
  } else if (kind == "integrated-poisson") {
    m = ProcessModel::IntegratedPoisson(j.value("lambda", 1.0));
  } else if (kind == "product") {
    std::vector<MarginalSpec> margs;
    for (const auto& s : j.at("marginals")) margs.push_back(marginal_from_json(s));
    m = ProcessModel::ProductSequence(std::move(margs));
  } else {
    throw std::invalid_argument("unknown model kind: " + kind);
  }
  if (j.contains("smoothing")) m = m.with_smoothing(density_from_json(j.at("smoothing")));
  return m;
}

TailModel tail_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return TailModel::None();
  if (kind == "constant") return TailModel::Constant(j.at("c").get<double>());
  if (kind == "geometric")
    return TailModel::Geometric(j.at("c").get<double>(), j.at("rho").get<double>());
  if (kind == "power") return TailModel::Power(j.at("c").get<double>(), j.at("s").get<double>());
  throw std::invalid_argument("unknown tail model kind: " + kind);
}

json depth_report(const DepthEstimate& d, const std::string& hash) {
  json j{{"value", d.value},
         {"count_above", d.count_above},
         {"count_below", d.count_below},
         {"n", d.n},
         {"ci_half_width", d.ci_half_width},
         {"grid_size", d.grid_size},
         {"seed", d.seed},
         {"model", d.model_tag},
         {"oracle", d.oracle},
         {"config_hash", hash}};
  if (d.subset) j["subset"] = *d.subset;
  return j;
}

json experiment_report(const ExperimentReport& r, const std::string& hash) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"x", row.x}, {"q50", row.q50}, {"q95", row.q95}, {"q99", row.q99},
                    {"reps", row.reps}});
  json tail = json::array();
  for (const auto& t : r.tail) tail.push_back({{"r", t.r}, {"exceedance", t.exceedance}});
  json j{{"kind", r.kind},
         {"rows", rows},
         {"tail", tail},
         {"degenerate", r.degenerate},
         {"ambiguous_tie", r.ambiguous_tie},
         {"oracle_refs", r.oracle_refs},
         {"seed", r.seed},
         {"wall_seconds", r.wall_seconds},
         {"config_hash", hash}};
  if (r.has_fit) {
    j["fitted_alpha"] = r.fitted_alpha;
    j["fit_r_squared"] = r.fit_r_squared;
  }
  for (const auto& [k, v] : r.scalars) j["scalars"][k] = v;
  for (const auto& [k, v] : r.series) j["series"][k] = v;
  return j;
}

void write_rep_stats_csv(const std::string& path, const ExperimentReport& r) {
  auto out = open_out(path);
  out << "x,rep,value\n";
  for (const auto& [key, values] : r.series) {
    if (key.rfind("reps@", 0) != 0) continue;
    const std::string x = key.substr(5);
    for (std::size_t i = 0; i < values.size(); ++i)
      out << x << ',' << i << ',' << fmt17(values[i]) << '\n';
  }
}

std::string config_hash(const json& j) { return hex64(fnv1a64(j.dump())); }

// --- schema -----------------------------------------------------------------------

void validate_against_schema(const json& doc, const json& schema, const std::string& where) {
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    const bool ok = (type == "object" && doc.is_object()) || (type == "array" && doc.is_array()) ||
                    (type == "string" && doc.is_string()) ||
                    (type == "number" && doc.is_number()) ||
                    (type == "integer" && doc.is_number_integer()) ||
                    (type == "boolean" && doc.is_boolean());
    require(ok, where + ": expected " + type);
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& v : schema["enum"]) found = found || v == doc;
    require(found, where + ": value not in enum");
  }
  if (doc.is_object()) {
    const json props = schema.value("properties", json::object());
    const bool extra_ok = schema.value("additionalProperties", true);
    for (const auto& [key, value] : doc.items()) {
      if (props.contains(key)) {
        validate_against_schema(value, props[key], where + "." + key);
      } else {
        require(extra_ok, where + ": unknown key '" + key + "'");
      }
    }
    if (schema.contains("required"))
      for (const auto& req : schema["required"])
        require(doc.contains(req.get<std::string>()),
                where + ": missing required key '" + req.get<std::string>() + "'");
  }
  if (doc.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < doc.size(); ++i)
      validate_against_schema(doc[i], schema["items"], where + "[" + std::to_string(i) + "]");
}

const char* run_config_schema() {
  // Shared by every `experiment` subcommand; also published at
  // docs/config_schema.json and printed by `hrdepth schema`.
  static const char* schema = R"SCHEMA({
  "type": "object",
  "additionalProperties": false,
  "required": ["experiment"],
  "properties": {
    "experiment": {
      "type": "string",
      "enum": ["zero-trend", "consistency", "rate", "limit-law", "subset", "c2-gap"]
    },
    "model": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind"],
      "properties": {
        "kind": {
          "type": "string",
          "enum": ["bm", "stable", "poisson", "compound-poisson", "sheet",
                   "reflected-bm", "integrated-poisson", "product"]
        },
        "alpha": {"type": "number"},
        "lambda": {"type": "number"},
        "jump": {"type": "object"},
        "marginals": {"type": "array", "items": {"type": "object"}},
        "smoothing": {
          "type": "object",
          "additionalProperties": false,
          "required": ["family", "scale"],
          "properties": {
            "family": {"type": "string", "enum": ["gaussian", "laplace", "cauchy"]},
            "scale": {"type": "number"}
          }
        }
      }
    },
    "family": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind"],
      "properties": {
        "kind": {"type": "string",
                 "enum": ["constants", "finite-list", "lipschitz-ball", "smooth-ball"]},
        "radius": {"type": "number"},
        "lip": {"type": "number"},
        "lip2": {"type": "number"},
        "levels": {"type": "array", "items": {"type": "number"}}
      }
    },
    "h": {"type": "number"},
    "h1": {"type": "number"},
    "h2": {"type": "number"},
    "eps": {"type": "number"},
    "m": {"type": "integer"},
    "m_schedule": {"type": "array", "items": {"type": "integer"}},
    "n": {"type": "integer"},
    "n_schedule": {"type": "array", "items": {"type": "integer"}},
    "reps": {"type": "integer"},
    "r": {"type": "integer"},
    "n_subsets": {"type": "integer"},
    "r_grid": {"type": "array", "items": {"type": "number"}},
    "seed": {"type": "integer"},
    "jobs": {"type": "integer"},
    "oracle": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n_ref": {"type": "integer"},
        "seed": {"type": "integer"},
        "cache_dir": {"type": "string"},
        "margin_conditioning": {"type": "boolean"}
      }
    },
    "out": {"type": "string"},
    "plot": {"type": "string"},
    "rep_csv": {"type": "string"}
  }
})SCHEMA";
  return schema;
}

}  // namespace hrd::io
