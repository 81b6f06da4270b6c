#pragma once

#include <string>

#include <json.hpp>

#include "hrd/analysis.hpp"
#include "hrd/depth.hpp"
#include "hrd/gridfn.hpp"
#include "hrd/models.hpp"
#include "hrd/smoothing.hpp"

namespace hrd::io {

// Grid function CSV: header `t,value` (1D) or `t1,t2,value` (2D), one row per
// grid point, '.' decimal separator. Doubles are printed with 17 significant
// digits so a read-back is bit-exact.
void write_gridfunction_csv(const std::string& path, const GridFunction& f);
GridFunction read_gridfunction_csv(const std::string& path);

// Ensemble CSV: first row the grid's t values (flat point index on 2D grids,
// whose axes live in the sidecar), then one row per path. The JSON sidecar
// carries the model descriptor, seed, n, m and smoothing metadata.
void write_ensemble_csv(const std::string& path, const PathEnsemble& ens);
void write_ensemble_sidecar(const std::string& path, const PathEnsemble& ens);
// `sidecar_path` may be empty for 1D CSVs; 2D ensembles require it.
PathEnsemble read_ensemble_csv(const std::string& path, const std::string& sidecar_path = "");

// JSON (de)serialization of the declarative specs.
nlohmann::json to_json(const MarginalSpec& spec);
MarginalSpec marginal_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SmoothingDensity& d);
SmoothingDensity density_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProcessModel& m);
ProcessModel model_from_json(const nlohmann::json& j);
TailModel tail_from_json(const nlohmann::json& j);

nlohmann::json depth_report(const DepthEstimate& d, const std::string& config_hash);
nlohmann::json experiment_report(const ExperimentReport& r, const std::string& config_hash);

// Flat CSV of per-replication statistics (header `x,rep,value`), for
// external plotting.
void write_rep_stats_csv(const std::string& path, const ExperimentReport& r);

// Canonical config hash: FNV-1a over the compact dump of the (sorted-key)
// JSON document.
std::string config_hash(const nlohmann::json& j);

// Minimal JSON-schema validation (type / properties / required /
// additionalProperties / enum / items); unknown keys are rejected. Throws
// std::invalid_argument with a path-qualified message.
void validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                             const std::string& where = "$");

// The published run-config schema (also shipped at docs/config_schema.json).
const char* run_config_schema();

}  // namespace hrd::io
