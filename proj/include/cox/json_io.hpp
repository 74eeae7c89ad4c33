#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cox/experiments.hpp"
#include "cox/mple.hpp"
#include "cox/population.hpp"

namespace cox {

// Parse errors throw std::invalid_argument carrying the JSON field path
// (e.g. "covariates.probs[1]: must be a number").

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitResult& fit);  // information row-major
FitResult fit_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

// Run manifest: configuration, seed, code version, and the files written.
void write_run_manifest(const ExperimentConfig& cfg, const std::string& run_name,
                        const std::string& out_dir,
                        const std::vector<std::string>& outputs);

}  // namespace cox
