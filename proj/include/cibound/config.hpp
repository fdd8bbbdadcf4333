#pragma once

#include <string>

#include "cibound/pipeline.hpp"

namespace cibound {

// Everything the `experiment` subcommand needs: the pipeline configuration
// plus the output destination.
struct RunConfig {
  ExperimentConfig experiment;
  std::string output = "results.dat";
  bool csv = false;
  bool seed_provided = false;
};

// Parses the JSON experiment configuration (see README for the schema).
// Syntax errors carry the parser's byte position; schema errors name the
// offending field. Throws FormatError.
RunConfig parse_run_config(const std::string& json_text);

// Reads and parses a config file.
RunConfig load_run_config(const std::string& path);

// The configuration echoed back as JSON (used for the .meta.json
// provenance sidecar next to result tables).
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace cibound
