#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fraclap {

enum class Experiment { forms, gap_sweep, bn_minimize, bubble_curve, cylinder_check, calibrate, critical_scan };

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);
std::vector<std::string> experiment_names();

/// Validated configuration. `parameters` holds every key of the experiment's
/// schema with defaults filled in.
struct RunConfig {
  Experiment experiment = Experiment::forms;
  nlohmann::ordered_json parameters;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;
};

/// Document layout:
///   {"experiment": "...", "seed": 0, "output_dir": "...", "parameters": {...}}
/// `experiment_hint` fills in a missing "experiment" key.
RunConfig parse_config(std::string_view text, const std::string& experiment_hint = {});
std::string serialize(const RunConfig& cfg);

/// Re-runs parameter validation (used after command-line overrides).
void validate(const RunConfig& cfg);

struct CheckResult {
  std::string name;
  bool passed = true;
  bool asserted = true;  // findings are recorded but never fail the run
  std::string detail;
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  RunConfig config;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<CheckResult> checks;
  std::vector<OutputFile> files;
  nlohmann::ordered_json findings = nlohmann::ordered_json::object();

  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

/// Runs the experiment, writes CSV outputs and manifest.json (atomically,
/// after all outputs) into cfg.output_dir.
RunManifest run(const RunConfig& cfg);

std::string sha256_hex(std::string_view data);

/// Thread count for data-parallel loops (process-wide).
void set_threads(int n);

const char* version();

}  // namespace fraclap
