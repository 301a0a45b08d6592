// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrntf/error.hpp"
#include "lrntf/fcls.hpp"
#include "lrntf/solver.hpp"
#include "lrntf/synthgen.hpp"

namespace lrntf {

struct SceneConfig {
  enum class Source { Synthetic, File };
  Source source = Source::Synthetic;
  SynthConfig synth;
  std::string library;  ///< synthetic scenes: spectral library CSV
  std::string cube;     ///< file scenes: observed cube
  std::string endmembers;
  std::string truth;    ///< optional ground-truth abundance cube
};

struct EmitFlags {
  bool abundance_maps = true;
  bool interaction_maps = false;
  bool error_map = true;
  bool trace = true;
  bool rank_profiles = true;
  bool cubes = true;  ///< estimated abundance / interaction cubes
};

struct ExperimentConfig {
  std::string preset;
  SceneConfig scene;
  SolverConfig solver;
  FclsConfig fcls;
  std::string outputs = "out";
  EmitFlags emit;
};

/// Library shipped with the repository.
std::string default_library_path();

std::vector<std::string> preset_names();
/// One-line description per preset, same order as preset_names().
std::vector<std::string> preset_descriptions();
/// Throws ConfigError for unknown names.
ExperimentConfig preset_config(const std::string &name);

/// Starts from the named preset (or defaults) and overlays every given field.
/// Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const nlohmann::json &j);
nlohmann::json to_json(const ExperimentConfig &cfg);
ExperimentConfig load_experiment_config(const std::filesystem::path &path);

/// A pipeline failure tagged with the stage it happened in. Keeps the kind of
/// the underlying error.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error &cause)
      : Error(cause.kind(), "stage " + stage + " failed: " + cause.what()), stage_{std::move(stage)} {}
  const std::string &stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// scene -> endmembers -> FCLS init -> ADMM solve -> metrics -> artefacts.
/// Writes results.json (config echo, metrics, iteration count, wall time) into
/// cfg.outputs and returns the same document. On failure a FAILED marker with
/// the stage and cause is left in the output directory and StageError is
/// thrown.
nlohmann::json run_experiment(const ExperimentConfig &cfg);

}  // namespace lrntf
