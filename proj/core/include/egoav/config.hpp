#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "egoav/audiofe.hpp"
#include "egoav/eval.hpp"
#include "egoav/geometry.hpp"
#include "egoav/model.hpp"
#include "egoav/objective.hpp"
#include "egoav/synthgen.hpp"

namespace egoav::config {

struct TrainConfig {
  int epochs = 12;
  int batch_size = 4;
  double lr_visual = 1e-4;
  double lr_audio = 1e-2;
  int threads = 2;
  bool mixing = true;  // mix-and-separate during training

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("train.epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train.batch_size must be >= 1");
    if (threads < 1) throw std::invalid_argument("train.threads must be >= 1");
  }
};

// Whole-run configuration; a single JSON file, schema-validated with unknown
// keys rejected. CLI flags override individual fields.
struct RunConfig {
  std::uint64_t seed = 7;
  int clip_count = 200;
  synthgen::SceneConfig scene;
  audiofe::StftConfig stft;
  model::ModelConfig model;
  geometry::RansacConfig ransac;
  geometry::MatcherConfig matcher;
  TrainConfig train;
  eval::EvalConfig eval;

  RunConfig();  // desk-scale defaults

  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);
void save_run_config(const RunConfig& cfg, const std::string& path);

nlohmann::json model_config_to_json(const model::ModelConfig& cfg);
model::ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace egoav::config
