#pragma once

#include <cstdint>
#include <string>

namespace egoav::cli {

// Command implementations shared by the binary and the tests. They throw
// std::invalid_argument for usage/config errors and std::runtime_error for
// runtime failures; main() maps these to exit codes 1 and 2.

struct SynthOptions {
  std::string config_path;
  std::string out_dir;
  int clip_count_override = -1;     // <0: use config
  std::int64_t seed_override = -1;  // <0: use config
};
void run_synth(const SynthOptions& opt);

struct TrainOptions {
  std::string config_path;
  std::string data_dir;
  std::string out_dir;
  std::string hom_cache_path;  // optional
};
void run_train(const TrainOptions& opt);

struct EvalOptions {
  std::string config_path;
  std::string checkpoint_path;
  std::string data_dir;
  std::string split = "test";
  std::string report_path;  // optional JSON output
  std::string audio_source = "mix";
  std::string hom_cache_path;  // optional
};
void run_eval(const EvalOptions& opt);

struct VisualizeOptions {
  std::string config_path;
  std::string checkpoint_path;
  std::string data_dir;
  std::string clip_id;
  std::string out_dir;
};
void run_visualize(const VisualizeOptions& opt);

struct VoteOptions {
  std::string records_path;
  std::string out_path;
  std::string stats_path;  // optional JSON stats
};
void run_vote(const VoteOptions& opt);

}  // namespace egoav::cli
