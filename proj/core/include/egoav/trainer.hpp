#pragma once

#include <optional>
#include <string>

#include "egoav/config.hpp"
#include "egoav/model.hpp"
#include "egoav/synthgen.hpp"

namespace egoav::objective {

// One training sample as fed to the optimizer: graph inputs plus the
// ground-truth separation mask of its mixture.
struct TrainSample {
  model::SampleInputs<float> inputs;
  Tensor<float> m_gt;  // (h_s, w_s) binary
};

struct StepReport {
  double l_loc = 0;
  double l_dis = 0;
  double total = 0;
  bool finite = true;
  std::string diagnostics;
};

// One adaptive-moment step over a prepared batch with the two-group learning
// rate split. Requires batch_size >= 2 (the roll-by-one negative pairing needs
// a second clip). On a non-finite loss the update is skipped and the report
// carries diagnostics.
StepReport train_step(model::Model<float>& model, const std::vector<TrainSample>& batch,
                      AdamOptimizer<float>& opt);

struct TrainResult {
  int steps = 0;
  int epochs_completed = 0;
  double final_loss = 0;
  bool aborted = false;
  std::string abort_reason;
  std::string checkpoint_path;  // last good checkpoint
};

// Full training loop: seeded shuffling, mix-and-separate batch assembly,
// per-epoch checkpoints, JSONL metrics log, abort-on-NaN keeping the last
// good checkpoint. Homographies are estimated once per clip (optionally
// persisted through `cache`).
TrainResult train(model::Model<float>& model, const std::vector<synthgen::ClipRecord>& clips,
                  const config::RunConfig& cfg, const std::string& out_dir,
                  geometry::HomographyCache* cache = nullptr);

// Shared preprocessing: per-clip frame tensor and frame-resolution homography
// table (estimated; identity fallback applies).
model::SampleInputs<float> prepare_clip_inputs(const synthgen::ClipRecord& clip,
                                               const config::RunConfig& cfg,
                                               geometry::HomographyCache* cache = nullptr);

}  // namespace egoav::objective
