#pragma once

#include <string>
#include <vector>

#include "egoav/config.hpp"
#include "egoav/eval.hpp"
#include "egoav/model.hpp"
#include "egoav/synthgen.hpp"

namespace egoav::eval {

enum class AudioSource { mix, object };

AudioSource audio_source_from_name(const std::string& name);

struct DatasetReport {
  int clip_count = 0;
  int frame_count = 0;  // annotated frames scored
  std::vector<double> cious;
  std::vector<double> baseline_cious;
  SuccessMetrics metrics;
  SuccessMetrics baseline_metrics;
};

// Runs the model over every clip (per annotated frame, that frame's S_i map,
// objectness upsampled to frame resolution, binarized per config) and the
// center-box baseline over the same frames.
DatasetReport evaluate_clips(model::Model<float>& model,
                             const std::vector<synthgen::ClipRecord>& clips,
                             const config::RunConfig& cfg, AudioSource source,
                             geometry::HomographyCache* cache = nullptr);

// Human-readable metric table plus machine-readable JSON report.
std::string report_table(const DatasetReport& r, const EvalConfig& cfg);
void write_report_json(const DatasetReport& r, const EvalConfig& cfg, const std::string& path);

}  // namespace egoav::eval
