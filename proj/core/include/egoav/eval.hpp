#pragma once

#include <map>
#include <string>
#include <vector>

#include "egoav/core.hpp"

namespace egoav::eval {

struct EvalConfig {
  // Heatmap binarization: objectness >= threshold (equivalently S >= epsilon
  // at threshold 0.5 by the sigmoid identity).
  double binarize_threshold = 0.5;
  // Reported success thresholds (Table-style columns).
  std::vector<double> success_thresholds{0.2, 0.3, 0.4};
  // AUC sweep: lo, lo+step, ..., hi inclusive.
  double auc_lo = 0.05;
  double auc_hi = 0.95;
  double auc_step = 0.05;
  // Center-baseline Gaussian width as a fraction of min(H, W).
  double baseline_sigma_fraction = 0.25;

  void validate() const;
};

struct ConsensusAnnotation {
  std::string video_id;
  int frame_index = 0;
  std::vector<BoundingBox> boxes;   // boxes with >= 2 votes
  bool out_of_view_sound = false;   // strict majority of annotators
  bool valid = false;               // at least one box reached 2 votes
};

// Intersection-over-union between the binarized predicted map (objectness,
// already upsampled to frame resolution) and the union mask of the ground
// truth boxes. Throws when gt_boxes is empty (silent frames are excluded
// upstream).
double ciou(const Tensor<float>& objectness_frame_res, const std::vector<BoundingBox>& gt_boxes,
            const EvalConfig& cfg);

struct SuccessMetrics {
  std::map<double, double> ciou_at;  // threshold -> success fraction
  double auc = 0.0;
};

// ciou@tau = fraction of samples with CIoU >= tau; auc = mean success rate
// over the uniform threshold sweep.
SuccessMetrics success_metrics(const std::vector<double>& cious, const EvalConfig& cfg);

// Isotropic Gaussian heatmap centred at (W/2, H/2), peak 1, sigma =
// sigma_fraction * min(H, W).
Tensor<float> center_baseline(int height, int width, double sigma_fraction);

// Consensus voting over one frame's annotation records: a box is kept iff at
// least two annotators selected it (identity = exact coordinates + label);
// out_of_view passes by strict majority; the frame is valid only when some
// box reached two votes. Requires >= 3 records.
ConsensusAnnotation vote(const std::vector<AnnotationRecord>& records);

// Consensus-record (ground truth) line format: one JSON object per line with
// fields {video_id, frame_index, boxes, out_of_view}.
std::string consensus_to_json(const ConsensusAnnotation& c);
ConsensusAnnotation consensus_from_json(const std::string& line);
std::vector<ConsensusAnnotation> read_consensus_file(const std::string& path);
void write_consensus_file(const std::vector<ConsensusAnnotation>& list, const std::string& path);

}  // namespace egoav::eval
