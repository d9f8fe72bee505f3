#include "egoav/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace egoav::eval {

using nlohmann::json;

void EvalConfig::validate() const {
  if (binarize_threshold <= 0 || binarize_threshold >= 1)
    throw std::invalid_argument("EvalConfig: binarize_threshold must lie in (0,1)");
  if (success_thresholds.empty())
    throw std::invalid_argument("EvalConfig: success_thresholds must be non-empty");
  for (std::size_t i = 0; i < success_thresholds.size(); ++i) {
    const double t = success_thresholds[i];
    if (t <= 0 || t >= 1)
      throw std::invalid_argument("EvalConfig: success thresholds must lie in (0,1)");
    if (i > 0 && success_thresholds[i - 1] >= t)
      throw std::invalid_argument("EvalConfig: success thresholds must be strictly increasing");
  }
  if (!(auc_lo > 0 && auc_hi < 1 && auc_lo < auc_hi && auc_step > 0))
    throw std::invalid_argument("EvalConfig: bad AUC sweep");
  if (baseline_sigma_fraction <= 0)
    throw std::invalid_argument("EvalConfig: baseline_sigma_fraction must be positive");
}

double ciou(const Tensor<float>& objectness_frame_res, const std::vector<BoundingBox>& gt_boxes,
            const EvalConfig& cfg) {
  cfg.validate();
  if (objectness_frame_res.rank() != 2)
    throw std::invalid_argument("ciou: rank-2 heatmap required");
  if (gt_boxes.empty()) throw std::invalid_argument("ciou: no ground-truth boxes");
  const int h = objectness_frame_res.dim(0), w = objectness_frame_res.dim(1);
  const Tensor<std::uint8_t> gt = boxes_to_mask(gt_boxes, h, w);
  long inter = 0, uni = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool p = objectness_frame_res[i] >= static_cast<float>(cfg.binarize_threshold);
    const bool g = gt[i] != 0;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

SuccessMetrics success_metrics(const std::vector<double>& cious, const EvalConfig& cfg) {
  cfg.validate();
  if (cious.empty()) throw std::invalid_argument("success_metrics: empty CIoU list");
  const auto rate_at = [&](double tau) {
    long n = 0;
    for (double c : cious)
      if (c >= tau) ++n;
    return static_cast<double>(n) / static_cast<double>(cious.size());
  };
  SuccessMetrics out;
  for (double tau : cfg.success_thresholds) out.ciou_at[tau] = rate_at(tau);
  double acc = 0;
  int count = 0;
  for (double tau = cfg.auc_lo; tau <= cfg.auc_hi + 1e-12; tau += cfg.auc_step) {
    acc += rate_at(tau);
    ++count;
  }
  out.auc = acc / count;
  return out;
}

Tensor<float> center_baseline(int height, int width, double sigma_fraction) {
  if (height <= 0 || width <= 0)
    throw std::invalid_argument("center_baseline: non-positive size");
  if (sigma_fraction <= 0)
    throw std::invalid_argument("center_baseline: sigma_fraction must be positive");
  const double cx = width / 2.0, cy = height / 2.0;
  const double sigma = sigma_fraction * std::min(height, width);
  Tensor<float> map({height, width});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double dx = (x + 0.5) - cx, dy = (y + 0.5) - cy;
      map.at(y, x) = static_cast<float>(std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)));
    }
  // Peak normalized to 1 (for even sizes the four central cells tie).
  const float peak = map.max();
  if (peak > 0)
    for (std::size_t i = 0; i < map.size(); ++i) map[i] /= peak;
  return map;
}

namespace {

std::string box_key(const BoundingBox& b) {
  std::ostringstream os;
  os.precision(17);
  os << b.x_min << '|' << b.y_min << '|' << b.x_max << '|' << b.y_max << '|' << b.label;
  return os.str();
}

}  // namespace

ConsensusAnnotation vote(const std::vector<AnnotationRecord>& records) {
  if (records.size() < 3)
    throw std::invalid_argument("vote: at least three annotation records required, got " +
                                std::to_string(records.size()));
  for (const auto& r : records) {
    if (r.video_id != records.front().video_id || r.frame_index != records.front().frame_index)
      throw std::invalid_argument("vote: records span multiple (video, frame) pairs");
  }
  ConsensusAnnotation out;
  out.video_id = records.front().video_id;
  out.frame_index = records.front().frame_index;

  // Vote per proposal; an annotator counts once per box even if it appears
  // twice in their record.
  std::map<std::string, int> votes;
  std::map<std::string, BoundingBox> by_key;
  for (const auto& r : records) {
    std::map<std::string, bool> seen;
    for (const auto& b : r.selected_boxes) {
      const std::string key = box_key(b);
      if (seen[key]) continue;
      seen[key] = true;
      votes[key] += 1;
      by_key.emplace(key, b);
    }
  }
  for (const auto& [key, n] : votes)
    if (n >= 2) out.boxes.push_back(by_key.at(key));
  out.valid = !out.boxes.empty();

  int oov_true = 0;
  for (const auto& r : records) oov_true += r.out_of_view_sound ? 1 : 0;
  out.out_of_view_sound = 2 * oov_true > static_cast<int>(records.size());
  return out;
}

static json box_to_json(const BoundingBox& b) {
  return json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max},
              {"y_max", b.y_max}, {"label", b.label}};
}

static BoundingBox box_from_json(const json& j) {
  BoundingBox b;
  b.x_min = j.at("x_min").get<double>();
  b.y_min = j.at("y_min").get<double>();
  b.x_max = j.at("x_max").get<double>();
  b.y_max = j.at("y_max").get<double>();
  b.label = j.value("label", "");
  return b;
}

std::string consensus_to_json(const ConsensusAnnotation& c) {
  json j;
  j["video_id"] = c.video_id;
  j["frame_index"] = c.frame_index;
  j["boxes"] = json::array();
  for (const auto& b : c.boxes) j["boxes"].push_back(box_to_json(b));
  j["out_of_view"] = c.out_of_view_sound;
  j["valid"] = c.valid;
  return j.dump();
}

ConsensusAnnotation consensus_from_json(const std::string& line) {
  const json j = json::parse(line);
  ConsensusAnnotation c;
  c.video_id = j.at("video_id").get<std::string>();
  c.frame_index = j.at("frame_index").get<int>();
  for (const auto& bj : j.at("boxes")) c.boxes.push_back(box_from_json(bj));
  c.out_of_view_sound = j.at("out_of_view").get<bool>();
  c.valid = j.value("valid", !c.boxes.empty());
  return c;
}

std::vector<ConsensusAnnotation> read_consensus_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_consensus_file: cannot open " + path);
  std::vector<ConsensusAnnotation> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(consensus_from_json(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed consensus record: " + e.what());
    }
  }
  return out;
}

void write_consensus_file(const std::vector<ConsensusAnnotation>& list, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_consensus_file: cannot open " + path);
  for (const auto& c : list) f << consensus_to_json(c) << "\n";
}

}  // namespace egoav::eval
