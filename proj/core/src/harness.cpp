#include "egoav/harness.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "egoav/audiofe.hpp"
#include "egoav/image.hpp"
#include "egoav/trainer.hpp"

namespace egoav::eval {

using nlohmann::json;

AudioSource audio_source_from_name(const std::string& name) {
  if (name == "mix") return AudioSource::mix;
  if (name == "object") return AudioSource::object;
  throw std::invalid_argument("unknown audio source: " + name + " (expected mix|object)");
}

DatasetReport evaluate_clips(model::Model<float>& model,
                             const std::vector<synthgen::ClipRecord>& clips,
                             const config::RunConfig& cfg, AudioSource source,
                             geometry::HomographyCache* cache) {
  DatasetReport report;
  for (const auto& clip : clips) {
    model::SampleInputs<float> in = objective::prepare_clip_inputs(clip, cfg, cache);
    const Waveform& audio = source == AudioSource::mix ? clip.audio : clip.object_audio;
    in.spectrogram = audiofe::stft_magnitude(audio, cfg.stft).values;
    const auto maps = model::localize_clip(model, in);

    const int fh = clip.frames.frames[0].height;
    const int fw = clip.frames.frames[0].width;
    const Tensor<float> baseline =
        center_baseline(fh, fw, cfg.eval.baseline_sigma_fraction);

    bool scored_any = false;
    for (int i = 0; i < clip.frames.count(); ++i) {
      if (!clip.gt_boxes[i].has_value()) continue;  // object out of view
      const std::vector<BoundingBox> boxes{*clip.gt_boxes[i]};
      const Tensor<float> up = resize_bilinear_grid(maps[i].objectness, fh, fw);
      report.cious.push_back(ciou(up, boxes, cfg.eval));
      report.baseline_cious.push_back(ciou(baseline, boxes, cfg.eval));
      ++report.frame_count;
      scored_any = true;
    }
    if (scored_any) ++report.clip_count;
  }
  if (!report.cious.empty()) {
    report.metrics = success_metrics(report.cious, cfg.eval);
    report.baseline_metrics = success_metrics(report.baseline_cious, cfg.eval);
  }
  return report;
}

std::string report_table(const DatasetReport& r, const EvalConfig& cfg) {
  std::ostringstream os;
  os << "              ";
  for (double tau : cfg.success_thresholds) {
    os.precision(2);
    os << "  CIoU@" << std::fixed << tau;
  }
  os << "     AUC\n";
  auto row = [&](const char* name, const SuccessMetrics& m) {
    os << name;
    for (double tau : cfg.success_thresholds) {
      os.precision(4);
      os << "  " << std::fixed << m.ciou_at.at(tau) << "  ";
    }
    os.precision(4);
    os << "  " << std::fixed << m.auc << "\n";
  };
  row("model         ", r.metrics);
  row("center-box    ", r.baseline_metrics);
  os << "clips: " << r.clip_count << "  frames: " << r.frame_count << "\n";
  return os.str();
}

void write_report_json(const DatasetReport& r, const EvalConfig& cfg, const std::string& path) {
  json j;
  j["clip_count"] = r.clip_count;
  j["frame_count"] = r.frame_count;
  auto metrics_json = [&](const SuccessMetrics& m) {
    json mj;
    for (const auto& [tau, rate] : m.ciou_at) {
      std::ostringstream key;
      key.precision(2);
      key << "ciou@" << std::fixed << tau;
      mj[key.str()] = rate;
    }
    mj["auc"] = m.auc;
    return mj;
  };
  j["model"] = metrics_json(r.metrics);
  j["baseline"] = metrics_json(r.baseline_metrics);
  j["mean_ciou"] = r.cious.empty()
                       ? 0.0
                       : std::accumulate(r.cious.begin(), r.cious.end(), 0.0) / r.cious.size();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_report_json: cannot open " + path);
  f << j.dump(2) << "\n";
  (void)cfg;
}

}  // namespace egoav::eval
