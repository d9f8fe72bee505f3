#include "egoav/config.hpp"

#include <fstream>
#include <set>

namespace egoav::config {

using nlohmann::json;

namespace {

// Strict object reader: every present key must be known, so typos in config
// files fail loudly with the offending path.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument(path_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T* out) {
    known_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      try {
        *out = it->get<T>();
      } catch (const std::exception& e) {
        throw std::invalid_argument(path_ + "." + key + ": " + e.what());
      }
    }
  }

  const json* object(const char* key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!known_.count(key))
        throw std::invalid_argument(path_ + ": unknown key \"" + key + "\"");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

}  // namespace

RunConfig::RunConfig() {
  // Desk-scale model: c=32 features, D_v=8 on 64x64 frames, slim U-Net.
  model.visual.stage_channels = {12, 24, 32};
  model.visual.out_channels = 32;
  model.audio.encoder_channels = {8, 12, 16, 32, 32};
}

void RunConfig::validate() const {
  if (clip_count < 1) throw std::invalid_argument("clip_count must be >= 1");
  scene.validate();
  stft.validate();
  model.validate();
  ransac.validate();
  train.validate();
  eval.validate();
  if (scene.frame_height % model.visual.downsample() != 0 ||
      scene.frame_width % model.visual.downsample() != 0)
    throw std::invalid_argument("scene frame size must be divisible by the visual downsample " +
                                std::to_string(model.visual.downsample()));
  if (stft.output_height != model.audio.input_height ||
      stft.output_width != model.audio.input_width)
    throw std::invalid_argument("stft output size must match the audio network input size");
  if (scene.sample_rate != stft.sample_rate)
    throw std::invalid_argument("scene.sample_rate must match stft.sample_rate");
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  StrictObject root(j, "config");
  root.get("seed", &cfg.seed);
  root.get("clip_count", &cfg.clip_count);

  if (const json* sj = root.object("scene")) {
    StrictObject s(*sj, "scene");
    s.get("frame_height", &cfg.scene.frame_height);
    s.get("frame_width", &cfg.scene.frame_width);
    s.get("frame_count", &cfg.scene.frame_count);
    s.get("fps", &cfg.scene.fps);
    s.get("clip_seconds", &cfg.scene.clip_seconds);
    s.get("sample_rate", &cfg.scene.sample_rate);
    s.get("class_count", &cfg.scene.class_count);
    s.get("motion_magnitude", &cfg.scene.motion_magnitude);
    s.get("min_overlap", &cfg.scene.min_overlap);
    s.get("max_retries", &cfg.scene.max_retries);
    s.get("object_min_frac", &cfg.scene.object_min_frac);
    s.get("object_max_frac", &cfg.scene.object_max_frac);
    s.get("distractor_enabled", &cfg.scene.distractor_enabled);
    s.get("distractor_snr_db", &cfg.scene.distractor_snr_db);
    s.get("tone_amplitude", &cfg.scene.tone_amplitude);
    s.get("world_size", &cfg.scene.world_size);
    s.finish();
  }

  if (const json* sj = root.object("stft")) {
    StrictObject s(*sj, "stft");
    s.get("sample_rate", &cfg.stft.sample_rate);
    s.get("window_size", &cfg.stft.window_size);
    s.get("hop", &cfg.stft.hop);
    s.get("output_height", &cfg.stft.output_height);
    s.get("output_width", &cfg.stft.output_width);
    s.finish();
  }

  if (const json* mj = root.object("model")) {
    StrictObject m(*mj, "model");
    m.get("visual_stage_channels", &cfg.model.visual.stage_channels);
    m.get("feature_channels", &cfg.model.visual.out_channels);
    m.get("audio_encoder_channels", &cfg.model.audio.encoder_channels);
    std::string mode = model::temporal_mode_name(cfg.model.temporal_mode);
    m.get("temporal_mode", &mode);
    cfg.model.temporal_mode = model::temporal_mode_from_name(mode);
    m.get("soft_localization", &cfg.model.soft_localization);
    m.finish();
  }
  cfg.model.audio.input_height = cfg.stft.output_height;
  cfg.model.audio.input_width = cfg.stft.output_width;

  if (const json* oj = root.object("objectness")) {
    StrictObject o(*oj, "objectness");
    o.get("epsilon", &cfg.model.objectness.epsilon);
    o.get("tau", &cfg.model.objectness.tau);
    o.get("lambda", &cfg.model.objectness.lambda);
    o.finish();
  }

  if (const json* rj = root.object("ransac")) {
    StrictObject r(*rj, "ransac");
    r.get("max_iterations", &cfg.ransac.max_iterations);
    r.get("inlier_threshold", &cfg.ransac.inlier_threshold);
    r.get("min_inliers", &cfg.ransac.min_inliers);
    r.get("confidence", &cfg.ransac.confidence);
    r.finish();
  }

  if (const json* mj = root.object("matcher")) {
    StrictObject m(*mj, "matcher");
    m.get("max_corners", &cfg.matcher.max_corners);
    m.get("harris_k", &cfg.matcher.harris_k);
    m.get("response_rel_threshold", &cfg.matcher.response_rel_threshold);
    m.get("nms_radius", &cfg.matcher.nms_radius);
    m.get("min_ncc", &cfg.matcher.min_ncc);
    m.finish();
  }

  if (const json* tj = root.object("train")) {
    StrictObject t(*tj, "train");
    t.get("epochs", &cfg.train.epochs);
    t.get("batch_size", &cfg.train.batch_size);
    t.get("lr_visual", &cfg.train.lr_visual);
    t.get("lr_audio", &cfg.train.lr_audio);
    t.get("threads", &cfg.train.threads);
    t.get("mixing", &cfg.train.mixing);
    t.finish();
  }

  if (const json* ej = root.object("eval")) {
    StrictObject e(*ej, "eval");
    e.get("binarize_threshold", &cfg.eval.binarize_threshold);
    e.get("success_thresholds", &cfg.eval.success_thresholds);
    e.get("auc_lo", &cfg.eval.auc_lo);
    e.get("auc_hi", &cfg.eval.auc_hi);
    e.get("auc_step", &cfg.eval.auc_step);
    e.get("baseline_sigma_fraction", &cfg.eval.baseline_sigma_fraction);
    e.finish();
  }

  root.finish();
  cfg.model.init_seed = hash_combine(cfg.seed, 0x4d4f44);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_run_config: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": invalid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["clip_count"] = cfg.clip_count;
  j["scene"] = {{"frame_height", cfg.scene.frame_height},
                {"frame_width", cfg.scene.frame_width},
                {"frame_count", cfg.scene.frame_count},
                {"fps", cfg.scene.fps},
                {"clip_seconds", cfg.scene.clip_seconds},
                {"sample_rate", cfg.scene.sample_rate},
                {"class_count", cfg.scene.class_count},
                {"motion_magnitude", cfg.scene.motion_magnitude},
                {"min_overlap", cfg.scene.min_overlap},
                {"max_retries", cfg.scene.max_retries},
                {"object_min_frac", cfg.scene.object_min_frac},
                {"object_max_frac", cfg.scene.object_max_frac},
                {"distractor_enabled", cfg.scene.distractor_enabled},
                {"distractor_snr_db", cfg.scene.distractor_snr_db},
                {"tone_amplitude", cfg.scene.tone_amplitude},
                {"world_size", cfg.scene.world_size}};
  j["stft"] = {{"sample_rate", cfg.stft.sample_rate},
               {"window_size", cfg.stft.window_size},
               {"hop", cfg.stft.hop},
               {"output_height", cfg.stft.output_height},
               {"output_width", cfg.stft.output_width}};
  j["model"] = {{"visual_stage_channels", cfg.model.visual.stage_channels},
                {"feature_channels", cfg.model.visual.out_channels},
                {"audio_encoder_channels", cfg.model.audio.encoder_channels},
                {"temporal_mode", model::temporal_mode_name(cfg.model.temporal_mode)},
                {"soft_localization", cfg.model.soft_localization}};
  j["objectness"] = {{"epsilon", cfg.model.objectness.epsilon},
                     {"tau", cfg.model.objectness.tau},
                     {"lambda", cfg.model.objectness.lambda}};
  j["ransac"] = {{"max_iterations", cfg.ransac.max_iterations},
                 {"inlier_threshold", cfg.ransac.inlier_threshold},
                 {"min_inliers", cfg.ransac.min_inliers},
                 {"confidence", cfg.ransac.confidence}};
  j["matcher"] = {{"max_corners", cfg.matcher.max_corners},
                  {"harris_k", cfg.matcher.harris_k},
                  {"response_rel_threshold", cfg.matcher.response_rel_threshold},
                  {"nms_radius", cfg.matcher.nms_radius},
                  {"min_ncc", cfg.matcher.min_ncc}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"lr_visual", cfg.train.lr_visual},
                {"lr_audio", cfg.train.lr_audio},
                {"threads", cfg.train.threads},
                {"mixing", cfg.train.mixing}};
  j["eval"] = {{"binarize_threshold", cfg.eval.binarize_threshold},
               {"success_thresholds", cfg.eval.success_thresholds},
               {"auc_lo", cfg.eval.auc_lo},
               {"auc_hi", cfg.eval.auc_hi},
               {"auc_step", cfg.eval.auc_step},
               {"baseline_sigma_fraction", cfg.eval.baseline_sigma_fraction}};
  return j;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_run_config: cannot open " + path);
  f << run_config_to_json(cfg).dump(2) << "\n";
}

json model_config_to_json(const model::ModelConfig& cfg) {
  return json{{"visual_stage_channels", cfg.visual.stage_channels},
              {"feature_channels", cfg.visual.out_channels},
              {"audio_encoder_channels", cfg.audio.encoder_channels},
              {"audio_input_height", cfg.audio.input_height},
              {"audio_input_width", cfg.audio.input_width},
              {"temporal_mode", model::temporal_mode_name(cfg.temporal_mode)},
              {"soft_localization", cfg.soft_localization},
              {"epsilon", cfg.objectness.epsilon},
              {"tau", cfg.objectness.tau},
              {"lambda", cfg.objectness.lambda},
              {"init_seed", cfg.init_seed}};
}

model::ModelConfig model_config_from_json(const json& j) {
  model::ModelConfig cfg;
  cfg.visual.stage_channels = j.at("visual_stage_channels").get<std::vector<int>>();
  cfg.visual.out_channels = j.at("feature_channels").get<int>();
  cfg.audio.encoder_channels = j.at("audio_encoder_channels").get<std::vector<int>>();
  cfg.audio.input_height = j.at("audio_input_height").get<int>();
  cfg.audio.input_width = j.at("audio_input_width").get<int>();
  cfg.temporal_mode = model::temporal_mode_from_name(j.at("temporal_mode").get<std::string>());
  cfg.soft_localization = j.at("soft_localization").get<bool>();
  cfg.objectness.epsilon = j.at("epsilon").get<double>();
  cfg.objectness.tau = j.at("tau").get<double>();
  cfg.objectness.lambda = j.at("lambda").get<double>();
  cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace egoav::config
