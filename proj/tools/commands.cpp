#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "egoav/audiofe.hpp"
#include "egoav/checkpoint.hpp"
#include "egoav/config.hpp"
#include "egoav/harness.hpp"
#include "egoav/trainer.hpp"

namespace egoav::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

config::RunConfig load_config(const std::string& path) {
  if (path.empty()) throw std::invalid_argument("missing --config");
  return config::load_run_config(path);
}

std::vector<synthgen::ClipRecord> load_split(const std::string& data_dir,
                                             const std::string& split) {
  const synthgen::Manifest manifest = synthgen::read_manifest(data_dir);
  const auto entries = manifest.split(split);
  if (entries.empty())
    throw std::runtime_error("dataset at " + data_dir + " has no clips in split '" + split + "'");
  std::vector<synthgen::ClipRecord> clips;
  clips.reserve(entries.size());
  for (const auto& e : entries) clips.push_back(synthgen::load_clip(data_dir, e));
  return clips;
}

}  // namespace

void run_synth(const SynthOptions& opt) {
  config::RunConfig cfg = load_config(opt.config_path);
  if (opt.clip_count_override > 0) cfg.clip_count = opt.clip_count_override;
  if (opt.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed_override);
  cfg.validate();

  fs::create_directories(opt.out_dir);
  std::vector<synthgen::ClipRecord> clips;
  clips.reserve(static_cast<std::size_t>(cfg.clip_count));
  for (int i = 0; i < cfg.clip_count; ++i)
    clips.push_back(synthgen::gen_clip(hash_combine(cfg.seed, static_cast<std::uint64_t>(i)),
                                       cfg.scene));
  const synthgen::Manifest manifest = synthgen::write_dataset(clips, opt.out_dir);
  config::save_run_config(cfg, (fs::path(opt.out_dir) / "config.json").string());

  std::map<std::string, int> counts;
  for (const auto& e : manifest.clips) counts[e.split]++;
  std::cout << "wrote " << manifest.clips.size() << " clips to " << opt.out_dir
            << " (train " << counts["train"] << ", val " << counts["val"] << ", test "
            << counts["test"] << ")\n";
}

void run_train(const TrainOptions& opt) {
  config::RunConfig cfg = load_config(opt.config_path);
  const auto clips = load_split(opt.data_dir, "train");

  geometry::HomographyCache cache;
  geometry::HomographyCache* cache_ptr = nullptr;
  if (!opt.hom_cache_path.empty()) {
    if (fs::exists(opt.hom_cache_path)) cache = geometry::HomographyCache::load(opt.hom_cache_path);
    cache_ptr = &cache;
  }

  model::Model<float> m;
  m.init(cfg.model);
  fs::create_directories(opt.out_dir);
  config::save_run_config(cfg, (fs::path(opt.out_dir) / "config.json").string());

  const objective::TrainResult result = objective::train(m, clips, cfg, opt.out_dir, cache_ptr);
  if (cache_ptr) cache.save(opt.hom_cache_path);
  if (result.aborted)
    throw std::runtime_error("training aborted: " + result.abort_reason +
                             (result.checkpoint_path.empty()
                                  ? " (no checkpoint written)"
                                  : " (last good checkpoint: " + result.checkpoint_path + ")"));
  std::cout << "trained " << result.epochs_completed << " epochs, " << result.steps
            << " steps, final loss " << result.final_loss << "\n"
            << "checkpoint: " << result.checkpoint_path << "\n";
}

void run_eval(const EvalOptions& opt) {
  config::RunConfig cfg = load_config(opt.config_path);
  if (opt.checkpoint_path.empty()) throw std::invalid_argument("missing --checkpoint");
  model::Model<float> m = checkpoint::load(opt.checkpoint_path);
  if (m.cfg.audio.input_height != cfg.stft.output_height ||
      m.cfg.audio.input_width != cfg.stft.output_width)
    throw std::runtime_error("checkpoint is incompatible with the configured STFT output size");
  const auto clips = load_split(opt.data_dir, opt.split);
  for (const auto& clip : clips) {
    if (clip.frames.frames[0].height % m.cfg.visual.downsample() != 0)
      throw std::runtime_error("checkpoint is incompatible with the dataset frame size");
  }

  geometry::HomographyCache cache;
  geometry::HomographyCache* cache_ptr = nullptr;
  if (!opt.hom_cache_path.empty()) {
    if (fs::exists(opt.hom_cache_path)) cache = geometry::HomographyCache::load(opt.hom_cache_path);
    cache_ptr = &cache;
  }

  const eval::AudioSource source = eval::audio_source_from_name(opt.audio_source);
  const eval::DatasetReport report = eval::evaluate_clips(m, clips, cfg, source, cache_ptr);
  if (cache_ptr) cache.save(opt.hom_cache_path);

  std::cout << "split: " << opt.split << "  audio: " << opt.audio_source << "\n"
            << eval::report_table(report, cfg.eval);
  if (!opt.report_path.empty()) eval::write_report_json(report, cfg.eval, opt.report_path);
}

void run_visualize(const VisualizeOptions& opt) {
  config::RunConfig cfg = load_config(opt.config_path);
  model::Model<float> m = checkpoint::load(opt.checkpoint_path);
  const synthgen::Manifest manifest = synthgen::read_manifest(opt.data_dir);
  const auto it = std::find_if(manifest.clips.begin(), manifest.clips.end(),
                               [&](const synthgen::ManifestEntry& e) { return e.id == opt.clip_id; });
  if (it == manifest.clips.end())
    throw std::runtime_error("clip '" + opt.clip_id + "' not found in " + opt.data_dir);
  const synthgen::ClipRecord clip = synthgen::load_clip(opt.data_dir, *it);

  model::SampleInputs<float> in = objective::prepare_clip_inputs(clip, cfg);
  in.spectrogram = audiofe::stft_magnitude(clip.audio, cfg.stft).values;
  const auto maps = model::localize_clip(m, in);

  fs::create_directories(opt.out_dir);
  for (int i = 0; i < clip.frames.count(); ++i) {
    const Image& frame = clip.frames.frames[i];
    Image overlay = frame;
    const Tensor<float> heat = resize_bilinear_grid(maps[i].objectness, frame.height, frame.width);
    for (int y = 0; y < frame.height; ++y)
      for (int x = 0; x < frame.width; ++x) {
        const float a = 0.6f * std::clamp(heat.at(y, x), 0.f, 1.f);
        overlay.at(y, x, 0) = (1 - a) * frame.at(y, x, 0) + a * 1.f;
        overlay.at(y, x, 1) = (1 - a) * frame.at(y, x, 1);
        overlay.at(y, x, 2) = (1 - a) * frame.at(y, x, 2);
      }
    if (clip.gt_boxes[i].has_value()) {
      const BoundingBox& b = *clip.gt_boxes[i];
      const int x0 = std::clamp(static_cast<int>(b.x_min), 0, frame.width - 1);
      const int x1 = std::clamp(static_cast<int>(b.x_max) - 1, 0, frame.width - 1);
      const int y0 = std::clamp(static_cast<int>(b.y_min), 0, frame.height - 1);
      const int y1 = std::clamp(static_cast<int>(b.y_max) - 1, 0, frame.height - 1);
      for (int x = x0; x <= x1; ++x) {
        overlay.at(y0, x, 1) = 1.f;
        overlay.at(y1, x, 1) = 1.f;
        overlay.at(y0, x, 0) = overlay.at(y0, x, 2) = 0.f;
        overlay.at(y1, x, 0) = overlay.at(y1, x, 2) = 0.f;
      }
      for (int y = y0; y <= y1; ++y) {
        overlay.at(y, x0, 1) = 1.f;
        overlay.at(y, x1, 1) = 1.f;
        overlay.at(y, x0, 0) = overlay.at(y, x0, 2) = 0.f;
        overlay.at(y, x1, 0) = overlay.at(y, x1, 2) = 0.f;
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "overlay_%02d.ppm", i);
    write_ppm(overlay, (fs::path(opt.out_dir) / name).string());
  }
  std::cout << "wrote " << clip.frames.count() << " overlays to " << opt.out_dir << "\n";
}

void run_vote(const VoteOptions& opt) {
  const auto records = read_annotation_file(opt.records_path);

  // Group records by (video, frame) preserving first-seen order.
  std::map<std::pair<std::string, int>, std::vector<AnnotationRecord>> groups;
  for (const auto& r : records) groups[{r.video_id, r.frame_index}].push_back(r);

  std::set<std::string> videos_before, videos_after;
  int frames_before = 0, frames_after = 0, insufficient = 0;
  int oov_before = 0, oov_after = 0;
  std::vector<eval::ConsensusAnnotation> consensus;
  for (const auto& [key, group] : groups) {
    videos_before.insert(key.first);
    ++frames_before;
    for (const auto& r : group) oov_before += r.out_of_view_sound ? 1 : 0;
    if (group.size() < 3) {
      ++insufficient;
      continue;
    }
    const eval::ConsensusAnnotation c = eval::vote(group);
    if (c.valid) {
      consensus.push_back(c);
      videos_after.insert(key.first);
      ++frames_after;
      oov_after += c.out_of_view_sound ? 1 : 0;
    }
  }
  eval::write_consensus_file(consensus, opt.out_path);

  json stats{{"videos_before", videos_before.size()},
             {"videos_after", videos_after.size()},
             {"frames_before", frames_before},
             {"frames_after", frames_after},
             {"frames_insufficient_annotations", insufficient},
             {"out_of_view_records", oov_before},
             {"out_of_view_consensus_frames", oov_after}};
  std::cout << "videos " << videos_before.size() << " -> " << videos_after.size() << ", frames "
            << frames_before << " -> " << frames_after << " (" << insufficient
            << " with <3 annotations), out-of-view consensus frames: " << oov_after << "\n";
  if (!opt.stats_path.empty()) {
    std::ofstream f(opt.stats_path);
    if (!f) throw std::runtime_error("cannot open " + opt.stats_path);
    f << stats.dump(2) << "\n";
  }
}

}  // namespace egoav::cli
