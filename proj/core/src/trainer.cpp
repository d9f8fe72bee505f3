#include "egoav/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "egoav/audiofe.hpp"
#include "egoav/checkpoint.hpp"
#include "egoav/parallel.hpp"

namespace egoav::objective {

namespace fs = std::filesystem;
using nlohmann::json;

StepReport train_step(model::Model<float>& model, const std::vector<TrainSample>& batch,
                      AdamOptimizer<float>& opt) {
  const int b = static_cast<int>(batch.size());
  if (b < 2)
    throw std::invalid_argument("train_step: batch_size >= 2 required (negative pairing)");

  ad::Tape<float> tape;
  nets::LeafCache<float> leafs(tape, /*requires_grad=*/true);

  std::vector<model::SampleForward<float>> fwd;
  fwd.reserve(batch.size());
  for (const auto& sample : batch)
    fwd.push_back(model::forward_sample(tape, leafs, model, sample.inputs, /*training=*/true,
                                        &sample.m_gt));

  // Negative signals: sample k against the audio of sample (k+1) mod b.
  std::vector<ad::Tape<float>::NodeId> loc_terms(batch.size()), dis_terms(batch.size());
  for (int k = 0; k < b; ++k) {
    const auto& zf = fwd[k].z_frames;
    const auto g_neg = fwd[(k + 1) % b].g_a;
    std::vector<ad::Tape<float>::NodeId> neg_maps(zf.size());
    for (std::size_t i = 0; i < zf.size(); ++i)
      neg_maps[i] = tape.cosine_map(zf[i], g_neg, static_cast<float>(cascade::kCosineEps));
    const auto s_neg = tape.mil_pool(neg_maps);
    const auto n_k = tape.mean_all(s_neg);
    loc_terms[k] = tape.softplus(tape.sub(n_k, fwd[k].p_signal));
    dis_terms[k] = fwd[k].dis_loss;
  }
  const auto l_loc = tape.mean_list(loc_terms);
  const auto l_dis = tape.mean_list(dis_terms);
  const float lambda = static_cast<float>(model.cfg.objectness.lambda);
  const auto total = tape.add(l_loc, tape.affine(l_dis, lambda, 0.f));

  StepReport report;
  report.l_loc = tape.value(l_loc)[0];
  report.l_dis = tape.value(l_dis)[0];
  report.total = tape.value(total)[0];
  if (!std::isfinite(report.total)) {
    report.finite = false;
    report.diagnostics = "non-finite loss: l_loc=" + std::to_string(report.l_loc) +
                         " l_dis=" + std::to_string(report.l_dis) + "; update skipped";
    return report;
  }

  tape.backward(total);
  model.visit([&](const nets::ParamRef<float>& p) {
    if (!p.learnable) return;
    opt.update(p.tensor, leafs.grad_of(p.tensor), p.group);
  });
  return report;
}

model::SampleInputs<float> prepare_clip_inputs(const synthgen::ClipRecord& clip,
                                               const config::RunConfig& cfg,
                                               geometry::HomographyCache* cache) {
  clip.frames.validate();
  const int t = clip.frames.count();
  model::SampleInputs<float> in;
  in.frames = Tensor<float>({t, 3, clip.frames.frames[0].height, clip.frames.frames[0].width});
  for (int i = 0; i < t; ++i) {
    const Tensor<float> f = clip.frames.frames[i].to_tensor();
    std::copy(f.data(), f.data() + f.size(), in.frames.data() + static_cast<std::size_t>(i) * f.size());
  }
  if (cfg.model.temporal_mode == model::TemporalMode::gatm) {
    bool have_all = false;
    if (cache) {
      have_all = true;
      in.homographies.assign(t, std::vector<Homography>(t));
      for (int j = 0; j < t && have_all; ++j)
        for (int i = 0; i < t; ++i) {
          const Homography* h = cache->find(clip.video_id, j, i);
          if (!h) {
            have_all = false;
            break;
          }
          in.homographies[j][i] = *h;
        }
    }
    if (!have_all) {
      in.homographies =
          model::compute_clip_homographies(clip.frames, cfg.ransac, cfg.matcher, clip.seed);
      if (cache)
        for (int j = 0; j < t; ++j)
          for (int i = 0; i < t; ++i) cache->put(clip.video_id, j, i, in.homographies[j][i]);
    }
  }
  return in;
}

TrainResult train(model::Model<float>& model, const std::vector<synthgen::ClipRecord>& clips,
                  const config::RunConfig& cfg, const std::string& out_dir,
                  geometry::HomographyCache* cache) {
  if (clips.size() < 2) throw std::invalid_argument("train: at least two clips required");
  const int b = std::min<int>(cfg.train.batch_size, static_cast<int>(clips.size()));
  if (b < 2) throw std::invalid_argument("train: batch_size >= 2 required");
  set_worker_threads(cfg.train.threads);

  fs::create_directories(out_dir);
  std::ofstream log(fs::path(out_dir) / "metrics.jsonl");
  if (!log) throw std::runtime_error("train: cannot open metrics log in " + out_dir);

  // Per-clip preprocessing shared across epochs: inputs (frames +
  // homographies) and the clean spectrogram of the clip's own audio.
  std::vector<model::SampleInputs<float>> inputs;
  std::vector<Spectrogram> clean_spec;
  inputs.reserve(clips.size());
  clean_spec.reserve(clips.size());
  for (const auto& clip : clips) {
    inputs.push_back(prepare_clip_inputs(clip, cfg, cache));
    clean_spec.push_back(audiofe::stft_magnitude(clip.audio, cfg.stft));
  }

  AdamOptimizer<float> opt(
      {cfg.train.lr_visual, cfg.train.lr_audio, 0.9, 0.999, 1e-8});

  TrainResult result;
  const fs::path ckpt_path = fs::path(out_dir) / "checkpoint.ckpt";
  RandomStream shuffle_rng(hash_combine(cfg.seed, 0x545249));

  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    // Seed-determined order.
    std::vector<int> order(clips.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

    for (std::size_t start = 0; start + b <= order.size(); start += b) {
      std::vector<TrainSample> batch(static_cast<std::size_t>(b));
      for (int k = 0; k < b; ++k) {
        const int idx = order[start + k];
        TrainSample& s = batch[k];
        s.inputs = inputs[idx];
        if (cfg.train.mixing) {
          // Mix-and-separate: pair with another clip in the batch.
          const int partner = order[start + (k + 1 + shuffle_rng.uniform_int(b - 1)) % b];
          const Waveform mixture = audiofe::mix(clips[idx].audio, clips[partner].audio);
          const Spectrogram x_mix = audiofe::stft_magnitude(mixture, cfg.stft);
          const audiofe::BinaryMask gt = audiofe::ground_truth_mask(clean_spec[idx], x_mix);
          s.inputs.spectrogram = x_mix.values;
          s.m_gt = Tensor<float>({gt.height(), gt.width()});
          for (std::size_t i = 0; i < s.m_gt.size(); ++i)
            s.m_gt[i] = static_cast<float>(gt.values[i]);
        } else {
          s.inputs.spectrogram = clean_spec[idx].values;
          // Without mixing the clip's own audio is trivially dominant.
          s.m_gt = Tensor<float>({clean_spec[idx].height(), clean_spec[idx].width()}, 1.f);
        }
      }

      const StepReport report = train_step(model, batch, opt);
      json line{{"step", result.steps},
                {"epoch", epoch},
                {"l_loc", report.l_loc},
                {"l_dis", report.l_dis},
                {"total", report.total}};
      log << line.dump() << "\n";
      if (!report.finite) {
        result.aborted = true;
        result.abort_reason = report.diagnostics;
        log.flush();
        return result;
      }
      result.final_loss = report.total;
      ++result.steps;
    }
    checkpoint::save(model, ckpt_path.string());
    result.checkpoint_path = ckpt_path.string();
    result.epochs_completed = epoch + 1;
  }
  log.flush();
  return result;
}

}  // namespace egoav::objective
