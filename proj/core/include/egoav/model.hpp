#pragma once

#include "egoav/cascade.hpp"
#include "egoav/geometry.hpp"
#include "egoav/nets.hpp"
#include "egoav/objective.hpp"

namespace egoav::model {

// Temporal context handling: `gatm` is the full geometry-aware path; the
// others are the ablation arms (pooling over unaligned per-frame features, or
// no temporal modeling at all).
enum class TemporalMode { none, average, max_pool, gatm };

std::string temporal_mode_name(TemporalMode m);
TemporalMode temporal_mode_from_name(const std::string& name);

struct ModelConfig {
  nets::VisualEncoderConfig visual;
  nets::AudioUNetConfig audio;
  TemporalMode temporal_mode = TemporalMode::gatm;
  bool soft_localization = true;
  objective::ObjectnessConfig objectness;
  std::uint64_t init_seed = 1;

  int feature_channels() const { return visual.out_channels; }

  void validate() const {
    visual.validate();
    audio.validate();
    objectness.validate();
    if (visual.out_channels != audio.bottleneck_channels())
      throw std::invalid_argument(
          "ModelConfig: visual out_channels must equal the audio bottleneck width");
  }
};

template <typename T>
struct Model {
  ModelConfig cfg;
  nets::VisualEncoder<T> visual;
  nets::AudioUNet<T> audio;
  cascade::DisentangleBlock<T> disentangle;

  void init(const ModelConfig& c) {
    c.validate();
    cfg = c;
    RandomStream rng(c.init_seed);
    auto r_vis = rng.fork(0x7601);
    auto r_aud = rng.fork(0x7602);
    auto r_dis = rng.fork(0x7603);
    visual.init(c.visual, r_vis);
    audio.init(c.audio, r_aud);
    disentangle.init(c.feature_channels(), r_dis);
  }

  void visit(const nets::ParamVisitor<T>& fn) {
    visual.visit(fn);
    audio.visit(fn);
    disentangle.visit(fn);
  }
};

// Per-sample graph inputs. Homographies are at FRAME resolution, [j][i]
// ordered, with valid self-identities on the diagonal; the graph conjugates
// them to feature scale. They are empty unless temporal_mode == gatm.
template <typename T>
struct SampleInputs {
  Tensor<T> frames;                                   // (T,3,H,W)
  Tensor<T> spectrogram;                              // (h_s,w_s)
  std::vector<std::vector<Homography>> homographies;  // frame-resolution H_ji
};

template <typename T>
struct SampleForward {
  using NodeId = typename ad::Tape<T>::NodeId;
  NodeId g_a = -1;                  // (c) audio guidance vector
  std::vector<NodeId> z_frames;     // per-frame aggregated visual features (c,h,w)
  std::vector<NodeId> s_maps;       // per-frame similarity maps (h,w), post-temporal
  NodeId s_bar = -1;                // MIL-pooled similarity map (h,w)
  NodeId p_signal = -1;             // scalar positive signal
  NodeId m_pred = -1;               // (h_s,w_s) separation mask (training graphs)
  NodeId dis_loss = -1;             // scalar, mean((M_pred - M_gt)^2) (training graphs)
};

// Records one sample's forward pass onto the tape. When `m_gt` is non-null the
// separation branch (decoder + loss) is included.
template <typename T>
SampleForward<T> forward_sample(ad::Tape<T>& tape, nets::LeafCache<T>& leafs, Model<T>& model,
                                const SampleInputs<T>& in, bool training,
                                const Tensor<T>* m_gt = nullptr) {
  using NodeId = typename ad::Tape<T>::NodeId;
  const ModelConfig& cfg = model.cfg;
  const int t = in.frames.dim(0);
  const int c = cfg.feature_channels();

  SampleForward<T> out;

  // Visual features for the whole clip (BN statistics span the T frames).
  NodeId frames = tape.leaf(in.frames);
  NodeId vgrid = model.visual.forward(tape, leafs, frames, training);
  std::vector<NodeId> v(t);
  for (int i = 0; i < t; ++i) v[i] = tape.select_n(vgrid, i);

  // Visual guidance vector: spatial average then temporal max.
  std::vector<NodeId> means(t);
  for (int i = 0; i < t; ++i) means[i] = tape.spatial_mean(v[i]);
  NodeId g_v = tape.max_list(means);

  // Audio branch.
  NodeId spec = tape.leaf(
      in.spectrogram.reshaped({1, 1, in.spectrogram.dim(0), in.spectrogram.dim(1)}));
  auto enc = model.audio.encode(tape, leafs, spec, training);
  NodeId a_hat4 = model.disentangle.forward(tape, leafs, enc.bottleneck, g_v);
  const auto& ahv = tape.value(a_hat4);
  NodeId a_hat = tape.reshape(a_hat4, {ahv.dim(1), ahv.dim(2), ahv.dim(3)});
  out.g_a = tape.max_hw(a_hat);

  if (m_gt != nullptr) {
    NodeId mask4 = model.audio.decode(tape, leafs, a_hat4, enc.skips, training);
    const auto& mv = tape.value(mask4);
    out.m_pred = tape.reshape(mask4, {mv.dim(2), mv.dim(3)});
    NodeId gt = tape.leaf(*m_gt);
    NodeId diff = tape.sub(out.m_pred, gt);
    out.dis_loss = tape.mean_all(tape.mul(diff, diff));
  }

  // Soft localization.
  std::vector<NodeId> v_hat(t);
  for (int i = 0; i < t; ++i) {
    if (cfg.soft_localization) {
      NodeId s = tape.cosine_map(v[i], out.g_a, static_cast<T>(cascade::kCosineEps));
      v_hat[i] = tape.scale_cells(v[i], tape.softmax_flat(s));
    } else {
      v_hat[i] = v[i];
    }
  }

  // Temporal modeling.
  out.z_frames.resize(t);
  switch (cfg.temporal_mode) {
    case TemporalMode::none:
      for (int i = 0; i < t; ++i) out.z_frames[i] = v_hat[i];
      break;
    case TemporalMode::average: {
      NodeId pooled = tape.mean_list(v_hat);
      for (int i = 0; i < t; ++i) out.z_frames[i] = pooled;
      break;
    }
    case TemporalMode::max_pool: {
      NodeId pooled = tape.max_list(v_hat);
      for (int i = 0; i < t; ++i) out.z_frames[i] = pooled;
      break;
    }
    case TemporalMode::gatm: {
      if (static_cast<int>(in.homographies.size()) != t)
        throw std::invalid_argument("forward_sample: homography table must be TxT");
      const double cell_scale = 1.0 / model.cfg.visual.downsample();
      const T inv_sqrt_d = T(1) / std::sqrt(static_cast<T>(c));
      for (int i = 0; i < t; ++i) {
        std::vector<NodeId> stack(t);
        for (int j = 0; j < t; ++j) {
          const Homography& h = in.homographies[j][i];
          if (!h.valid) {
            stack[j] = v_hat[j];  // identity fallback: unaligned feature
            continue;
          }
          const Homography h_feat = geometry::scale_homography(h, cell_scale);
          const auto inv = h_feat.matrix.inverse(1e-10);
          if (!inv) {
            stack[j] = v_hat[j];
            continue;
          }
          stack[j] = tape.warp_bilinear(v_hat[j], *inv);
        }
        NodeId attn = tape.temporal_attention(v_hat[i], stack, inv_sqrt_d);
        out.z_frames[i] = tape.add(v_hat[i], attn);
      }
      break;
    }
  }

  // Final per-frame attention maps and the MIL-pooled clip map.
  out.s_maps.resize(t);
  for (int i = 0; i < t; ++i)
    out.s_maps[i] = tape.cosine_map(out.z_frames[i], out.g_a, static_cast<T>(cascade::kCosineEps));
  out.s_bar = tape.mil_pool(out.s_maps);

  // P = <O_bar, S_bar> / sum(O_bar), with O_bar = sigmoid((S_bar - eps)/tau).
  const T inv_tau = T(1) / static_cast<T>(cfg.objectness.tau);
  NodeId o_bar = tape.sigmoid(
      tape.affine(out.s_bar, inv_tau, -static_cast<T>(cfg.objectness.epsilon) * inv_tau));
  NodeId num = tape.sum_all(tape.mul(o_bar, out.s_bar));
  NodeId den = tape.affine(tape.sum_all(o_bar), T(1), T(1e-12));
  out.p_signal = tape.div(num, den);
  return out;
}

// Homographies for every ordered frame pair of a clip, estimated at frame
// resolution. Pairs with j < i run matcher + RANSAC (seeded per pair); j > i
// reuses the inverse; the diagonal is the valid identity.
std::vector<std::vector<Homography>> compute_clip_homographies(
    const FrameSequence& frames, const geometry::RansacConfig& ransac,
    const geometry::MatcherConfig& matcher, std::uint64_t clip_seed);

// Inference: per-frame localization maps for one clip (no mixing, frozen
// statistics). Returns one LocalizationMap per frame.
std::vector<LocalizationMap> localize_clip(Model<float>& model, const SampleInputs<float>& in);

}  // namespace egoav::model
