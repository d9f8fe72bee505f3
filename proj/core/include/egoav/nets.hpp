#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "egoav/autodiff.hpp"
#include "egoav/core.hpp"
#include "egoav/random.hpp"

namespace egoav::nets {

// Optimizer grouping: the visual encoder trains at the small rate, the whole
// audio branch (U-Net encoder/decoder and the disentanglement block) at the
// large one. The temporal aggregation has no learnable parameters.
enum class ParamGroup { visual, audio };

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* tensor;
  bool learnable;  // false for running statistics
  ParamGroup group;
};

template <typename T>
using ParamVisitor = std::function<void(const ParamRef<T>&)>;

// One tape leaf per parameter tensor per graph, shared across every forward
// pass recorded on that tape (so a batch accumulates each parameter's gradient
// on a single node).
template <typename T>
class LeafCache {
 public:
  LeafCache(ad::Tape<T>& tape, bool requires_grad) : tape_(&tape), rg_(requires_grad) {}

  typename ad::Tape<T>::NodeId operator()(Tensor<T>* t) {
    auto it = ids_.find(t);
    if (it != ids_.end()) return it->second;
    const auto id = tape_->leaf(*t, rg_);
    ids_.emplace(t, id);
    return id;
  }

  // Gradient of a parameter after backward(); zeros if the tensor never
  // entered the graph.
  Tensor<T> grad_of(Tensor<T>* t) const {
    auto it = ids_.find(t);
    if (it == ids_.end()) return Tensor<T>(t->shape());
    return tape_->grad(it->second);
  }

 private:
  ad::Tape<T>* tape_;
  bool rg_;
  std::unordered_map<Tensor<T>*, typename ad::Tape<T>::NodeId> ids_;
};

// ---------------------------------------------------------------------------
// Layer building blocks
// ---------------------------------------------------------------------------

template <typename T>
struct ConvLayer {
  Tensor<T> weight;  // conv: (Co,Ci,kh,kw); transposed: (Ci,Co,kh,kw)
  Tensor<T> bias;    // (Co)

  void init(int co, int ci, int kh, int kw, bool transposed, RandomStream& rng) {
    weight = transposed ? Tensor<T>({ci, co, kh, kw}) : Tensor<T>({co, ci, kh, kw});
    bias = Tensor<T>({co});
    // Fan-in scaled uniform init.
    const double bound = 1.0 / std::sqrt(static_cast<double>(ci) * kh * kw);
    for (std::size_t i = 0; i < weight.size(); ++i)
      weight[i] = static_cast<T>(rng.uniform(-bound, bound));
    for (std::size_t i = 0; i < bias.size(); ++i)
      bias[i] = static_cast<T>(rng.uniform(-bound, bound));
  }

  void visit(const std::string& prefix, ParamGroup group, const ParamVisitor<T>& fn) {
    fn({prefix + ".weight", &weight, true, group});
    fn({prefix + ".bias", &bias, true, group});
  }
};

template <typename T>
struct BatchNormLayer {
  Tensor<T> gamma, beta;
  Tensor<T> running_mean, running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);

  void init(int channels) {
    gamma = Tensor<T>({channels}, T(1));
    beta = Tensor<T>({channels}, T(0));
    running_mean = Tensor<T>({channels}, T(0));
    running_var = Tensor<T>({channels}, T(1));
  }

  typename ad::Tape<T>::NodeId apply(ad::Tape<T>& tape, LeafCache<T>& leafs,
                                     typename ad::Tape<T>::NodeId x, bool training) {
    return tape.batch_norm(x, leafs(&gamma), leafs(&beta), &running_mean, &running_var, training,
                           momentum, eps);
  }

  void visit(const std::string& prefix, ParamGroup group, const ParamVisitor<T>& fn) {
    fn({prefix + ".gamma", &gamma, true, group});
    fn({prefix + ".beta", &beta, true, group});
    fn({prefix + ".running_mean", &running_mean, false, group});
    fn({prefix + ".running_var", &running_var, false, group});
  }
};

// ---------------------------------------------------------------------------
// Visual encoder: log2(D_v) stride-2 3x3 conv+BN+ReLU stages followed by a
// stride-1 3x3 conv to the output width (no activation, features keep sign).
// Paper-geometry config: 224x224x3 -> 28x28x512 (D_v = 8).
// ---------------------------------------------------------------------------
struct VisualEncoderConfig {
  std::vector<int> stage_channels{64, 128, 256};
  int out_channels = 512;

  int downsample() const { return 1 << static_cast<int>(stage_channels.size()); }
  void validate() const {
    if (stage_channels.empty())
      throw std::invalid_argument("VisualEncoderConfig: at least one stage required");
    for (int c : stage_channels)
      if (c <= 0) throw std::invalid_argument("VisualEncoderConfig: non-positive stage width");
    if (out_channels <= 0)
      throw std::invalid_argument("VisualEncoderConfig: non-positive out_channels");
  }
};

template <typename T>
struct VisualEncoder {
  VisualEncoderConfig cfg;
  std::vector<ConvLayer<T>> convs;
  std::vector<BatchNormLayer<T>> norms;
  ConvLayer<T> head;

  void init(const VisualEncoderConfig& c, RandomStream& rng) {
    c.validate();
    cfg = c;
    convs.assign(c.stage_channels.size(), {});
    norms.assign(c.stage_channels.size(), {});
    int in_ch = 3;
    for (std::size_t i = 0; i < c.stage_channels.size(); ++i) {
      convs[i].init(c.stage_channels[i], in_ch, 3, 3, false, rng);
      norms[i].init(c.stage_channels[i]);
      in_ch = c.stage_channels[i];
    }
    head.init(c.out_channels, in_ch, 3, 3, false, rng);
  }

  // frames: (N,3,H,W) with H,W divisible by downsample(); returns
  // (N,out_channels,H/D,W/D).
  typename ad::Tape<T>::NodeId forward(ad::Tape<T>& tape, LeafCache<T>& leafs,
                                       typename ad::Tape<T>::NodeId frames, bool training) {
    const Tensor<T>& v = tape.value(frames);
    if (v.rank() != 4 || v.dim(1) != 3)
      throw std::invalid_argument("VisualEncoder: (N,3,H,W) input required");
    if (v.dim(2) % cfg.downsample() != 0 || v.dim(3) % cfg.downsample() != 0)
      throw std::invalid_argument("VisualEncoder: frame size not divisible by downsample factor " +
                                  std::to_string(cfg.downsample()));
    auto x = frames;
    for (std::size_t i = 0; i < convs.size(); ++i) {
      x = tape.conv2d(x, leafs(&convs[i].weight), leafs(&convs[i].bias), /*stride=*/2, /*pad=*/1);
      x = norms[i].apply(tape, leafs, x, training);
      x = tape.relu(x);
    }
    return tape.conv2d(x, leafs(&head.weight), leafs(&head.bias), /*stride=*/1, /*pad=*/1);
  }

  void visit(const ParamVisitor<T>& fn) {
    for (std::size_t i = 0; i < convs.size(); ++i) {
      convs[i].visit("visual.conv" + std::to_string(i), ParamGroup::visual, fn);
      norms[i].visit("visual.bn" + std::to_string(i), ParamGroup::visual, fn);
    }
    head.visit("visual.head", ParamGroup::visual, fn);
  }
};

// ---------------------------------------------------------------------------
// Audio U-Net: five 4x4 stride-2 conv+BN+ReLU encoder layers, five 4x4
// stride-2 up-conv layers with skip connections (the encoder output at a given
// resolution concatenates onto the decoder input at that resolution), sigmoid
// head without BN. 128x128 input -> bottleneck (c,4,4) -> 128x128 mask.
// ---------------------------------------------------------------------------
struct AudioUNetConfig {
  std::vector<int> encoder_channels{64, 128, 256, 512, 512};
  int input_height = 128;
  int input_width = 128;

  int depth() const { return static_cast<int>(encoder_channels.size()); }
  int bottleneck_channels() const { return encoder_channels.back(); }
  void validate() const {
    if (encoder_channels.size() != 5)
      throw std::invalid_argument("AudioUNetConfig: exactly five encoder stages required");
    for (int c : encoder_channels)
      if (c <= 0) throw std::invalid_argument("AudioUNetConfig: non-positive width");
    const int div = 1 << 5;
    if (input_height % div != 0 || input_width % div != 0)
      throw std::invalid_argument("AudioUNetConfig: input size must be divisible by 32");
  }
};

template <typename T>
struct AudioEncodeNodes {
  typename ad::Tape<T>::NodeId bottleneck = -1;      // (1,c,h_a,w_a)
  std::vector<typename ad::Tape<T>::NodeId> skips;   // e1..e4 (outer to inner)
};

template <typename T>
struct AudioUNet {
  AudioUNetConfig cfg;
  std::vector<ConvLayer<T>> enc_convs;
  std::vector<BatchNormLayer<T>> enc_norms;
  std::vector<ConvLayer<T>> dec_convs;      // transposed
  std::vector<BatchNormLayer<T>> dec_norms;  // none after the sigmoid head

  void init(const AudioUNetConfig& c, RandomStream& rng) {
    c.validate();
    cfg = c;
    enc_convs.assign(5, {});
    enc_norms.assign(5, {});
    dec_convs.assign(5, {});
    dec_norms.assign(4, {});
    int in_ch = 1;
    for (int i = 0; i < 5; ++i) {
      enc_convs[i].init(c.encoder_channels[i], in_ch, 4, 4, false, rng);
      enc_norms[i].init(c.encoder_channels[i]);
      in_ch = c.encoder_channels[i];
    }
    const auto& e = c.encoder_channels;
    // Decoder stage k consumes the previous decoder output concatenated with
    // the encoder feature at the same resolution.
    const int dec_out[5] = {e[3], e[2], e[1], e[0], 1};
    int dec_in = e[4];
    for (int k = 0; k < 5; ++k) {
      dec_convs[k].init(dec_out[k], dec_in, 4, 4, true, rng);
      if (k < 4) {
        dec_norms[k].init(dec_out[k]);
        dec_in = dec_out[k] + e[3 - k];
      }
    }
  }

  // x: (1,1,H,W) spectrogram. Returns the bottleneck and skip activations.
  AudioEncodeNodes<T> encode(ad::Tape<T>& tape, LeafCache<T>& leafs,
                             typename ad::Tape<T>::NodeId x, bool training) {
    const Tensor<T>& v = tape.value(x);
    if (v.rank() != 4 || v.dim(1) != 1 || v.dim(2) != cfg.input_height ||
        v.dim(3) != cfg.input_width)
      throw std::invalid_argument("AudioUNet::encode: (1,1," + std::to_string(cfg.input_height) +
                                  "," + std::to_string(cfg.input_width) + ") input required, got " +
                                  v.shape_str());
    AudioEncodeNodes<T> out;
    auto h = x;
    for (int i = 0; i < 5; ++i) {
      h = tape.conv2d(h, leafs(&enc_convs[i].weight), leafs(&enc_convs[i].bias), /*stride=*/2,
                      /*pad=*/1);
      h = enc_norms[i].apply(tape, leafs, h, training);
      h = tape.relu(h);
      if (i < 4) out.skips.push_back(h);
    }
    out.bottleneck = h;
    return out;
  }

  // a_hat: (1,c,h_a,w_a), typically the disentangled bottleneck; skips must
  // come from the matching encode call. Returns the (1,1,H,W) mask in (0,1).
  typename ad::Tape<T>::NodeId decode(ad::Tape<T>& tape, LeafCache<T>& leafs,
                                      typename ad::Tape<T>::NodeId a_hat,
                                      const std::vector<typename ad::Tape<T>::NodeId>& skips,
                                      bool training) {
    if (skips.size() != 4) throw std::invalid_argument("AudioUNet::decode: four skips required");
    const Tensor<T>& v = tape.value(a_hat);
    if (v.rank() != 4 || v.dim(1) != cfg.bottleneck_channels())
      throw std::invalid_argument("AudioUNet::decode: bottleneck shape mismatch, got " +
                                  v.shape_str());
    auto h = a_hat;
    for (int k = 0; k < 5; ++k) {
      h = tape.conv_transpose2d(h, leafs(&dec_convs[k].weight), leafs(&dec_convs[k].bias),
                                /*stride=*/2, /*pad=*/1);
      if (k < 4) {
        h = dec_norms[k].apply(tape, leafs, h, training);
        h = tape.relu(h);
        h = tape.concat_channels(h, skips[3 - k]);
      }
    }
    return tape.sigmoid(h);
  }

  void visit(const ParamVisitor<T>& fn) {
    for (int i = 0; i < 5; ++i) {
      enc_convs[i].visit("audio.enc" + std::to_string(i), ParamGroup::audio, fn);
      enc_norms[i].visit("audio.enc_bn" + std::to_string(i), ParamGroup::audio, fn);
    }
    for (int k = 0; k < 5; ++k) {
      dec_convs[k].visit("audio.dec" + std::to_string(k), ParamGroup::audio, fn);
      if (k < 4) dec_norms[k].visit("audio.dec_bn" + std::to_string(k), ParamGroup::audio, fn);
    }
  }
};

// ---------------------------------------------------------------------------
// Spec-level wrappers (inference semantics: frozen statistics).
// ---------------------------------------------------------------------------

template <typename T>
BasicFeatureGrid<T> visual_encode(const Tensor<T>& frame_chw, VisualEncoder<T>& enc) {
  if (frame_chw.rank() != 3 || frame_chw.dim(0) != 3)
    throw std::invalid_argument("visual_encode: (3,H,W) frame required");
  ad::Tape<T> tape;
  LeafCache<T> leafs(tape, /*requires_grad=*/false);
  auto x = tape.leaf(frame_chw.reshaped({1, 3, frame_chw.dim(1), frame_chw.dim(2)}));
  auto y = enc.forward(tape, leafs, x, /*training=*/false);
  const Tensor<T>& v = tape.value(y);
  BasicFeatureGrid<T> out;
  out.values = v.reshaped({v.dim(1), v.dim(2), v.dim(3)});
  out.modality = Modality::visual;
  out.frame_coordinate_scale = enc.cfg.downsample();
  return out;
}

template <typename T>
struct AudioEncodeResult {
  BasicFeatureGrid<T> bottleneck;
  std::vector<Tensor<T>> skips;
};

template <typename T>
AudioEncodeResult<T> audio_encode(const Spectrogram& spec, AudioUNet<T>& net) {
  ad::Tape<T> tape;
  LeafCache<T> leafs(tape, false);
  Tensor<T> x = spec.values.template cast<T>().reshaped({1, 1, spec.height(), spec.width()});
  auto nodes = net.encode(tape, leafs, tape.leaf(std::move(x)), /*training=*/false);
  AudioEncodeResult<T> out;
  const Tensor<T>& b = tape.value(nodes.bottleneck);
  out.bottleneck.values = b.reshaped({b.dim(1), b.dim(2), b.dim(3)});
  out.bottleneck.modality = Modality::audio;
  for (auto s : nodes.skips) out.skips.push_back(tape.value(s));
  return out;
}

// Mask prediction from an already-encoded bottleneck and its skip states.
template <typename T>
Tensor<T> decode_mask(const BasicFeatureGrid<T>& a_hat, const std::vector<Tensor<T>>& skips,
                      AudioUNet<T>& net) {
  ad::Tape<T> tape;
  LeafCache<T> leafs(tape, false);
  const auto& v = a_hat.values;
  auto a = tape.leaf(v.reshaped({1, v.dim(0), v.dim(1), v.dim(2)}));
  std::vector<typename ad::Tape<T>::NodeId> skip_ids;
  for (const auto& s : skips) skip_ids.push_back(tape.leaf(s));
  auto m = net.decode(tape, leafs, a, skip_ids, /*training=*/false);
  const Tensor<T>& mv = tape.value(m);
  return mv.reshaped({mv.dim(2), mv.dim(3)});
}

// g_v[k] = max over frames of the spatial mean of v_i[k,:,:].
template <typename T>
Tensor<T> pool_visual(const std::vector<BasicFeatureGrid<T>>& grids) {
  if (grids.empty()) throw std::invalid_argument("pool_visual: empty input");
  Tensor<T> out;
  for (std::size_t i = 0; i < grids.size(); ++i) {
    if (!grids[i].values.same_shape(grids[0].values))
      throw std::invalid_argument("pool_visual: grid shape mismatch");
    Tensor<T> m = detail::spatial_mean_fwd(grids[i].values);
    if (i == 0) {
      out = std::move(m);
    } else {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(out[k], m[k]);
    }
  }
  return out;
}

// g_a[k] = max over (t,f) of a_hat[k,t,f].
template <typename T>
Tensor<T> pool_audio(const BasicFeatureGrid<T>& grid) {
  if (grid.values.rank() != 3) throw std::invalid_argument("pool_audio: (c,h,w) grid required");
  std::vector<int> argmax;
  return detail::max_hw_fwd(grid.values, &argmax);
}

}  // namespace egoav::nets
