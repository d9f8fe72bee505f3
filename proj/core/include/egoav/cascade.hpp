#pragma once

#include "egoav/audiofe.hpp"
#include "egoav/nets.hpp"

namespace egoav::cascade {

// Epsilon added to cosine denominators; zero-feature cells map to similarity 0.
inline constexpr double kCosineEps = 1e-8;

// ---------------------------------------------------------------------------
// Audio disentanglement: two 1x1 convolutions over Concat[a, Tile(g_v)] with a
// leaky rectification in between. 2c -> c channels, spatial shape preserved.
// ---------------------------------------------------------------------------
template <typename T>
struct DisentangleBlock {
  nets::ConvLayer<T> conv1;  // 2c -> c
  nets::ConvLayer<T> conv2;  // c -> c
  static constexpr T kLeakySlope = T(0.2);
  int channels = 0;

  void init(int c, RandomStream& rng) {
    channels = c;
    conv1.init(c, 2 * c, 1, 1, false, rng);
    conv2.init(c, c, 1, 1, false, rng);
  }

  // a: (1,c,h,w), g_v: (c). Returns (1,c,h,w).
  typename ad::Tape<T>::NodeId forward(ad::Tape<T>& tape, nets::LeafCache<T>& leafs,
                                       typename ad::Tape<T>::NodeId a,
                                       typename ad::Tape<T>::NodeId g_v) {
    const Tensor<T>& av = tape.value(a);
    if (av.rank() != 4 || av.dim(1) != channels)
      throw std::invalid_argument("disentangle: audio grid channel mismatch");
    if (tape.value(g_v).rank() != 1 || tape.value(g_v).dim(0) != channels)
      throw std::invalid_argument("disentangle: guidance vector channel mismatch");
    const int h = av.dim(2), w = av.dim(3);
    auto tiled = tape.reshape(tape.tile_vector(g_v, h, w), {1, channels, h, w});
    auto x = tape.concat_channels(a, tiled);
    x = tape.conv2d(x, leafs(&conv1.weight), leafs(&conv1.bias), 1, 0);
    x = tape.leaky_relu(x, kLeakySlope);
    return tape.conv2d(x, leafs(&conv2.weight), leafs(&conv2.bias), 1, 0);
  }

  void visit(const nets::ParamVisitor<T>& fn) {
    conv1.visit("disentangle.conv1", nets::ParamGroup::audio, fn);
    conv2.visit("disentangle.conv2", nets::ParamGroup::audio, fn);
  }
};

// Spec-level wrapper: a and g_v as value objects (inference path).
template <typename T>
BasicFeatureGrid<T> disentangle(const BasicFeatureGrid<T>& a, const Tensor<T>& g_v,
                                DisentangleBlock<T>& block) {
  ad::Tape<T> tape;
  nets::LeafCache<T> leafs(tape, false);
  const auto& av = a.values;
  auto an = tape.leaf(av.reshaped({1, av.dim(0), av.dim(1), av.dim(2)}));
  auto gn = tape.leaf(g_v);
  auto out = block.forward(tape, leafs, an, gn);
  const Tensor<T>& ov = tape.value(out);
  BasicFeatureGrid<T> r;
  r.values = ov.reshaped({ov.dim(1), ov.dim(2), ov.dim(3)});
  r.modality = Modality::audio;
  return r;
}

// ---------------------------------------------------------------------------
// Separation loss: mean of squared elementwise differences. The mean (rather
// than raw sum) reduction keeps the lambda weighting independent of the
// spectrogram size.
// ---------------------------------------------------------------------------
template <typename T>
T dis_loss(const Tensor<T>& m_pred, const audiofe::BinaryMask& m_gt) {
  if (m_pred.rank() != 2 || m_pred.dim(0) != m_gt.height() || m_pred.dim(1) != m_gt.width())
    throw std::invalid_argument("dis_loss: mask shape mismatch");
  T acc = T(0);
  for (std::size_t i = 0; i < m_pred.size(); ++i) {
    const T d = m_pred[i] - static_cast<T>(m_gt.values[i]);
    acc += d * d;
  }
  return acc / static_cast<T>(m_pred.size());
}

// ---------------------------------------------------------------------------
// Soft localization
// ---------------------------------------------------------------------------

// S(x,y) = cos(v(:,x,y), g_a) with stabilized denominators; entries in [-1,1].
template <typename T>
Tensor<T> av_attention(const BasicFeatureGrid<T>& v, const Tensor<T>& g_a) {
  if (v.values.rank() != 3 || g_a.rank() != 1 || v.channels() != g_a.dim(0))
    throw std::invalid_argument("av_attention: channel mismatch");
  return detail::cosine_map_fwd(v.values, g_a, static_cast<T>(kCosineEps));
}

// v_hat(:,x,y) = softmax_{all cells}(S)(x,y) * v(:,x,y).
template <typename T>
BasicFeatureGrid<T> soft_localize(const BasicFeatureGrid<T>& v, const Tensor<T>& s) {
  if (s.rank() != 2 || s.dim(0) != v.height() || s.dim(1) != v.width())
    throw std::invalid_argument("soft_localize: similarity map shape mismatch");
  BasicFeatureGrid<T> out = v;
  const Tensor<T> w = detail::softmax_flat_fwd(s);
  out.values = detail::scale_cells_fwd(v.values, w);
  return out;
}

}  // namespace egoav::cascade
