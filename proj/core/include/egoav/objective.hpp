#pragma once

#include <unordered_map>

#include "egoav/cascade.hpp"
#include "egoav/nets.hpp"

namespace egoav::objective {

// Differential thresholding and loss weighting. Defaults follow the training
// recipe: epsilon 0.5, tau 0.03, lambda 5.
struct ObjectnessConfig {
  double epsilon = 0.5;
  double tau = 0.03;
  double lambda = 5.0;

  void validate() const {
    if (tau <= 0) throw std::invalid_argument("ObjectnessConfig: tau must be positive");
    if (lambda < 0) throw std::invalid_argument("ObjectnessConfig: lambda must be non-negative");
  }
};

// Per-sample positive/negative contrastive signals for one batch.
struct BatchSignals {
  std::vector<double> positives;
  std::vector<double> negatives;

  int batch_size() const { return static_cast<int>(positives.size()); }
  void validate() const {
    if (positives.empty() || positives.size() != negatives.size())
      throw std::invalid_argument("BatchSignals: need matching, non-empty P/N lists");
    for (double v : positives)
      if (!std::isfinite(v)) throw std::invalid_argument("BatchSignals: non-finite positive");
    for (double v : negatives)
      if (!std::isfinite(v)) throw std::invalid_argument("BatchSignals: non-finite negative");
  }
};

// O = sigmoid((S - epsilon)/tau), elementwise.
template <typename T>
Tensor<T> objectness(const Tensor<T>& s, const ObjectnessConfig& cfg) {
  cfg.validate();
  Tensor<T> o(s.shape());
  const T inv_tau = T(1) / static_cast<T>(cfg.tau);
  const T eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < s.size(); ++i)
    o[i] = T(1) / (T(1) + std::exp(-(s[i] - eps) * inv_tau));
  return o;
}

// Per-cell softmax over time weighting a sum over time.
template <typename T>
Tensor<T> mil_pool(const std::vector<Tensor<T>>& maps) {
  std::vector<const Tensor<T>*> ptrs;
  ptrs.reserve(maps.size());
  for (const auto& m : maps) ptrs.push_back(&m);
  Tensor<T> weights;
  return detail::mil_pool_fwd(ptrs, &weights);
}

// P = <O_bar, S_bar> / sum(O_bar); N = mean(S_neg).
template <typename T>
std::pair<T, T> pos_neg_signals(const Tensor<T>& o_bar, const Tensor<T>& s_bar,
                                const Tensor<T>& s_neg) {
  if (!o_bar.same_shape(s_bar))
    throw std::invalid_argument("pos_neg_signals: O/S shape mismatch");
  if (s_neg.rank() != 2) throw std::invalid_argument("pos_neg_signals: S_neg must be a 2-D map");
  T num = T(0), den = T(0);
  for (std::size_t i = 0; i < o_bar.size(); ++i) {
    num += o_bar[i] * s_bar[i];
    den += o_bar[i];
  }
  // den > 0 whenever O is a sigmoid output; guarded regardless.
  const T p = num / (den + T(1e-12));
  const T n = s_neg.sum() / static_cast<T>(s_neg.size());
  return {p, n};
}

// L_loc = mean_k softplus(N_k - P_k); the numerically stable rewriting of
// -log(exp(P)/(exp(P)+exp(N))).
inline double loc_loss(const BatchSignals& signals) {
  signals.validate();
  double acc = 0;
  for (int k = 0; k < signals.batch_size(); ++k) {
    const double x = signals.negatives[k] - signals.positives[k];
    acc += x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return acc / signals.batch_size();
}

inline double total_loss(double l_loc, double l_dis, const ObjectnessConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(l_loc) || !std::isfinite(l_dis))
    throw std::invalid_argument("total_loss: non-finite term");
  return l_loc + cfg.lambda * l_dis;
}

// Negative attention map: per-frame cosine attention of the aggregated visual
// features against a mismatched audio vector, MIL-pooled over time. The
// caller pairs clips roll-by-one inside the batch; batches of one sample have
// no negative and are rejected upstream.
template <typename T>
Tensor<T> negative_map(const std::vector<BasicFeatureGrid<T>>& z_frames,
                       const Tensor<T>& g_a_neg) {
  if (z_frames.empty()) throw std::invalid_argument("negative_map: empty frame list");
  std::vector<Tensor<T>> maps;
  maps.reserve(z_frames.size());
  for (const auto& z : z_frames) maps.push_back(cascade::av_attention(z, g_a_neg));
  return mil_pool(maps);
}

// ---------------------------------------------------------------------------
// Adam with two learning-rate groups (visual vs audio).
// ---------------------------------------------------------------------------
struct AdamConfig {
  double lr_visual = 1e-4;
  double lr_audio = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }

  // One update for a parameter tensor; `grad` must match its shape. A zero
  // learning rate leaves the parameter bit-exact (moments still advance).
  void update(Tensor<T>* param, const Tensor<T>& grad, nets::ParamGroup group) {
    auto& st = states_[param];
    if (st.m.size() != param->size()) {
      st.m = Tensor<T>(param->shape());
      st.v = Tensor<T>(param->shape());
      st.t = 0;
    }
    ++st.t;
    const T lr = static_cast<T>(group == nets::ParamGroup::visual ? cfg_.lr_visual : cfg_.lr_audio);
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T eps = static_cast<T>(cfg_.eps);
    const T bc1 = T(1) - std::pow(b1, static_cast<T>(st.t));
    const T bc2 = T(1) - std::pow(b2, static_cast<T>(st.t));
    for (std::size_t i = 0; i < param->size(); ++i) {
      const T g = grad[i];
      st.m[i] = b1 * st.m[i] + (T(1) - b1) * g;
      st.v[i] = b2 * st.v[i] + (T(1) - b2) * g * g;
      if (lr != T(0)) {
        const T mhat = st.m[i] / bc1;
        const T vhat = st.v[i] / bc2;
        (*param)[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

 private:
  struct State {
    Tensor<T> m, v;
    long t = 0;
  };
  AdamConfig cfg_;
  std::unordered_map<Tensor<T>*, State> states_;
};

}  // namespace egoav::objective
