#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "egoav/core.hpp"
#include "egoav/kernels.hpp"

namespace egoav::geometry {

// One putative correspondence: a point in frame j and its match in frame i,
// both in pixel coordinates.
struct Correspondence {
  double x_j = 0, y_j = 0;
  double x_i = 0, y_i = 0;
  double score = 0;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// Default matcher: Harris corners with subpixel refinement, normalized 8x8
// intensity-patch descriptors, mutual-nearest-neighbour matching. The
// estimator accepts any CorrespondenceSet, so a stronger descriptor can be
// plugged in upstream.
struct MatcherConfig {
  int max_corners = 200;
  double harris_k = 0.04;
  double response_rel_threshold = 0.005;  // relative to the strongest corner
  int nms_radius = 2;
  double min_ncc = 0.6;
};

CorrespondenceSet match_features(const Image& img_j, const Image& img_i,
                                 const MatcherConfig& cfg = {});

struct RansacConfig {
  int max_iterations = 2000;
  double inlier_threshold = 3.0;  // pixels
  int min_inliers = 12;
  double confidence = 0.995;
  std::uint64_t seed = 0;  // derive per frame pair for reproducibility

  void validate() const {
    if (max_iterations <= 0 || inlier_threshold <= 0 || min_inliers <= 0 || confidence <= 0 ||
        confidence >= 1)
      throw std::invalid_argument("RansacConfig: all fields must be positive (confidence in (0,1))");
  }
};

// RANSAC over 4-point minimal samples, each fit by normalized DLT (Hartley
// normalization of both point sets), final model refit on all inliers and
// normalized so h33 = 1. Degenerate input never throws: it yields the
// invalid/identity fallback.
Homography estimate_homography(const CorrespondenceSet& matches, const RansacConfig& cfg = {});

// Stable per-pair RANSAC seed derived from the frame indices.
std::uint64_t pair_seed(std::uint64_t clip_seed, int source_frame, int target_frame);

// Conjugation to feature-cell coordinates: H' = D H D^-1, D = diag(s, s, 1),
// renormalized so h33 = 1. `scale` is feature cells per pixel (e.g. 1/D_v).
// Invalid homographies pass through unchanged.
Homography scale_homography(const Homography& h, double scale);

// Inverse-mapping bilinear warp into the target frame's viewpoint; cells that
// map outside the grid are zero-filled. Invalid or numerically singular
// transforms return the input unchanged.
template <typename T>
BasicFeatureGrid<T> warp_grid(const BasicFeatureGrid<T>& v, const Homography& h_feat) {
  if (v.values.rank() != 3) throw std::invalid_argument("warp_grid: (c,h,w) grid required");
  if (!h_feat.valid) return v;
  const auto inv = h_feat.matrix.inverse(1e-10);
  if (!inv) return v;
  BasicFeatureGrid<T> out = v;
  out.values = detail::warp_bilinear_fwd(v.values, *inv);
  return out;
}

// Per-location scaled dot-product attention over the warped stack, residual
// form: z(x,y) = q(x,y) + softmax_j(q(x,y).k_j(x,y)/sqrt(d)) k_j(x,y).
// `d` must equal the channel count.
template <typename T>
BasicFeatureGrid<T> aggregate_temporal(const BasicFeatureGrid<T>& query,
                                       const std::vector<BasicFeatureGrid<T>>& stack, int d) {
  if (stack.empty()) throw std::invalid_argument("aggregate_temporal: empty stack");
  if (d != query.channels())
    throw std::invalid_argument("aggregate_temporal: d must equal the channel count");
  std::vector<const Tensor<T>*> vs;
  vs.reserve(stack.size());
  for (const auto& s : stack) {
    if (!s.values.same_shape(query.values))
      throw std::invalid_argument("aggregate_temporal: stack shape mismatch");
    vs.push_back(&s.values);
  }
  Tensor<T> weights;
  Tensor<T> attn =
      detail::temporal_attention_fwd(query.values, vs, T(1) / std::sqrt(static_cast<T>(d)),
                                     &weights);
  BasicFeatureGrid<T> out = query;
  for (std::size_t i = 0; i < attn.size(); ++i) out.values[i] = query.values[i] + attn[i];
  return out;
}

// Bit-exact record/replay store for per-clip homographies keyed by
// (video_id, source_frame, target_frame). Matrices round-trip as raw doubles.
class HomographyCache {
 public:
  void put(const std::string& video_id, int j, int i, const Homography& h);
  const Homography* find(const std::string& video_id, int j, int i) const;
  std::size_t size() const { return entries_.size(); }

  void save(const std::string& path) const;
  static HomographyCache load(const std::string& path);

 private:
  std::map<std::tuple<std::string, int, int>, Homography> entries_;
};

}  // namespace egoav::geometry
