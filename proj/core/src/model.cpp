#include "egoav/model.hpp"

namespace egoav::model {

std::string temporal_mode_name(TemporalMode m) {
  switch (m) {
    case TemporalMode::none: return "none";
    case TemporalMode::average: return "average";
    case TemporalMode::max_pool: return "max";
    case TemporalMode::gatm: return "gatm";
  }
  return "gatm";
}

TemporalMode temporal_mode_from_name(const std::string& name) {
  if (name == "none") return TemporalMode::none;
  if (name == "average") return TemporalMode::average;
  if (name == "max") return TemporalMode::max_pool;
  if (name == "gatm") return TemporalMode::gatm;
  throw std::invalid_argument("unknown temporal mode: " + name +
                              " (expected none|average|max|gatm)");
}

std::vector<std::vector<Homography>> compute_clip_homographies(
    const FrameSequence& frames, const geometry::RansacConfig& ransac,
    const geometry::MatcherConfig& matcher, std::uint64_t clip_seed) {
  frames.validate();
  const int t = frames.count();
  std::vector<std::vector<Homography>> table(t, std::vector<Homography>(t));
  for (int i = 0; i < t; ++i) {
    table[i][i].matrix = Mat3::identity();
    table[i][i].valid = true;
    table[i][i].source_frame = i;
    table[i][i].target_frame = i;
  }
  for (int j = 0; j < t; ++j) {
    for (int i = j + 1; i < t; ++i) {
      auto matches = geometry::match_features(frames.frames[j], frames.frames[i], matcher);
      geometry::RansacConfig cfg = ransac;
      cfg.seed = geometry::pair_seed(clip_seed, j, i);
      Homography h = geometry::estimate_homography(matches, cfg);
      h.source_frame = j;
      h.target_frame = i;
      table[j][i] = h;
      // The reverse direction is the (exact) algebraic inverse.
      Homography rev = Homography::invalid_identity(i, j);
      if (h.valid) {
        if (const auto inv = h.matrix.inverse(1e-12)) {
          rev.matrix = inv->normalized();
          rev.valid = true;
          rev.inlier_count = h.inlier_count;
        }
      }
      table[i][j] = rev;
    }
  }
  return table;
}

std::vector<LocalizationMap> localize_clip(Model<float>& model, const SampleInputs<float>& in) {
  ad::Tape<float> tape;
  nets::LeafCache<float> leafs(tape, /*requires_grad=*/false);
  auto fwd = forward_sample(tape, leafs, model, in, /*training=*/false);
  std::vector<LocalizationMap> maps;
  maps.reserve(fwd.s_maps.size());
  for (std::size_t i = 0; i < fwd.s_maps.size(); ++i) {
    LocalizationMap m;
    m.similarity = tape.value(fwd.s_maps[i]);
    m.objectness = objective::objectness(m.similarity, model.cfg.objectness);
    m.frame_index = static_cast<int>(i);
    maps.push_back(std::move(m));
  }
  return maps;
}

}  // namespace egoav::model
