#include "egoav/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>

#include "egoav/random.hpp"

namespace egoav::geometry {

namespace {

// ---------------------------------------------------------------------------
// Harris corners + patch descriptors
// ---------------------------------------------------------------------------

struct Corner {
  double x, y;
  float response;
};

std::vector<Corner> harris_corners(const Tensor<float>& gray, const MatcherConfig& cfg) {
  const int h = gray.dim(0), w = gray.dim(1);
  if (h < 8 || w < 8) return {};
  Tensor<float> ix({h, w}), iy({h, w});
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      // Sobel
      ix.at(y, x) = (gray.at(y - 1, x + 1) + 2 * gray.at(y, x + 1) + gray.at(y + 1, x + 1) -
                     gray.at(y - 1, x - 1) - 2 * gray.at(y, x - 1) - gray.at(y + 1, x - 1)) /
                    8.f;
      iy.at(y, x) = (gray.at(y + 1, x - 1) + 2 * gray.at(y + 1, x) + gray.at(y + 1, x + 1) -
                     gray.at(y - 1, x - 1) - 2 * gray.at(y - 1, x) - gray.at(y - 1, x + 1)) /
                    8.f;
    }
  }
  // Structure tensor smoothed with a 3x3 binomial window.
  Tensor<float> resp({h, w});
  float max_resp = 0.f;
  static const float k3[3] = {0.25f, 0.5f, 0.25f};
  for (int y = 2; y < h - 2; ++y) {
    for (int x = 2; x < w - 2; ++x) {
      float sxx = 0, syy = 0, sxy = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const float wgt = k3[dy + 1] * k3[dx + 1];
          const float gx = ix.at(y + dy, x + dx);
          const float gy = iy.at(y + dy, x + dx);
          sxx += wgt * gx * gx;
          syy += wgt * gy * gy;
          sxy += wgt * gx * gy;
        }
      const float det = sxx * syy - sxy * sxy;
      const float tr = sxx + syy;
      const float r = det - static_cast<float>(cfg.harris_k) * tr * tr;
      resp.at(y, x) = r;
      max_resp = std::max(max_resp, r);
    }
  }
  if (max_resp <= 0.f) return {};
  const float thresh = static_cast<float>(cfg.response_rel_threshold) * max_resp;
  const int margin = 5;  // descriptor patch fits inside the image
  std::vector<Corner> corners;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const float r = resp.at(y, x);
      if (r < thresh) continue;
      bool is_max = true;
      for (int dy = -cfg.nms_radius; dy <= cfg.nms_radius && is_max; ++dy)
        for (int dx = -cfg.nms_radius; dx <= cfg.nms_radius; ++dx) {
          if (dy == 0 && dx == 0) continue;
          if (resp.at(y + dy, x + dx) > r) {
            is_max = false;
            break;
          }
        }
      if (!is_max) continue;
      // Subpixel refinement: 1-D parabola fit along each axis.
      auto refine = [](float rm, float r0, float rp) {
        const float denom = rm - 2 * r0 + rp;
        if (std::abs(denom) < 1e-12f) return 0.f;
        float off = 0.5f * (rm - rp) / denom;
        return std::min(std::max(off, -0.5f), 0.5f);
      };
      const double fx = x + refine(resp.at(y, x - 1), r, resp.at(y, x + 1));
      const double fy = y + refine(resp.at(y - 1, x), r, resp.at(y + 1, x));
      corners.push_back({fx, fy, r});
    }
  }
  std::sort(corners.begin(), corners.end(),
            [](const Corner& a, const Corner& b) { return a.response > b.response; });
  if (static_cast<int>(corners.size()) > cfg.max_corners) corners.resize(cfg.max_corners);
  return corners;
}

// Zero-mean, L2-normalized 8x8 patch sampled at integer offsets around the
// (rounded) corner.
std::vector<float> patch_descriptor(const Tensor<float>& gray, const Corner& c) {
  const int cx = static_cast<int>(std::lround(c.x));
  const int cy = static_cast<int>(std::lround(c.y));
  std::vector<float> d;
  d.reserve(64);
  float mean = 0;
  for (int dy = -3; dy <= 4; ++dy)
    for (int dx = -3; dx <= 4; ++dx) {
      const float v = gray.at(cy + dy, cx + dx);
      d.push_back(v);
      mean += v;
    }
  mean /= 64.f;
  float norm = 0;
  for (float& v : d) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm > 1e-8f)
    for (float& v : d) v /= norm;
  return d;
}

// ---------------------------------------------------------------------------
// Normalized DLT
// ---------------------------------------------------------------------------

struct NormalizeResult {
  Mat3 transform;
  std::vector<std::array<double, 2>> points;
};

// Hartley normalization: centroid to the origin, mean distance sqrt(2).
NormalizeResult hartley_normalize(const std::vector<std::array<double, 2>>& pts) {
  double cx = 0, cy = 0;
  for (const auto& p : pts) {
    cx += p[0];
    cy += p[1];
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean_dist = 0;
  for (const auto& p : pts) mean_dist += std::hypot(p[0] - cx, p[1] - cy);
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  NormalizeResult r;
  r.transform = Mat3{{s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1}};
  r.points.reserve(pts.size());
  for (const auto& p : pts) r.points.push_back({s * (p[0] - cx), s * (p[1] - cy)});
  return r;
}

// DLT fit of src -> dst on >= 4 correspondences; returns nullopt when the
// system is degenerate.
std::optional<Mat3> fit_dlt(const std::vector<std::array<double, 2>>& src,
                            const std::vector<std::array<double, 2>>& dst) {
  const int n = static_cast<int>(src.size());
  if (n < 4) return std::nullopt;
  const NormalizeResult ns = hartley_normalize(src);
  const NormalizeResult nd = hartley_normalize(dst);
  Eigen::MatrixXd a(2 * n, 9);
  for (int k = 0; k < n; ++k) {
    const double x = ns.points[k][0], y = ns.points[k][1];
    const double xp = nd.points[k][0], yp = nd.points[k][1];
    a.row(2 * k) << -x, -y, -1, 0, 0, 0, xp * x, xp * y, xp;
    a.row(2 * k + 1) << 0, 0, 0, -x, -y, -1, yp * x, yp * y, yp;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  if (svd.rank() < 8) return std::nullopt;
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 hn;
  for (int i = 0; i < 9; ++i) hn.m[static_cast<std::size_t>(i)] = h(i);
  const auto nd_inv = nd.transform.inverse();
  if (!nd_inv) return std::nullopt;
  Mat3 full = (*nd_inv) * hn * ns.transform;
  if (!full.all_finite() || std::abs(full.m[8]) < 1e-12) return std::nullopt;
  full = full.normalized();
  if (std::abs(full.det()) < 1e-12) return std::nullopt;
  return full;
}

bool three_collinear(const std::array<double, 2>& a, const std::array<double, 2>& b,
                     const std::array<double, 2>& c) {
  const double cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  return std::abs(cross) < 1e-6;
}

bool degenerate_sample(const std::vector<std::array<double, 2>>& p) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (three_collinear(p[i], p[j], p[k])) return true;
  return false;
}

}  // namespace

CorrespondenceSet match_features(const Image& img_j, const Image& img_i,
                                 const MatcherConfig& cfg) {
  if (!img_j.same_size(img_i))
    throw std::invalid_argument("match_features: images differ in size");
  const Tensor<float> gj = img_j.to_gray();
  const Tensor<float> gi = img_i.to_gray();
  const auto cj = harris_corners(gj, cfg);
  const auto ci = harris_corners(gi, cfg);
  CorrespondenceSet out;
  if (cj.empty() || ci.empty()) return out;

  std::vector<std::vector<float>> dj, di;
  dj.reserve(cj.size());
  di.reserve(ci.size());
  for (const auto& c : cj) dj.push_back(patch_descriptor(gj, c));
  for (const auto& c : ci) di.push_back(patch_descriptor(gi, c));

  auto best_match = [](const std::vector<float>& d, const std::vector<std::vector<float>>& pool) {
    int best = -1;
    float best_score = -2.f;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      float s = 0;
      for (int t = 0; t < 64; ++t) s += d[t] * pool[k][t];
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(k);
      }
    }
    return std::pair<int, float>(best, best_score);
  };

  for (std::size_t a = 0; a < cj.size(); ++a) {
    const auto [b, score] = best_match(dj[a], di);
    if (b < 0 || score < static_cast<float>(cfg.min_ncc)) continue;
    const auto [back, back_score] = best_match(di[static_cast<std::size_t>(b)], dj);
    if (back != static_cast<int>(a)) continue;  // mutual nearest neighbour only
    Correspondence c;
    c.x_j = cj[a].x;
    c.y_j = cj[a].y;
    c.x_i = ci[static_cast<std::size_t>(b)].x;
    c.y_i = ci[static_cast<std::size_t>(b)].y;
    c.score = score;
    out.pairs.push_back(c);
  }
  return out;
}

std::uint64_t pair_seed(std::uint64_t clip_seed, int source_frame, int target_frame) {
  return hash_combine(hash_combine(clip_seed, 0x4845u),
                      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(source_frame)) << 32) |
                          static_cast<std::uint32_t>(target_frame));
}

Homography estimate_homography(const CorrespondenceSet& matches, const RansacConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(matches.size());
  if (n < 4) return Homography::invalid_identity();

  std::vector<std::array<double, 2>> src(static_cast<std::size_t>(n));
  std::vector<std::array<double, 2>> dst(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    src[k] = {matches.pairs[k].x_j, matches.pairs[k].y_j};
    dst[k] = {matches.pairs[k].x_i, matches.pairs[k].y_i};
  }

  RandomStream rng(cfg.seed);
  const double thresh_sq = cfg.inlier_threshold * cfg.inlier_threshold;

  auto count_inliers = [&](const Mat3& h, std::vector<int>* idx) {
    int count = 0;
    for (int k = 0; k < n; ++k) {
      const auto p = h.apply(src[k][0], src[k][1]);
      const double dx = p[0] - dst[k][0], dy = p[1] - dst[k][1];
      if (!std::isfinite(dx) || !std::isfinite(dy)) continue;
      if (dx * dx + dy * dy <= thresh_sq) {
        ++count;
        if (idx) idx->push_back(k);
      }
    }
    return count;
  };

  int best_inliers = 0;
  Mat3 best_h;
  bool have_model = false;
  int needed_iters = cfg.max_iterations;
  std::vector<std::array<double, 2>> s4(4), d4(4);
  for (int iter = 0; iter < cfg.max_iterations && iter < needed_iters; ++iter) {
    // Sample 4 distinct indices.
    int pick[4];
    for (int t = 0; t < 4; ++t) {
      bool fresh;
      do {
        pick[t] = rng.uniform_int(n);
        fresh = true;
        for (int u = 0; u < t; ++u) fresh = fresh && pick[u] != pick[t];
      } while (!fresh);
    }
    for (int t = 0; t < 4; ++t) {
      s4[t] = src[pick[t]];
      d4[t] = dst[pick[t]];
    }
    if (degenerate_sample(s4) || degenerate_sample(d4)) continue;
    const auto h = fit_dlt(s4, d4);
    if (!h) continue;
    const int inliers = count_inliers(*h, nullptr);
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best_h = *h;
      have_model = true;
      // Adaptive termination at the configured confidence.
      const double w = static_cast<double>(inliers) / n;
      const double p_all = std::pow(w, 4);
      if (p_all > 1e-12) {
        const double denom = std::log(std::max(1e-12, 1.0 - p_all));
        if (denom < 0) {
          needed_iters = std::min<double>(cfg.max_iterations,
                                          std::ceil(std::log(1.0 - cfg.confidence) / denom));
        }
      }
    }
  }

  if (!have_model || best_inliers < std::max(4, cfg.min_inliers))
    return Homography::invalid_identity();

  // Refit on all inliers of the best hypothesis.
  std::vector<int> idx;
  count_inliers(best_h, &idx);
  std::vector<std::array<double, 2>> si, di;
  si.reserve(idx.size());
  di.reserve(idx.size());
  for (int k : idx) {
    si.push_back(src[k]);
    di.push_back(dst[k]);
  }
  Mat3 final_h = best_h;
  if (const auto refit = fit_dlt(si, di)) final_h = *refit;

  Homography out;
  out.matrix = final_h.normalized();
  out.valid = true;
  out.inlier_count = count_inliers(out.matrix, nullptr);
  if (out.inlier_count < cfg.min_inliers) return Homography::invalid_identity();
  return out;
}

Homography scale_homography(const Homography& h, double scale) {
  if (scale <= 0) throw std::invalid_argument("scale_homography: scale must be positive");
  if (!h.valid) return h;
  Mat3 d{{scale, 0, 0, 0, scale, 0, 0, 0, 1}};
  Mat3 d_inv{{1.0 / scale, 0, 0, 0, 1.0 / scale, 0, 0, 0, 1}};
  Homography out = h;
  out.matrix = (d * h.matrix * d_inv).normalized();
  return out;
}

void HomographyCache::put(const std::string& video_id, int j, int i, const Homography& h) {
  entries_[std::make_tuple(video_id, j, i)] = h;
}

const Homography* HomographyCache::find(const std::string& video_id, int j, int i) const {
  const auto it = entries_.find(std::make_tuple(video_id, j, i));
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {
constexpr char kCacheMagic[4] = {'E', 'G', 'H', 'C'};
}

void HomographyCache::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("HomographyCache::save: cannot open " + path);
  f.write(kCacheMagic, 4);
  const std::uint64_t count = entries_.size();
  f.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [key, h] : entries_) {
    const auto& [vid, j, i] = key;
    const std::uint32_t len = static_cast<std::uint32_t>(vid.size());
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    f.write(vid.data(), len);
    const std::int32_t j32 = j, i32 = i, inl = h.inlier_count;
    const std::uint8_t valid = h.valid ? 1 : 0;
    f.write(reinterpret_cast<const char*>(&j32), sizeof(j32));
    f.write(reinterpret_cast<const char*>(&i32), sizeof(i32));
    f.write(reinterpret_cast<const char*>(&valid), sizeof(valid));
    f.write(reinterpret_cast<const char*>(&inl), sizeof(inl));
    f.write(reinterpret_cast<const char*>(h.matrix.m.data()), 9 * sizeof(double));
  }
  if (!f) throw std::runtime_error("HomographyCache::save: short write to " + path);
}

HomographyCache HomographyCache::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("HomographyCache::load: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kCacheMagic, 4) != 0)
    throw std::runtime_error("HomographyCache::load: bad magic in " + path);
  std::uint64_t count = 0;
  f.read(reinterpret_cast<char*>(&count), sizeof(count));
  HomographyCache cache;
  for (std::uint64_t e = 0; e < count; ++e) {
    std::uint32_t len = 0;
    f.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string vid(len, '\0');
    f.read(vid.data(), len);
    std::int32_t j = 0, i = 0, inl = 0;
    std::uint8_t valid = 0;
    f.read(reinterpret_cast<char*>(&j), sizeof(j));
    f.read(reinterpret_cast<char*>(&i), sizeof(i));
    f.read(reinterpret_cast<char*>(&valid), sizeof(valid));
    f.read(reinterpret_cast<char*>(&inl), sizeof(inl));
    Homography h;
    h.valid = valid != 0;
    h.inlier_count = inl;
    h.source_frame = j;
    h.target_frame = i;
    f.read(reinterpret_cast<char*>(h.matrix.m.data()), 9 * sizeof(double));
    if (!f) throw std::runtime_error("HomographyCache::load: truncated file " + path);
    cache.put(vid, j, i, h);
  }
  return cache;
}

}  // namespace egoav::geometry
