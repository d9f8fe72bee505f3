#include "egoav/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "egoav/audiofe.hpp"
#include "egoav/random.hpp"

namespace egoav::synthgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr double kPi = 3.14159265358979323846;

const double kClassTones[4] = {400.0, 800.0, 1600.0, 2400.0};
const double kDistractorTones[4] = {600.0, 1200.0, 2000.0, 3000.0};
const char* kClassLabels[4] = {"kettle", "blender", "tap", "grinder"};
const float kClassColors[4][3] = {
    {0.85f, 0.20f, 0.20f}, {0.20f, 0.78f, 0.25f}, {0.25f, 0.35f, 0.90f}, {0.85f, 0.80f, 0.20f}};
}  // namespace

double class_tone_hz(int class_id) { return kClassTones[class_id % 4]; }
double distractor_tone_hz(int class_id) { return kDistractorTones[class_id % 4]; }
std::string class_label(int class_id) { return kClassLabels[class_id % 4]; }

void SceneConfig::validate() const {
  if (frame_height <= 0 || frame_width <= 0)
    throw std::invalid_argument("SceneConfig: non-positive frame size");
  if (frame_count < 1) throw std::invalid_argument("SceneConfig: frame_count must be >= 1");
  if (clip_seconds <= 0 || sample_rate <= 0)
    throw std::invalid_argument("SceneConfig: non-positive audio duration/rate");
  if (class_count < 1 || class_count > 4)
    throw std::invalid_argument("SceneConfig: class_count must lie in [1,4]");
  if (motion_magnitude < 0) throw std::invalid_argument("SceneConfig: negative motion magnitude");
  if (!(min_overlap > 0 && min_overlap <= 1))
    throw std::invalid_argument("SceneConfig: min_overlap must lie in (0,1]");
  if (!(object_min_frac > 0 && object_min_frac <= object_max_frac && object_max_frac < 1))
    throw std::invalid_argument("SceneConfig: bad object size range");
  if (world_size < std::max(frame_height, frame_width) * 2)
    throw std::invalid_argument("SceneConfig: world_size must be at least twice the frame side");
}

namespace {

// Seeded value-noise texture with a coarse and a fine layer; the fine layer
// guarantees Harris corners everywhere.
Image make_world(const SceneConfig& cfg, int class_id, double ox0, double oy0, double ox1,
                 double oy1, RandomStream& rng) {
  const int n = cfg.world_size;
  auto lattice_noise = [&](int cell) {
    const int gw = n / cell + 2;
    std::vector<float> g(static_cast<std::size_t>(gw) * gw);
    for (auto& v : g) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return std::pair<std::vector<float>, int>(std::move(g), gw);
  };
  const auto [coarse, cgw] = lattice_noise(8);
  const auto [fine, fgw] = lattice_noise(2);

  auto sample_lattice = [](const std::vector<float>& g, int gw, double x, double y, int cell) {
    const double fx = x / cell, fy = y / cell;
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    const double wx = fx - x0, wy = fy - y0;
    const auto at = [&](int yy, int xx) { return g[static_cast<std::size_t>(yy) * gw + xx]; };
    return (1 - wy) * ((1 - wx) * at(y0, x0) + wx * at(y0, x0 + 1)) +
           wy * ((1 - wx) * at(y0 + 1, x0) + wx * at(y0 + 1, x0 + 1));
  };

  Image world(n, n);
  const float* col = kClassColors[class_id % 4];
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double base =
          0.45 + 0.20 * sample_lattice(coarse, cgw, x, y, 8) + 0.14 * sample_lattice(fine, fgw, x, y, 2);
      const bool inside = x >= ox0 && x < ox1 && y >= oy0 && y < oy1;
      if (!inside) {
        const float v = static_cast<float>(std::clamp(base, 0.05, 0.95));
        world.at(y, x, 0) = v;
        world.at(y, x, 1) = v;
        world.at(y, x, 2) = v;
      } else {
        // Object texture: class color with a 3 px checker and fine noise so
        // the matcher sees corners on the object too.
        const int cx = static_cast<int>((x - ox0) / 3.0);
        const int cy = static_cast<int>((y - oy0) / 3.0);
        const float checker = ((cx + cy) % 2 == 0) ? 0.12f : -0.12f;
        const float tex = checker + static_cast<float>(0.06 * sample_lattice(fine, fgw, x, y, 2));
        for (int ch = 0; ch < 3; ++ch)
          world.at(y, x, ch) = std::clamp(col[ch] + tex, 0.02f, 0.98f);
      }
    }
  }
  return world;
}

Mat3 translation(double tx, double ty) { return Mat3{{1, 0, tx, 0, 1, ty, 0, 0, 1}}; }

// Camera perturbation about the frame center: similarity plus mild
// perspective, ranges scaled by `mag`.
Mat3 random_step(RandomStream& rng, const SceneConfig& cfg, double mag) {
  const double theta = rng.uniform(-0.05, 0.05) * mag;
  const double scale = 1.0 + rng.uniform(-0.04, 0.04) * mag;
  const double tx = rng.uniform(-3.0, 3.0) * mag;
  const double ty = rng.uniform(-3.0, 3.0) * mag;
  const double p1 = rng.uniform(-4e-4, 4e-4) * mag;
  const double p2 = rng.uniform(-4e-4, 4e-4) * mag;
  if (cfg.translation_only) return translation(std::round(tx), std::round(ty));
  const double c = std::cos(theta) * scale, s = std::sin(theta) * scale;
  Mat3 m{{c, -s, tx, s, c, ty, p1, p2, 1}};
  const double cx = cfg.frame_width / 2.0, cy = cfg.frame_height / 2.0;
  return translation(cx, cy) * m * translation(-cx, -cy);
}

// Fraction of frame j's pixels that stay inside the viewport after H_j->i.
double viewport_overlap(const Mat3& h_ji, int height, int width) {
  int inside = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const auto p = h_ji.apply(x, y);
      if (p[0] >= 0 && p[0] < width && p[1] >= 0 && p[1] < height) ++inside;
    }
  return static_cast<double>(inside) / (static_cast<double>(height) * width);
}

bool frame_inside_world(const Mat3& world_to_frame, const SceneConfig& cfg) {
  const auto inv = world_to_frame.inverse();
  if (!inv) return false;
  // All frame pixels must sample strictly inside the world texture (1 px
  // margin for the bilinear taps).
  const double xs[2] = {0.0, cfg.frame_width - 1.0};
  const double ys[2] = {0.0, cfg.frame_height - 1.0};
  for (double fy : ys)
    for (double fx : xs) {
      const auto q = inv->apply(fx, fy);
      if (!(q[0] >= 1 && q[0] <= cfg.world_size - 2 && q[1] >= 1 && q[1] <= cfg.world_size - 2))
        return false;
    }
  return true;
}

std::optional<BoundingBox> project_object_box(const Mat3& world_to_frame, double ox0, double oy0,
                                              double ox1, double oy1, const SceneConfig& cfg,
                                              const std::string& label) {
  // Project a dense boundary of the object rect (expanded by one texel for
  // bilinear support) and take the axis-aligned hull.
  const double ex0 = ox0 - 1, ey0 = oy0 - 1, ex1 = ox1 + 1, ey1 = oy1 + 1;
  double mnx = 1e18, mny = 1e18, mxx = -1e18, mxy = -1e18;
  const int steps = 16;
  auto visit = [&](double wx, double wy) {
    const auto p = world_to_frame.apply(wx, wy);
    mnx = std::min(mnx, p[0]);
    mny = std::min(mny, p[1]);
    mxx = std::max(mxx, p[0]);
    mxy = std::max(mxy, p[1]);
  };
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    visit(ex0 + t * (ex1 - ex0), ey0);
    visit(ex0 + t * (ex1 - ex0), ey1);
    visit(ex0, ey0 + t * (ey1 - ey0));
    visit(ex1, ey0 + t * (ey1 - ey0));
  }
  BoundingBox b;
  b.x_min = std::max(0.0, mnx);
  b.y_min = std::max(0.0, mny);
  b.x_max = std::min(static_cast<double>(cfg.frame_width), mxx);
  b.y_max = std::min(static_cast<double>(cfg.frame_height), mxy);
  b.label = label;
  if (b.x_max - b.x_min < 3.0 || b.y_max - b.y_min < 3.0) return std::nullopt;
  return b;
}

Waveform make_tone(double freq, double amplitude, double am_freq, double am_phase, double phase,
                   const SceneConfig& cfg) {
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(cfg.clip_seconds * cfg.sample_rate));
  w.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / cfg.sample_rate;
    const double am = am_freq > 0 ? 0.75 + 0.25 * std::sin(2 * kPi * am_freq * t + am_phase) : 1.0;
    w.samples[k] = static_cast<float>(amplitude * am * std::sin(2 * kPi * freq * t + phase));
  }
  return w;
}

}  // namespace

ClipRecord gen_clip(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  RandomStream root(seed);

  const int t = cfg.frame_count;
  double magnitude = cfg.motion_magnitude;

  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    RandomStream rng_scene = root.fork(hash_combine(0x5147, attempt));
    RandomStream rng_motion = rng_scene.fork(1);
    RandomStream rng_object = rng_scene.fork(2);
    RandomStream rng_texture = rng_scene.fork(3);
    RandomStream rng_audio = rng_scene.fork(4);

    const int class_id = rng_object.uniform_int(cfg.class_count);

    // Object rectangle in world coordinates, near the initial viewport with
    // positional jitter.
    const double side = cfg.frame_width *
                        rng_object.uniform(cfg.object_min_frac, cfg.object_max_frac);
    const double aspect = rng_object.uniform(0.8, 1.25);
    const double ow = side * aspect, oh = side / aspect;
    const double wc = cfg.world_size / 2.0;
    const double jitter = cfg.frame_width * 0.22;
    const double ocx = wc + rng_object.uniform(-jitter, jitter);
    const double ocy = wc + rng_object.uniform(-jitter, jitter);
    const double ox0 = ocx - ow / 2, ox1 = ocx + ow / 2;
    const double oy0 = ocy - oh / 2, oy1 = ocy + oh / 2;

    // Cameras: world -> frame per frame, base viewport centred on the world.
    std::vector<Mat3> cams(static_cast<std::size_t>(t));
    const double off_x = (cfg.world_size - cfg.frame_width) / 2.0;
    const double off_y = (cfg.world_size - cfg.frame_height) / 2.0;
    cams[0] = random_step(rng_motion, cfg, magnitude * 0.5) * translation(-off_x, -off_y);
    for (int i = 1; i < t; ++i) cams[i] = random_step(rng_motion, cfg, magnitude) * cams[i - 1];

    // Validity checks: every frame samples inside the world; consecutive
    // viewports overlap enough.
    bool ok = true;
    for (int i = 0; i < t && ok; ++i) ok = frame_inside_world(cams[i], cfg);
    std::vector<std::vector<Mat3>> h(static_cast<std::size_t>(t),
                                     std::vector<Mat3>(static_cast<std::size_t>(t)));
    if (ok) {
      for (int j = 0; j < t; ++j) {
        const auto inv = cams[j].inverse();
        if (!inv) {
          ok = false;
          break;
        }
        for (int i = 0; i < t; ++i) h[j][i] = (cams[i] * (*inv)).normalized();
      }
    }
    for (int i = 0; i + 1 < t && ok; ++i)
      ok = viewport_overlap(h[i][i + 1], cfg.frame_height, cfg.frame_width) >= cfg.min_overlap;

    // The object must be visible in the centre frame.
    const int center = t / 2;
    std::optional<BoundingBox> center_box;
    if (ok) {
      center_box = project_object_box(cams[center], ox0, oy0, ox1, oy1, cfg,
                                      class_label(class_id));
      ok = center_box.has_value();
    }
    if (!ok) {
      magnitude *= 0.8;
      continue;
    }

    // Render.
    Image world = make_world(cfg, class_id, ox0, oy0, ox1, oy1, rng_texture);
    ClipRecord rec;
    rec.video_id = "clip_" + std::to_string(seed);
    rec.seed = seed;
    rec.class_id = class_id;
    rec.config = cfg;
    rec.frames.fps = cfg.fps;
    rec.frames.center_index = center;
    for (int i = 0; i < t; ++i) {
      const auto inv = cams[i].inverse();
      Image frame(cfg.frame_height, cfg.frame_width);
      for (int y = 0; y < cfg.frame_height; ++y)
        for (int x = 0; x < cfg.frame_width; ++x) {
          const auto q = inv->apply(x, y);
          for (int ch = 0; ch < 3; ++ch)
            frame.at(y, x, ch) = world.sample_clamped(q[1], q[0], ch);
        }
      rec.frames.frames.push_back(std::move(frame));
      rec.frames.frame_indices.push_back(i * 2);
      rec.gt_boxes.push_back(
          project_object_box(cams[i], ox0, oy0, ox1, oy1, cfg, class_label(class_id)));
    }
    rec.gt_homographies.assign(static_cast<std::size_t>(t),
                               std::vector<Homography>(static_cast<std::size_t>(t)));
    for (int j = 0; j < t; ++j)
      for (int i = 0; i < t; ++i) {
        Homography& hh = rec.gt_homographies[j][i];
        hh.matrix = h[j][i];
        hh.valid = true;
        hh.inlier_count = 0;
        hh.source_frame = j;
        hh.target_frame = i;
      }

    // Audio: class tone with slow amplitude modulation; optional off-screen
    // distractor from the disjoint tone set.
    const double am_freq = rng_audio.uniform(2.0, 5.0);
    const double am_phase = rng_audio.uniform(0.0, 2 * kPi);
    const double phase = rng_audio.uniform(0.0, 2 * kPi);
    rec.object_audio = make_tone(class_tone_hz(class_id), cfg.tone_amplitude, am_freq, am_phase,
                                 phase, cfg);
    if (cfg.distractor_enabled) {
      const int dis_class = rng_audio.uniform_int(4);
      const double dis_amp =
          cfg.tone_amplitude * std::pow(10.0, -cfg.distractor_snr_db / 20.0);
      const double dis_phase = rng_audio.uniform(0.0, 2 * kPi);
      rec.distractor_audio =
          make_tone(distractor_tone_hz(dis_class), dis_amp, 0.0, 0.0, dis_phase, cfg);
      rec.audio = audiofe::mix(rec.object_audio, rec.distractor_audio);
    } else {
      rec.distractor_audio.sample_rate = cfg.sample_rate;
      rec.audio = rec.object_audio;
    }
    return rec;
  }
  throw std::runtime_error("gen_clip: motion bound could not be satisfied after " +
                           std::to_string(cfg.max_retries) + " retries (seed " +
                           std::to_string(seed) + ")");
}

// ---------------------------------------------------------------------------
// Dataset I/O
// ---------------------------------------------------------------------------

namespace {

json scene_config_to_json(const SceneConfig& c) {
  return json{{"frame_height", c.frame_height},
              {"frame_width", c.frame_width},
              {"frame_count", c.frame_count},
              {"fps", c.fps},
              {"clip_seconds", c.clip_seconds},
              {"sample_rate", c.sample_rate},
              {"class_count", c.class_count},
              {"motion_magnitude", c.motion_magnitude},
              {"min_overlap", c.min_overlap},
              {"max_retries", c.max_retries},
              {"object_min_frac", c.object_min_frac},
              {"object_max_frac", c.object_max_frac},
              {"distractor_enabled", c.distractor_enabled},
              {"distractor_snr_db", c.distractor_snr_db},
              {"tone_amplitude", c.tone_amplitude},
              {"world_size", c.world_size}};
}

SceneConfig scene_config_from_json(const json& j) {
  SceneConfig c;
  c.frame_height = j.value("frame_height", c.frame_height);
  c.frame_width = j.value("frame_width", c.frame_width);
  c.frame_count = j.value("frame_count", c.frame_count);
  c.fps = j.value("fps", c.fps);
  c.clip_seconds = j.value("clip_seconds", c.clip_seconds);
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.class_count = j.value("class_count", c.class_count);
  c.motion_magnitude = j.value("motion_magnitude", c.motion_magnitude);
  c.min_overlap = j.value("min_overlap", c.min_overlap);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.object_min_frac = j.value("object_min_frac", c.object_min_frac);
  c.object_max_frac = j.value("object_max_frac", c.object_max_frac);
  c.distractor_enabled = j.value("distractor_enabled", c.distractor_enabled);
  c.distractor_snr_db = j.value("distractor_snr_db", c.distractor_snr_db);
  c.tone_amplitude = j.value("tone_amplitude", c.tone_amplitude);
  c.world_size = j.value("world_size", c.world_size);
  return c;
}

json box_to_json(const BoundingBox& b) {
  return json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max},
              {"y_max", b.y_max}, {"label", b.label}};
}

BoundingBox box_from_json(const json& j) {
  BoundingBox b;
  b.x_min = j.at("x_min").get<double>();
  b.y_min = j.at("y_min").get<double>();
  b.x_max = j.at("x_max").get<double>();
  b.y_max = j.at("y_max").get<double>();
  b.label = j.value("label", "");
  return b;
}

std::string frame_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%02d.ppm", i);
  return buf;
}

}  // namespace

std::vector<ManifestEntry> Manifest::split(const std::string& name) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : clips)
    if (e.split == name) out.push_back(e);
  return out;
}

Manifest write_dataset(const std::vector<ClipRecord>& clips, const std::string& directory) {
  fs::create_directories(directory);
  Manifest manifest;
  if (!clips.empty()) manifest.config = clips.front().config;

  // Split assignment: order clips by a hash of their seed; first 80% train,
  // next 10% val, rest test.
  std::vector<std::size_t> order(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ha = splitmix64(clips[a].seed), hb = splitmix64(clips[b].seed);
    return ha != hb ? ha < hb : clips[a].seed < clips[b].seed;
  });
  const std::size_t n = clips.size();
  const std::size_t n_train = (n * 8) / 10;
  const std::size_t n_val = n / 10;
  std::vector<std::string> split_of(n);
  for (std::size_t r = 0; r < n; ++r)
    split_of[order[r]] = r < n_train ? "train" : (r < n_train + n_val ? "val" : "test");

  for (std::size_t i = 0; i < clips.size(); ++i) {
    const ClipRecord& clip = clips[i];
    const std::string clip_dir_name = clip.video_id;
    const fs::path clip_dir = fs::path(directory) / clip_dir_name;
    std::error_code ec;
    fs::create_directories(clip_dir, ec);
    if (ec)
      throw std::runtime_error("write_dataset: cannot create " + clip_dir.string() + ": " +
                               ec.message());
    for (int f = 0; f < clip.frames.count(); ++f)
      write_ppm(clip.frames.frames[f], (clip_dir / frame_name(f)).string());
    audiofe::write_pcm16(clip.audio, (clip_dir / "audio.pcm").string());
    audiofe::write_pcm16(clip.object_audio, (clip_dir / "object.pcm").string());
    if (!clip.distractor_audio.samples.empty())
      audiofe::write_pcm16(clip.distractor_audio, (clip_dir / "distractor.pcm").string());

    json gt;
    gt["video_id"] = clip.video_id;
    gt["seed"] = clip.seed;
    gt["class_id"] = clip.class_id;
    gt["class_label"] = class_label(clip.class_id);
    gt["sample_rate"] = clip.audio.sample_rate;
    gt["fps"] = clip.frames.fps;
    gt["frame_indices"] = clip.frames.frame_indices;
    gt["center_index"] = clip.frames.center_index;
    gt["frame_height"] = clip.config.frame_height;
    gt["frame_width"] = clip.config.frame_width;
    gt["distractor_enabled"] = clip.config.distractor_enabled;
    gt["boxes"] = json::array();
    for (const auto& b : clip.gt_boxes)
      gt["boxes"].push_back(b ? box_to_json(*b) : json(nullptr));
    gt["homographies"] = json::array();
    for (std::size_t j = 0; j < clip.gt_homographies.size(); ++j)
      for (std::size_t k = 0; k < clip.gt_homographies[j].size(); ++k) {
        const Homography& h = clip.gt_homographies[j][k];
        gt["homographies"].push_back(json{{"source", j},
                                          {"target", k},
                                          {"valid", h.valid},
                                          {"matrix", h.matrix.m}});
      }
    std::ofstream gf(clip_dir / "gt.json");
    if (!gf) throw std::runtime_error("write_dataset: cannot write gt.json in " + clip_dir.string());
    gf << gt.dump(2) << "\n";

    ManifestEntry entry;
    entry.id = clip.video_id;
    entry.path = clip_dir_name;
    entry.split = split_of[i];
    entry.class_id = clip.class_id;
    entry.seed = clip.seed;
    manifest.clips.push_back(std::move(entry));
  }

  json mj;
  mj["config"] = scene_config_to_json(manifest.config);
  mj["clips"] = json::array();
  for (const auto& e : manifest.clips)
    mj["clips"].push_back(json{{"id", e.id},
                               {"path", e.path},
                               {"split", e.split},
                               {"class_id", e.class_id},
                               {"seed", e.seed}});
  std::ofstream mf(fs::path(directory) / "manifest.json");
  if (!mf) throw std::runtime_error("write_dataset: cannot write manifest.json in " + directory);
  mf << mj.dump(2) << "\n";
  return manifest;
}

Manifest read_manifest(const std::string& directory) {
  const fs::path path = fs::path(directory) / "manifest.json";
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_manifest: cannot open " + path.string());
  json mj;
  f >> mj;
  Manifest manifest;
  manifest.config = scene_config_from_json(mj.at("config"));
  for (const auto& cj : mj.at("clips")) {
    ManifestEntry e;
    e.id = cj.at("id").get<std::string>();
    e.path = cj.at("path").get<std::string>();
    e.split = cj.at("split").get<std::string>();
    e.class_id = cj.at("class_id").get<int>();
    e.seed = cj.at("seed").get<std::uint64_t>();
    manifest.clips.push_back(std::move(e));
  }
  return manifest;
}

ClipRecord load_clip(const std::string& dataset_dir, const ManifestEntry& entry) {
  const fs::path clip_dir = fs::path(dataset_dir) / entry.path;
  std::ifstream gf(clip_dir / "gt.json");
  if (!gf) throw std::runtime_error("load_clip: cannot open " + (clip_dir / "gt.json").string());
  json gt;
  gf >> gt;

  ClipRecord rec;
  rec.video_id = gt.at("video_id").get<std::string>();
  rec.seed = gt.at("seed").get<std::uint64_t>();
  rec.class_id = gt.at("class_id").get<int>();
  rec.frames.fps = gt.at("fps").get<double>();
  rec.frames.center_index = gt.at("center_index").get<int>();
  rec.frames.frame_indices = gt.at("frame_indices").get<std::vector<int>>();
  const double sample_rate = gt.at("sample_rate").get<double>();

  const int t = static_cast<int>(rec.frames.frame_indices.size());
  for (int i = 0; i < t; ++i)
    rec.frames.frames.push_back(read_ppm((clip_dir / frame_name(i)).string()));

  rec.audio = audiofe::read_pcm16((clip_dir / "audio.pcm").string(), sample_rate);
  rec.object_audio = audiofe::read_pcm16((clip_dir / "object.pcm").string(), sample_rate);
  if (fs::exists(clip_dir / "distractor.pcm"))
    rec.distractor_audio = audiofe::read_pcm16((clip_dir / "distractor.pcm").string(), sample_rate);
  else
    rec.distractor_audio.sample_rate = sample_rate;

  for (const auto& bj : gt.at("boxes")) {
    if (bj.is_null())
      rec.gt_boxes.push_back(std::nullopt);
    else
      rec.gt_boxes.push_back(box_from_json(bj));
  }
  rec.gt_homographies.assign(static_cast<std::size_t>(t),
                             std::vector<Homography>(static_cast<std::size_t>(t)));
  for (const auto& hj : gt.at("homographies")) {
    const int j = hj.at("source").get<int>();
    const int i = hj.at("target").get<int>();
    Homography& h = rec.gt_homographies[j][i];
    const auto m = hj.at("matrix").get<std::array<double, 9>>();
    h.matrix.m = m;
    h.valid = hj.at("valid").get<bool>();
    h.source_frame = j;
    h.target_frame = i;
  }
  return rec;
}

}  // namespace egoav::synthgen
