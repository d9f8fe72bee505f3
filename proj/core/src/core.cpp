#include "egoav/core.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace egoav {

using nlohmann::json;

void FrameSequence::validate() const {
  if (frames.empty()) throw std::invalid_argument("FrameSequence: at least one frame required");
  for (const Image& f : frames)
    if (!f.same_size(frames.front()))
      throw std::invalid_argument("FrameSequence: frames differ in size");
  if (frame_indices.size() != frames.size())
    throw std::invalid_argument("FrameSequence: frame_indices/frames length mismatch");
  if (center_index < 0 || center_index >= static_cast<int>(frames.size()))
    throw std::invalid_argument("FrameSequence: center_index out of range");
}

void Waveform::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("Waveform: sample_rate must be positive");
  for (float s : samples)
    if (!std::isfinite(s)) throw std::invalid_argument("Waveform: non-finite sample");
}

void Spectrogram::validate() const {
  if (values.rank() != 2) throw std::invalid_argument("Spectrogram: rank-2 grid required");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!std::isfinite(v) || v < 0)
      throw std::invalid_argument("Spectrogram: entries must be finite and non-negative");
  }
}

void Homography::validate() const {
  if (valid) {
    if (!matrix.all_finite()) throw std::invalid_argument("Homography: non-finite matrix");
    if (matrix.m[8] != 1.0)
      throw std::invalid_argument("Homography: valid matrix must be normalized (h33 == 1)");
    if (matrix.det() == 0.0) throw std::invalid_argument("Homography: singular matrix");
  } else {
    if (matrix.m != Mat3::identity().m)
      throw std::invalid_argument("Homography: invalid homography must be the identity");
  }
}

Tensor<std::uint8_t> boxes_to_mask(const std::vector<BoundingBox>& boxes, int height, int width) {
  if (height <= 0 || width <= 0)
    throw std::invalid_argument("boxes_to_mask: non-positive mask size");
  Tensor<std::uint8_t> mask({height, width});
  for (const BoundingBox& b : boxes) {
    if (!b.well_formed()) {
      std::ostringstream os;
      os << "boxes_to_mask: malformed box [" << b.x_min << "," << b.y_min << "," << b.x_max << ","
         << b.y_max << "]";
      throw std::invalid_argument(os.str());
    }
    if (!b.inside_frame(height, width)) {
      std::ostringstream os;
      os << "boxes_to_mask: box [" << b.x_min << "," << b.y_min << "," << b.x_max << ","
         << b.y_max << "] outside " << width << "x" << height << " frame";
      throw std::invalid_argument(os.str());
    }
    // Half-open inclusion on integer cell coordinates.
    const int x0 = static_cast<int>(std::ceil(b.x_min));
    const int y0 = static_cast<int>(std::ceil(b.y_min));
    for (int y = y0; y < height && y < b.y_max; ++y)
      for (int x = x0; x < width && x < b.x_max; ++x) mask.at(y, x) = 1;
  }
  return mask;
}

static json box_to_json(const BoundingBox& b) {
  return json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max},
              {"y_max", b.y_max}, {"label", b.label}};
}

static BoundingBox box_from_json(const json& j) {
  BoundingBox b;
  b.x_min = j.at("x_min").get<double>();
  b.y_min = j.at("y_min").get<double>();
  b.x_max = j.at("x_max").get<double>();
  b.y_max = j.at("y_max").get<double>();
  b.label = j.value("label", "");
  return b;
}

std::string annotation_to_json(const AnnotationRecord& rec) {
  json j;
  j["video_id"] = rec.video_id;
  j["frame_index"] = rec.frame_index;
  j["annotator_id"] = rec.annotator_id;
  j["selected_boxes"] = json::array();
  for (const auto& b : rec.selected_boxes) j["selected_boxes"].push_back(box_to_json(b));
  j["out_of_view_sound"] = rec.out_of_view_sound;
  j["description"] = rec.description;
  return j.dump();
}

AnnotationRecord annotation_from_json(const std::string& line) {
  json j = json::parse(line);
  AnnotationRecord rec;
  rec.video_id = j.at("video_id").get<std::string>();
  rec.frame_index = j.at("frame_index").get<int>();
  rec.annotator_id = j.at("annotator_id").get<std::string>();
  for (const auto& bj : j.at("selected_boxes")) rec.selected_boxes.push_back(box_from_json(bj));
  rec.out_of_view_sound = j.at("out_of_view_sound").get<bool>();
  rec.description = j.value("description", "");
  return rec;
}

std::vector<AnnotationRecord> read_annotation_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_annotation_file: cannot open " + path);
  std::vector<AnnotationRecord> recs;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      recs.push_back(annotation_from_json(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed annotation record: " + e.what());
    }
  }
  return recs;
}

void write_annotation_file(const std::vector<AnnotationRecord>& recs, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_annotation_file: cannot open " + path);
  for (const auto& r : recs) f << annotation_to_json(r) << "\n";
}

}  // namespace egoav
