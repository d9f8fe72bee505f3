#include <doctest.h>

#include <cstdio>

#include "egoav/core.hpp"
#include "egoav/random.hpp"

using namespace egoav;

namespace {

// Independent oracle: per-cell membership test against every box.
Tensor<std::uint8_t> mask_oracle(const std::vector<BoundingBox>& boxes, int h, int w) {
  Tensor<std::uint8_t> m({h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (const auto& b : boxes)
        if (x >= b.x_min && x < b.x_max && y >= b.y_min && y < b.y_max) m.at(y, x) = 1;
  return m;
}

BoundingBox make_box(double x0, double y0, double x1, double y1) {
  BoundingBox b;
  b.x_min = x0;
  b.y_min = y0;
  b.x_max = x1;
  b.y_max = y1;
  return b;
}

}  // namespace

TEST_CASE("boxes_to_mask basics") {
  CHECK(boxes_to_mask({}, 4, 4).sum() == 0);

  const auto full = boxes_to_mask({make_box(0, 0, 4, 4)}, 4, 4);
  CHECK(static_cast<int>(full.sum()) == 16);

  const auto two = boxes_to_mask({make_box(0, 0, 2, 2), make_box(1, 1, 3, 3)}, 4, 4);
  int ones = 0;
  for (std::size_t i = 0; i < two.size(); ++i) ones += two[i];
  CHECK(ones == 7);  // union of 4 + 4 cells with one overlap

  CHECK_THROWS_AS(boxes_to_mask({make_box(-1, 0, 2, 2)}, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(boxes_to_mask({make_box(0, 0, 5, 2)}, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(boxes_to_mask({make_box(2, 0, 1, 2)}, 4, 4), std::invalid_argument);
}

TEST_CASE("boxes_to_mask matches brute-force oracle and is monotone") {
  RandomStream rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 2 + rng.uniform_int(9);
    const int w = 2 + rng.uniform_int(9);
    std::vector<BoundingBox> boxes;
    const int n = rng.uniform_int(4);
    for (int k = 0; k < n; ++k) {
      int x0 = rng.uniform_int(w), x1 = rng.uniform_int(w);
      int y0 = rng.uniform_int(h), y1 = rng.uniform_int(h);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      boxes.push_back(make_box(x0, y0, x1 + 1, y1 + 1));
    }
    const auto got = boxes_to_mask(boxes, h, w);
    const auto want = mask_oracle(boxes, h, w);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    CHECK(got.sum() <= static_cast<std::uint8_t>(255));  // trivially bounded per cell
    CHECK(static_cast<int>([&] {
            int s = 0;
            for (std::size_t i = 0; i < got.size(); ++i) s += got[i];
            return s;
          }()) <= h * w);

    // Monotone: adding one more box never clears a cell.
    std::vector<BoundingBox> more = boxes;
    more.push_back(make_box(0, 0, std::max(1, w / 2), std::max(1, h / 2)));
    const auto grown = boxes_to_mask(more, h, w);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(grown[i] >= got[i]);
  }
}

TEST_CASE("boxes_to_mask area equals inclusion-exclusion on two boxes") {
  RandomStream rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 4 + rng.uniform_int(8), w = 4 + rng.uniform_int(8);
    auto random_box = [&] {
      int x0 = rng.uniform_int(w - 1), y0 = rng.uniform_int(h - 1);
      int x1 = x0 + 1 + rng.uniform_int(w - x0 - 1);
      int y1 = y0 + 1 + rng.uniform_int(h - y0 - 1);
      return make_box(x0, y0, x1, y1);
    };
    const BoundingBox a = random_box(), b = random_box();
    const auto mask = boxes_to_mask({a, b}, h, w);
    int total = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) total += mask[i];
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double expect = a.area() + b.area() - ix * iy;
    CHECK(total == doctest::Approx(expect));
  }
}

TEST_CASE("homography validity invariant") {
  Homography h = Homography::invalid_identity();
  CHECK_NOTHROW(h.validate());
  h.matrix.m[2] = 3.0;  // invalid flag but non-identity matrix
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);

  Homography v;
  v.valid = true;
  v.matrix = Mat3{{1, 0, 5, 0, 1, -2, 0, 0, 1}};
  CHECK_NOTHROW(v.validate());
  v.matrix.m[8] = 2.0;
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
}

TEST_CASE("seed_rng determinism") {
  RandomStream a = seed_rng(0), b = seed_rng(0);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());

  RandomStream c = seed_rng(0), d = seed_rng(1);
  CHECK(c.uniform() != d.uniform());
}

TEST_CASE("seed_rng golden values (seed 42)") {
  // Frozen from the mt19937_64 stream; pinned by the standard, so these hold
  // on every conforming platform.
  RandomStream rng = seed_rng(42);
  const double expect[3] = {0.75515553295453897, 0.63903139385469743, 0.7521452007480266};
  for (double e : expect) CHECK(rng.uniform() == e);
}

TEST_CASE("annotation record JSONL round trip") {
  AnnotationRecord rec;
  rec.video_id = "vid_7";
  rec.frame_index = 3;
  rec.annotator_id = "ann_2";
  rec.selected_boxes = {make_box(1, 2, 5, 9)};
  rec.selected_boxes[0].label = "pan";
  rec.out_of_view_sound = true;
  rec.description = "sizzling pan";
  const AnnotationRecord back = annotation_from_json(annotation_to_json(rec));
  CHECK(back.video_id == rec.video_id);
  CHECK(back.frame_index == rec.frame_index);
  CHECK(back.annotator_id == rec.annotator_id);
  CHECK(back.selected_boxes.size() == 1);
  CHECK(back.selected_boxes[0].label == "pan");
  CHECK(back.out_of_view_sound == rec.out_of_view_sound);
  CHECK(back.description == rec.description);
}
