#include <doctest.h>

#include <functional>

#include "egoav/autodiff.hpp"
#include "egoav/random.hpp"

using namespace egoav;
using ad::Tape;

namespace {

Tensor<double> random_tensor(std::vector<int> shape, RandomStream& rng, double lo = -1,
                             double hi = 1) {
  Tensor<double> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Central finite differences of a scalar graph w.r.t. one leaf, compared
// against the tape gradient. `build` maps leaf values to the scalar root.
void check_gradient(const std::vector<Tensor<double>>& leaf_values,
                    const std::function<Tape<double>::NodeId(
                        Tape<double>&, const std::vector<Tape<double>::NodeId>&)>& build,
                    double tol = 1e-6, double h = 1e-6) {
  // Analytic gradients.
  Tape<double> tape;
  std::vector<Tape<double>::NodeId> ids;
  for (const auto& v : leaf_values) ids.push_back(tape.leaf(v, true));
  const auto root = build(tape, ids);
  REQUIRE(tape.value(root).size() == 1);
  tape.backward(root);

  auto eval = [&](const std::vector<Tensor<double>>& values) {
    Tape<double> t2;
    std::vector<Tape<double>::NodeId> ids2;
    for (const auto& v : values) ids2.push_back(t2.leaf(v, false));
    return t2.value(build(t2, ids2))[0];
  };

  for (std::size_t leaf = 0; leaf < leaf_values.size(); ++leaf) {
    const Tensor<double>& analytic = tape.grad(ids[leaf]);
    for (std::size_t i = 0; i < leaf_values[leaf].size(); ++i) {
      auto plus = leaf_values;
      auto minus = leaf_values;
      plus[leaf][i] += h;
      minus[leaf][i] -= h;
      const double fd = (eval(plus) - eval(minus)) / (2 * h);
      CHECK(std::abs(analytic[i] - fd) <=
            tol * std::max({1.0, std::abs(analytic[i]), std::abs(fd)}));
    }
  }
}

}  // namespace

TEST_CASE("elementwise and reduction gradients") {
  RandomStream rng(1);
  const auto a = random_tensor({3, 4}, rng);
  const auto b = random_tensor({3, 4}, rng, 0.5, 2.0);

  check_gradient({a, b}, [](Tape<double>& t, const auto& ids) {
    return t.sum_all(t.mul(t.add(ids[0], ids[1]), t.sub(ids[0], ids[1])));
  });
  check_gradient({a, b}, [](Tape<double>& t, const auto& ids) {
    return t.mean_all(t.div(ids[0], ids[1]));
  });
  check_gradient({a}, [](Tape<double>& t, const auto& ids) {
    return t.sum_all(t.sigmoid(t.affine(ids[0], 2.0, -0.3)));
  });
  check_gradient({a}, [](Tape<double>& t, const auto& ids) {
    return t.sum_all(t.softplus(ids[0]));
  });
  check_gradient({a}, [](Tape<double>& t, const auto& ids) {
    return t.mean_all(t.leaky_relu(ids[0], 0.2));
  });
}

TEST_CASE("shape plumbing gradients") {
  RandomStream rng(2);
  const auto a = random_tensor({2, 3, 2, 2}, rng);
  const auto b = random_tensor({2, 2, 2, 2}, rng);
  const auto v = random_tensor({5}, rng);

  check_gradient({a}, [](Tape<double>& t, const auto& ids) {
    return t.sum_all(t.select_n(ids[0], 1));
  });
  check_gradient({a, b}, [](Tape<double>& t, const auto& ids) {
    auto c = t.concat_channels(ids[0], ids[1]);
    return t.mean_all(t.mul(c, c));
  });
  check_gradient({v}, [](Tape<double>& t, const auto& ids) {
    auto g = t.tile_vector(ids[0], 3, 2);
    return t.sum_all(t.mul(g, g));
  });
  check_gradient({a}, [](Tape<double>& t, const auto& ids) {
    return t.sum_all(t.reshape(ids[0], {6, 4}));
  });
}

TEST_CASE("pooling gradients") {
  RandomStream rng(3);
  const auto g = random_tensor({4, 3, 3}, rng);
  check_gradient({g}, [](Tape<double>& t, const auto& ids) {
    auto m = t.spatial_mean(ids[0]);
    return t.sum_all(t.mul(m, m));
  });
  check_gradient({g}, [](Tape<double>& t, const auto& ids) {
    return t.sum_all(t.max_hw(ids[0]));
  });

  const auto x1 = random_tensor({3, 2, 2}, rng);
  const auto x2 = random_tensor({3, 2, 2}, rng);
  const auto x3 = random_tensor({3, 2, 2}, rng);
  check_gradient({x1, x2, x3}, [](Tape<double>& t, const auto& ids) {
    return t.sum_all(t.max_list({ids[0], ids[1], ids[2]}));
  });
  check_gradient({x1, x2, x3}, [](Tape<double>& t, const auto& ids) {
    auto m = t.mean_list({ids[0], ids[1], ids[2]});
    return t.mean_all(t.mul(m, m));
  });
}

TEST_CASE("conv2d and conv_transpose2d gradients") {
  RandomStream rng(4);
  const auto x = random_tensor({2, 3, 6, 6}, rng);
  const auto w = random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5);
  const auto b = random_tensor({4}, rng, -0.2, 0.2);
  check_gradient({x, w, b}, [](Tape<double>& t, const auto& ids) {
    auto y = t.conv2d(ids[0], ids[1], ids[2], 2, 1);
    return t.mean_all(t.mul(y, y));
  });

  const auto xt = random_tensor({1, 3, 4, 4}, rng);
  const auto wt = random_tensor({3, 2, 4, 4}, rng, -0.5, 0.5);
  const auto bt = random_tensor({2}, rng, -0.2, 0.2);
  check_gradient({xt, wt, bt}, [](Tape<double>& t, const auto& ids) {
    auto y = t.conv_transpose2d(ids[0], ids[1], ids[2], 2, 1);
    return t.mean_all(t.mul(y, y));
  });
}

TEST_CASE("conv_transpose2d doubles the spatial size with k4 s2 p1") {
  Tape<double> t;
  auto x = t.leaf(Tensor<double>({1, 2, 4, 4}, 0.5));
  auto w = t.leaf(Tensor<double>({2, 3, 4, 4}, 0.1));
  auto b = t.leaf(Tensor<double>({3}, 0.0));
  auto y = t.conv_transpose2d(x, w, b, 2, 1);
  CHECK(t.value(y).shape() == std::vector<int>{1, 3, 8, 8});
}

TEST_CASE("batch_norm gradients (training mode)") {
  RandomStream rng(5);
  const auto x = random_tensor({2, 3, 4, 4}, rng);
  const auto gamma = random_tensor({3}, rng, 0.5, 1.5);
  const auto beta = random_tensor({3}, rng, -0.5, 0.5);
  Tensor<double> rm({3}, 0.0), rv({3}, 1.0);
  check_gradient({x, gamma, beta}, [&](Tape<double>& t, const auto& ids) {
    Tensor<double> rm_local = rm, rv_local = rv;
    auto y = t.batch_norm(ids[0], ids[1], ids[2], &rm_local, &rv_local, true, 0.1, 1e-5);
    return t.mean_all(t.mul(y, y));
  });
}

TEST_CASE("attention and localization op gradients") {
  RandomStream rng(6);
  const auto grid = random_tensor({4, 3, 3}, rng);
  const auto vec = random_tensor({4}, rng);
  check_gradient({grid, vec}, [](Tape<double>& t, const auto& ids) {
    auto s = t.cosine_map(ids[0], ids[1], 1e-8);
    return t.sum_all(t.mul(s, s));
  });

  const auto map = random_tensor({3, 3}, rng);
  check_gradient({map}, [](Tape<double>& t, const auto& ids) {
    auto w = t.softmax_flat(ids[0]);
    return t.sum_all(t.mul(w, w));
  });

  const auto weights = random_tensor({3, 3}, rng, 0.1, 1.0);
  check_gradient({grid, weights}, [](Tape<double>& t, const auto& ids) {
    auto y = t.scale_cells(ids[0], ids[1]);
    return t.mean_all(t.mul(y, y));
  });

  // Warp by a fixed mild projective map.
  Mat3 warp{{0.98, 0.02, 0.3, -0.03, 1.01, -0.2, 1e-4, -1e-4, 1}};
  check_gradient({grid}, [&](Tape<double>& t, const auto& ids) {
    auto y = t.warp_bilinear(ids[0], warp);
    return t.mean_all(t.mul(y, y));
  });

  const auto q = random_tensor({4, 2, 2}, rng);
  const auto k1 = random_tensor({4, 2, 2}, rng);
  const auto k2 = random_tensor({4, 2, 2}, rng);
  check_gradient({q, k1, k2}, [](Tape<double>& t, const auto& ids) {
    auto y = t.temporal_attention(ids[0], {ids[1], ids[2], ids[0]}, 0.5);
    return t.mean_all(t.mul(y, y));
  });

  const auto m1 = random_tensor({3, 3}, rng);
  const auto m2 = random_tensor({3, 3}, rng);
  const auto m3 = random_tensor({3, 3}, rng);
  check_gradient({m1, m2, m3}, [](Tape<double>& t, const auto& ids) {
    auto y = t.mil_pool({ids[0], ids[1], ids[2]});
    return t.mean_all(t.mul(y, y));
  });
}

TEST_CASE("backward requires a scalar root") {
  Tape<double> t;
  auto x = t.leaf(Tensor<double>({2, 2}, 1.0), true);
  CHECK_THROWS_AS(t.backward(x), std::invalid_argument);
}
