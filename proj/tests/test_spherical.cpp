#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lacmax/spherical.hpp"

using namespace lacmax;

namespace {

constexpr double kPi = std::numbers::pi;

GranularFunction random_center_blob(const Lattice& lat, std::mt19937_64& rng,
                                    int count) {
  GranularFunction f(lat);
  int n = lat.n();
  for (int i = 0; i < count; ++i) {
    int x = n / 2 + int(rng() % (n / 4)) - n / 8;
    int y = n / 2 + int(rng() % (n / 4)) - n / 8;
    f.at(x, y) = double(rng() % 1000 + 1) / 1000.0;
  }
  return f;
}

}  // namespace

TEST_CASE("circle measure mass and geometry") {
  Lattice lat{0, -8};
  DiscreteMeasure mu = circle_measure(-2, lat);  // radius 1/4
  CHECK(mu.total_mass == 1.0);
  double sum = 0.0;
  for (double w : mu.weights) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  double delta = lat.delta();
  for (const auto& c : mu.cells) {
    double r = std::hypot(c.dx * delta, c.dy * delta);
    CHECK(std::fabs(r - 0.25) <= 2 * delta);
  }
  CHECK_THROWS_AS(circle_measure(-7, lat), ResolutionError);  // 2^-7 < 8*2^-8
}

TEST_CASE("atom set is reflection symmetric") {
  Lattice lat{0, -8};
  DiscreteMeasure mu = circle_measure(-2, lat);
  // the sampler rounds to nearest offset, so s -> -s is a bijection of atoms
  std::map<std::pair<int, int>, double> m;
  for (size_t i = 0; i < mu.cells.size(); ++i)
    m[{mu.cells[i].dx, mu.cells[i].dy}] = mu.weights[i];
  for (const auto& [c, w] : m) {
    auto it = m.find({-c.first, -c.second});
    REQUIRE(it != m.end());
    CHECK(it->second == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("convolution preserves constants on the interior") {
  Lattice lat{1, -8};
  int n = lat.n();
  GranularFunction f(lat);
  double c = 0.7;
  for (int y = n / 4; y < 3 * n / 4; ++y)
    for (int x = n / 4; x < 3 * n / 4; ++x) f.at(x, y) = c;
  GranularFunction g = convolve(circle_measure(-3, lat), f);
  CHECK(g.at(n / 2, n / 2) == doctest::Approx(c).epsilon(1e-2));
  CHECK(sup_norm(g) <= c * (1 + 1e-9));
}

TEST_CASE("half plane average is one half") {
  Lattice lat{1, -7};
  int n = lat.n();
  DiscreteMeasure mu = circle_measure(-3, lat);
  double v = 0.0;
  for (size_t a = 0; a < mu.cells.size(); ++a) {
    int sx = n / 2 - mu.cells[a].dx;  // f(x - atom) at x = center
    if (sx >= n / 2) v += mu.weights[a];
  }
  CHECK(v == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("zero function stays zero and spikes spread mass") {
  Lattice lat{0, -6};
  DiscreteMeasure mu = circle_measure(-3, lat);
  GranularFunction z(lat);
  CHECK(sup_norm(convolve(mu, z)) == 0.0);
  GranularFunction spike(lat);
  spike.at(32, 32) = 3.0;
  GranularFunction ring = convolve(mu, spike);
  CHECK(mass(ring) == doctest::Approx(mass(spike)).epsilon(1e-10));
}

TEST_CASE("fast and direct convolution agree") {
  std::mt19937_64 rng(123);
  Lattice lat{0, -6};  // 64^2
  for (int seed = 0; seed < 20; ++seed) {
    GranularFunction f = random_center_blob(lat, rng, 50);
    DiscreteMeasure mu = seed % 2 ? cap_measure(-3, {1.2}, 2.0, lat)
                                  : circle_measure(-3, lat);
    GranularFunction a = convolve(mu, f);
    GranularFunction b = convolve_direct(mu, f);
    a -= b;
    CHECK(sup_norm(a) <= 1e-8);
  }
}

TEST_CASE("padding violations are rejected") {
  Lattice lat{0, -6};
  GranularFunction f(lat);
  f.at(1, 1) = 1.0;  // within 2^k of the boundary
  CHECK_THROWS_AS(convolve(circle_measure(-2, lat), f), std::domain_error);
  CHECK_THROWS_AS(convolve_direct(circle_measure(-2, lat), f), std::domain_error);
}

TEST_CASE("self adjointness") {
  std::mt19937_64 rng(5);
  Lattice lat{0, -6};
  DiscreteMeasure mu = circle_measure(-3, lat);
  for (int trial = 0; trial < 10; ++trial) {
    GranularFunction f = random_center_blob(lat, rng, 40);
    GranularFunction g = random_center_blob(lat, rng, 40);
    double lhs = inner(convolve(mu, f), g);
    double rhs = inner(f, convolve(mu, g));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  }
}

TEST_CASE("cap measures partition the circle mass") {
  Lattice lat{0, -8};
  Direction east{0.0};
  DiscreteMeasure full = cap_measure(-2, east, 2 * kPi, lat);
  DiscreteMeasure circ = circle_measure(-2, lat);
  CHECK(full.total_mass == doctest::Approx(1.0));
  REQUIRE(full.cells.size() == circ.cells.size());
  for (size_t i = 0; i < full.cells.size(); ++i) {
    CHECK(full.cells[i].dx == circ.cells[i].dx);
    CHECK(full.cells[i].dy == circ.cells[i].dy);
    CHECK(full.weights[i] == doctest::Approx(circ.weights[i]).epsilon(1e-12));
  }

  DiscreteMeasure west = cap_measure(-2, {kPi}, kPi, lat);
  DiscreteMeasure east_half = cap_measure(-2, {0.0}, kPi, lat);
  CHECK(west.total_mass + east_half.total_mass == doctest::Approx(1.0).epsilon(1e-15));

  // closed-form mass of a thin cap: width = 100 * c_{i-1}/c_i at ratio 2^8
  double width = 100.0 / 256.0;
  DiscreteMeasure thin = cap_measure(-2, {1.0}, width, lat);
  CHECK(thin.total_mass == doctest::Approx(width / (2 * kPi)).epsilon(1e-12));
  CHECK(thin.total_mass == doctest::Approx(0.06217).epsilon(1e-3));
  CHECK_THROWS_AS(cap_measure(-2, east, 1e-4, lat), ResolutionError);
}

TEST_CASE("autocorrelation kernel support and mass") {
  Lattice lat{1, -7};
  int k = -3;
  GranularFunction kern = autocorrelation_kernel(k, lat);
  CHECK(mass(kern) == doctest::Approx(1.0).epsilon(2e-3));
  int n = lat.n(), c = n / 2;
  double delta = lat.delta();
  double lim = std::ldexp(2.0, k) + 4 * delta;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (kern.at(x, y) != 0.0)
        CHECK(std::hypot((x - c) * delta, (y - c) * delta) <= lim);
}

TEST_CASE("pointwise kernel bound") {
  Lattice lat{1, -8};
  for (int k : {-3, -2}) {
    GranularFunction kern = autocorrelation_kernel(k, lat);
    int n = lat.n(), c = n / 2;
    double delta = lat.delta();
    double rmax = std::ldexp(1.0, k);
    double worst = 0.0;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        double r = std::hypot((x - c) * delta, (y - c) * delta);
        if (r < 8 * delta || r > rmax) continue;
        worst = std::max(worst, kern.at(x, y) * std::ldexp(1.0, k) * r);
      }
    CHECK(worst > 0.0);
    CHECK(worst <= 64.0);
  }
}

TEST_CASE("refinement stability of spherical means") {
  auto smooth = [](const Lattice& lat) {
    GranularFunction f(lat);
    int n = lat.n();
    for (int y = n / 4; y < 3 * n / 4; ++y)
      for (int x = n / 4; x < 3 * n / 4; ++x) {
        double px = (x + 0.5) / n, py = (y + 0.5) / n;
        f.at(x, y) = 0.5 * (1 + std::sin(4 * px) * std::cos(3 * py));
      }
    return f;
  };
  Lattice coarse{1, -6}, fine{1, -7};
  GranularFunction gc = convolve(circle_measure(-3, coarse), smooth(coarse));
  GranularFunction gf = convolve(circle_measure(-3, fine), smooth(fine));
  double worst = 0.0;
  int nc = coarse.n();
  for (int y = nc / 4; y < 3 * nc / 4; ++y)
    for (int x = nc / 4; x < 3 * nc / 4; ++x) {
      double avg = (gf.at(2 * x, 2 * y) + gf.at(2 * x + 1, 2 * y) +
                    gf.at(2 * x, 2 * y + 1) + gf.at(2 * x + 1, 2 * y + 1)) /
                   4.0;
      worst = std::max(worst, std::fabs(avg - gc.at(x, y)));
    }
  CHECK(worst <= 40.0 * coarse.delta());  // recorded refinement constant
}

TEST_CASE("dominate_kernel layer structure") {
  std::vector<double> ladder = {std::ldexp(1.0, -8), std::ldexp(1.0, -4)};
  auto layers = dominate_kernel(ladder, -2);
  REQUIRE(layers.size() == 1);
  CHECK(layers[0].rects.size() == 16);  // (c1/c0)^(d-1)
  CHECK(layers[0].weight == doctest::Approx(64.0));  // 2^-k / c_1 = 4 * 16
  for (const auto& r : layers[0].rects) {
    CHECK(r.short_side == doctest::Approx(ladder[0]));
    CHECK(r.long_side == doctest::Approx(ladder[1]));
  }
  CHECK(rect_layer_sum(layers, 2 * ladder[1], 0.0) == 0.0);
  CHECK_THROWS_AS(dominate_kernel({0.5, 0.25}, -2), std::invalid_argument);
}

TEST_CASE("dominate_kernel lower bound along rect axes") {
  std::vector<double> ladder;
  double e = -12;
  ladder.push_back(std::exp2(e));
  while (e < -2) {
    e = e / 2;
    ladder.push_back(std::exp2(e));
  }
  int k = 0;
  auto layers = dominate_kernel(ladder, k);
  double c_dom = 0.0;
  for (size_t i = 1; i < ladder.size(); ++i) {
    const auto& layer = layers[i - 1];
    for (size_t t = 0; t < layer.rects.size();
         t += std::max<size_t>(1, layer.rects.size() / 4)) {
      const auto& r = layer.rects[t];
      // 0.499 stays off the measure-zero rect boundary
      for (double rad : {0.499 * ladder[i], ladder[i] / 4}) {
        if (rad < ladder[0] || rad > ladder.back() / 2) continue;
        double px = -r.dir.uy() * rad, py = r.dir.ux() * rad;
        double target = std::ldexp(1.0, -k) / rad;
        double got = rect_layer_sum(layers, px, py);
        REQUIRE(got > 0.0);
        c_dom = std::max(c_dom, target / got);
      }
    }
  }
  CHECK(c_dom <= 16.0);  // recorded domination constant
}

TEST_CASE("oriented rect rasterization is half open") {
  Lattice lat{0, -5};
  OrientedRect r;
  r.cx = 0.5;
  r.cy = 0.5;
  r.dir.angle = 0.0;
  r.short_side = 0.25;
  r.long_side = 0.5;
  GridSet cells = r.rasterize(lat);
  int n = lat.n();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double px = (x + 0.5) / 32.0 - 0.5, py = (y + 0.5) / 32.0 - 0.5;
      bool in = px >= -0.125 && px < 0.125 && py >= -0.25 && py < 0.25;
      CHECK(cells.test(x, y) == in);
    }
}

TEST_CASE("convolution plan matches one-shot convolve") {
  std::mt19937_64 rng(77);
  Lattice lat{0, -6};
  DiscreteMeasure mu = circle_measure(-3, lat);
  ConvolutionPlan plan(mu, lat);
  for (int trial = 0; trial < 5; ++trial) {
    GranularFunction f = random_center_blob(lat, rng, 30);
    GranularFunction a = plan.apply(f);
    GranularFunction b = convolve(mu, f);
    a -= b;
    CHECK(sup_norm(a) <= 1e-12);
  }
}
