#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lacmax/grid.hpp"

using namespace lacmax;

namespace {

// independent top-down quadtree construction of the maximal cover, used as
// the oracle against the bottom-up implementation
void quadtree_cover(const GridSet& e, const DyadicCube& q, std::vector<DyadicCube>& out) {
  const Lattice& lat = e.lattice();
  bool any = false, all = true;
  int s = q.side_cells(lat);
  for (int y = q.y0(lat); y < q.y0(lat) + s; ++y)
    for (int x = q.x0(lat); x < q.x0(lat) + s; ++x) {
      if (e.test(x, y)) any = true;
      else all = false;
    }
  if (!any) return;
  if (all) {
    out.push_back(q);
    return;
  }
  if (q.level == lat.levels()) return;
  for (int cy = 0; cy < 2; ++cy)
    for (int cx = 0; cx < 2; ++cx)
      quadtree_cover(e, {q.level + 1, 2 * q.ix + cx, 2 * q.iy + cy}, out);
}

GridSet random_set(const Lattice& lat, std::mt19937_64& rng, int count) {
  GridSet s(lat);
  int n = lat.n();
  for (int i = 0; i < count; ++i) s.set(int(rng() % n), int(rng() % n));
  return s;
}

}  // namespace

TEST_CASE("iterated_log closed forms") {
  CHECK(iterated_log(1, 28) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(iterated_log(1, 0) == doctest::Approx(std::log2(100.0)).epsilon(1e-12));
  // the inner 100+ is the one from Log's own definition
  CHECK(iterated_log(2, 28) == doctest::Approx(std::log2(107.0)).epsilon(1e-12));
  CHECK_THROWS_AS(iterated_log(0, 1.0), std::domain_error);
  CHECK_THROWS_AS(iterated_log(1, -0.5), std::domain_error);
}

TEST_CASE("iterated_log monotone in t") {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 200; ++trial) {
      double t1 = double(rng() % 1000000) / 1000.0;
      double t2 = t1 + 0.001 + double(rng() % 1000);
      CHECK(iterated_log(n, t1) < iterated_log(n, t2));
    }
  CHECK(iterated_log(3, 0.0) >= std::log2(100.0));
}

TEST_CASE("mass closed forms") {
  Lattice lat{0, -2};  // [0,1)^2, delta = 1/4
  GranularFunction f(lat);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) f.at(x, y) = 1.0;
  CHECK(mass(f) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mass(GranularFunction(lat)) == 0.0);

  Lattice lat8{0, -3};
  GranularFunction g(lat8);
  g.at(3, 5) = 0.5;
  CHECK(mass(g) == doctest::Approx(0.5 / 64.0).epsilon(1e-15));
}

TEST_CASE("maximal_dyadic_cover basic shapes") {
  Lattice lat{0, -3};
  GridSet full(lat);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) full.set(x, y);
  auto cover = maximal_dyadic_cover(full);
  REQUIRE(cover.size() == 1);
  CHECK(cover[0].level == 0);

  GridSet empty(lat);
  CHECK(maximal_dyadic_cover(empty).empty());

  // three of the four quadrants
  GridSet three(lat);
  three.set_cube({1, 0, 0});
  three.set_cube({1, 1, 0});
  three.set_cube({1, 0, 1});
  auto c3 = maximal_dyadic_cover(three);
  CHECK(c3.size() == 3);
  for (const auto& q : c3) CHECK(q.level == 1);
}

TEST_CASE("cover partitions and matches the quadtree oracle") {
  Lattice lat{0, -6};
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    GridSet e = random_set(lat, rng, 17 + int(rng() % 200));
    auto cover = maximal_dyadic_cover(e);
    // partition: disjoint and union = e
    GridSet acc(lat);
    for (const auto& q : cover) {
      GridSet c(lat);
      c.set_cube(q);
      CHECK((acc & c).empty());
      acc |= c;
      // parent not fully inside
      if (q.level > 0) {
        DyadicCube par{q.level - 1, q.ix / 2, q.iy / 2};
        CHECK(!e.cube_inside(par));
      }
    }
    CHECK(acc == e);
    // oracle comparison
    std::vector<DyadicCube> oracle;
    quadtree_cover(e, {0, 0, 0}, oracle);
    double len = 0.0;
    for (const auto& q : oracle) len += q.side(lat);
    CHECK(length_of(e) == doctest::Approx(len).epsilon(1e-12));
    CHECK(cover.size() == oracle.size());
  }
}

TEST_CASE("length_of closed forms") {
  Lattice lat{0, -4};
  GridSet full(lat);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) full.set(x, y);
  CHECK(length_of(full) == doctest::Approx(1.0));
  GridSet two(lat);
  two.set_cube({1, 0, 0});
  two.set_cube({1, 1, 1});
  CHECK(length_of(two) == doctest::Approx(1.0));
  // subadditive over disjoint unions
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    GridSet a = random_set(lat, rng, 20);
    GridSet b = random_set(lat, rng, 20);
    b -= a;
    CHECK(length_of(a | b) <= length_of(a) + length_of(b) + 1e-12);
  }
}

TEST_CASE("set algebra measure identities") {
  Lattice lat{0, -6};
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    GridSet a = random_set(lat, rng, 100);
    GridSet b = random_set(lat, rng, 100);
    CHECK((a | b).popcount() + (a & b).popcount() == a.popcount() + b.popcount());
    CHECK((a | b).measure() + (a & b).measure() == a.measure() + b.measure());
    CHECK((a - b).popcount() + (a & b).popcount() == a.popcount());
    CHECK(a.subset_of(a | b));
    CHECK((a & b).subset_of(a));
    CHECK(a.complement().popcount() == int64_t(64) * 64 - a.popcount());
  }
}

TEST_CASE("dilate matches per-cell shifting") {
  Lattice lat{0, -5};
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    GridSet a = random_set(lat, rng, 30);
    std::vector<CellOffset> offs;
    for (int i = 0; i < 5; ++i)
      offs.push_back({int(rng() % 19) - 9, int(rng() % 19) - 9});
    GridSet d = a.dilate(offs);
    GridSet ref(lat);
    int n = lat.n();
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        if (!a.test(x, y)) continue;
        for (const auto& o : offs) {
          int nx = x + o.dx, ny = y + o.dy;
          if (nx >= 0 && nx < n && ny >= 0 && ny < n) ref.set(nx, ny);
        }
      }
    CHECK(d == ref);
  }
}

TEST_CASE("pgm round trip") {
  Lattice lat{0, -5};
  std::mt19937_64 rng(9);
  GridSet a = random_set(lat, rng, 77);
  save_pgm(a, "test_grid_tmp.pgm");
  GridSet b = load_pgm("test_grid_tmp.pgm");
  CHECK(a == b);
  std::remove("test_grid_tmp.pgm");
}

TEST_CASE("function csv round trip") {
  Lattice lat{1, -4};
  GranularFunction f(lat);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 40; ++i)
    f.at(int(rng() % f.n()), int(rng() % f.n())) = double(rng() % 1000) / 1000.0;
  save_function_csv(f, "test_grid_tmp.csv", "test_grid_tmp.json");
  GranularFunction g = load_function_csv("test_grid_tmp.csv", "test_grid_tmp.json");
  CHECK(g.lattice() == f.lattice());
  CHECK(sup_norm([&] {
          GranularFunction d = f;
          d -= g;
          return d;
        }()) == 0.0);
  std::remove("test_grid_tmp.csv");
  std::remove("test_grid_tmp.json");
}
