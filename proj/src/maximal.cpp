#include "lacmax/maximal.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <tuple>

namespace lacmax {

namespace {

// one plan per (k, lattice); the suite revisits the same handful of scales
const ConvolutionPlan& circle_plan(int k, const Lattice& lat) {
  static std::map<std::tuple<int, int, int>, std::unique_ptr<ConvolutionPlan>> cache;
  auto key = std::make_tuple(k, lat.log2_len, lat.log2_grain);
  auto it = cache.find(key);
  if (it == cache.end()) {
    if (cache.size() > 24) cache.clear();
    it = cache.emplace(key, std::make_unique<ConvolutionPlan>(circle_measure(k, lat), lat))
             .first;
  }
  return *it->second;
}

}  // namespace

GranularFunction spherical_mean(const GranularFunction& f, int k) {
  return circle_plan(k, f.lattice()).apply(f);
}

GranularFunction lacunary_maximal(const GranularFunction& f, ScaleRange range) {
  if (range.k_min > range.k_max)
    throw std::invalid_argument("lacunary_maximal: empty scale range");
  GranularFunction out(f.lattice());
  for (int k = range.k_min; k <= range.k_max; ++k) {
    GranularFunction ak = spherical_mean(f, k);
    auto& o = out.values();
    const auto& a = ak.values();
    for (size_t i = 0; i < o.size(); ++i) o[i] = std::max(o[i], std::fabs(a[i]));
  }
  return out;
}

GranularFunction hardy_littlewood(const GranularFunction& f) {
  const Lattice& lat = f.lattice();
  int levels = lat.levels();
  int n = lat.n();
  // cube sums, finest to coarsest
  std::vector<std::vector<double>> sums(levels + 1);
  sums[levels].resize(size_t(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) sums[levels][size_t(y) * n + x] = std::fabs(f.at(x, y));
  for (int lev = levels - 1; lev >= 0; --lev) {
    int m = 1 << lev, mc = m * 2;
    sums[lev].resize(size_t(m) * m);
    const auto& ch = sums[lev + 1];
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x)
        sums[lev][size_t(y) * m + x] = ch[size_t(2 * y) * mc + 2 * x] +
                                       ch[size_t(2 * y) * mc + 2 * x + 1] +
                                       ch[size_t(2 * y + 1) * mc + 2 * x] +
                                       ch[size_t(2 * y + 1) * mc + 2 * x + 1];
  }
  // push best ancestor average down; averages are per-cell counts, the
  // delta^2 factors cancel
  std::vector<double> best(1, sums[0][0] / (double(n) * n));
  for (int lev = 1; lev <= levels; ++lev) {
    int m = 1 << lev;
    int cells = (n >> lev) * (n >> lev);
    std::vector<double> cur(size_t(m) * m);
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x)
        cur[size_t(y) * m + x] = std::max(best[size_t(y / 2) * (m / 2) + x / 2],
                                          sums[lev][size_t(y) * m + x] / cells);
    best = std::move(cur);
  }
  GranularFunction out(lat);
  out.values() = std::move(best);
  return out;
}

GridSet superlevel(const GranularFunction& g, double alpha) {
  if (!(alpha > 0)) throw std::domain_error("superlevel: alpha must be > 0");
  GridSet s(g.lattice());
  int n = g.n();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (g.at(x, y) > alpha) s.set(x, y);
  return s;
}

}  // namespace lacmax
