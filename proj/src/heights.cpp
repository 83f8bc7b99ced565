#include "lacmax/heights.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace lacmax {

int critical_height(int k, double gamma, double alpha, int d, double c_iter) {
  long long base = k * (d - 1) - std::llround(std::log2(gamma) - std::log2(alpha));
  return int(base - (long long)std::ceil(c_iter * lll2(1.0 / alpha)));
}

int height_top(int k, double gamma, double alpha, int d) {
  long long base = k * (d - 1) - std::llround(std::log2(gamma) - std::log2(alpha));
  return int(base + (long long)std::ceil(lll2(1.0 / alpha)));
}

namespace {

struct GrainInterval {
  double lo = 0.0, hi = 0.0;  // angle interval (not wrapped)
  int istar = 0;              // heavy for all heights i <= istar
};

// Per-piece machinery shared by the height projections: for every grain, the
// list of cap intervals of those (scale, direction) rectangles that contain
// it, with the largest height at which they are heavy.
struct HeightsEngine {
  const DensityPiece& piece;
  const ExceptionalConfig& cfg;
  ScaleLadder ladder;
  CircleSampler sampler;
  std::vector<std::tuple<int, int, double>> grains;  // (gx, gy, value)
  std::vector<std::vector<GrainInterval>> intervals;  // per grain

  HeightsEngine(const DensityPiece& p, const ExceptionalConfig& c)
      : piece(p), cfg(c), ladder(scale_ladder(c)), sampler(c.k, p.fn.lattice()) {
    const Lattice& lat = p.fn.lattice();
    double delta = lat.delta();
    GridSet supp = p.fn.support();
    int x0, y0, x1, y1;
    if (supp.bounding_box(x0, y0, x1, y1)) {
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          double v = p.fn.at(x, y);
          if (v != 0.0) grains.push_back({x, y, v});
        }
    }
    intervals.resize(grains.size());
    if (ladder.top_index() < 1) return;
    std::vector<DirScaleRects> dsr = rect_masses(p, ladder, c.knobs);
    for (const auto& ds : dsr) {
      double width = cfg.knobs.c_width * ds.c_short / ds.c_long;
      double half = width / 2;
      double lgc = std::log2(ds.c_short * cfg.gamma);
      for (size_t g = 0; g < grains.size(); ++g) {
        auto [gx, gy, v] = grains[g];
        double px = (gx + 0.5) * delta, py = (gy + 0.5) * delta;
        double u = px * ds.dir.ux() + py * ds.dir.uy();
        double w = -px * ds.dir.uy() + py * ds.dir.ux();
        auto ab = std::make_pair(int64_t(std::floor(u / ds.c_short + 0.5)),
                                 int64_t(std::floor(w / ds.c_long + 0.5)));
        auto it = ds.mass.find(ab);
        if (it == ds.mass.end() || it->second <= 0.0) continue;
        // heavy at height i iff mass >= c_short * 2^i * gamma
        int istar = int(std::floor(std::log2(it->second) - lgc));
        intervals[g].push_back({ds.dir.angle - half, ds.dir.angle + half, istar});
        intervals[g].push_back({ds.dir.angle + std::numbers::pi - half,
                                ds.dir.angle + std::numbers::pi + half, istar});
      }
    }
  }

  std::vector<std::pair<double, double>> intervals_at(size_t g, int i) const {
    std::vector<std::pair<double, double>> iv;
    for (const auto& gi : intervals[g])
      if (gi.istar >= i) iv.push_back({gi.lo, gi.hi});
    return iv;
  }

  mutable std::vector<int> hmax_scratch;
  mutable std::vector<int> touched_scratch;

  // scatter contributions of one grain into per-atom max-height buckets:
  // calls emit(sample index, hmax) for every covered sample, in sample order
  template <typename Emit>
  void per_atom_heights(size_t g, Emit&& emit) const {
    const auto& angs = sampler.angles();
    int P = sampler.sample_count();
    hmax_scratch.assign(P, INT_MIN);
    touched_scratch.clear();
    auto mark = [&](int p, int istar) {
      if (hmax_scratch[p] == INT_MIN) touched_scratch.push_back(p);
      hmax_scratch[p] = std::max(hmax_scratch[p], istar);
    };
    for (const auto& gi : intervals[g]) {
      double len = gi.hi - gi.lo;
      if (len >= 2 * std::numbers::pi) {
        for (int p = 0; p < P; ++p) mark(p, gi.istar);
        continue;
      }
      double a = std::fmod(gi.lo, 2 * std::numbers::pi);
      if (a < 0) a += 2 * std::numbers::pi;
      double b = a + len;
      auto scan = [&](double lo, double hi) {
        auto first = std::lower_bound(angs.begin(), angs.end(), lo);
        for (auto it = first; it != angs.end() && *it <= hi; ++it)
          mark(int(it - angs.begin()), gi.istar);
      };
      if (b <= 2 * std::numbers::pi) {
        scan(a, b);
      } else {
        scan(a, 2 * std::numbers::pi);
        scan(0.0, b - 2 * std::numbers::pi);
      }
    }
    std::sort(touched_scratch.begin(), touched_scratch.end());
    for (int p : touched_scratch) emit(p, hmax_scratch[p]);
  }
};

}  // namespace

GrainCapMeasure grain_cap(int gx, int gy, int i, const DensityPiece& piece,
                          const ExceptionalConfig& cfg) {
  if (piece.fn.at(gx, gy) <= 0.0)
    throw std::invalid_argument("grain_cap: grain not in the piece support");
  HeightsEngine eng(piece, cfg);
  GrainCapMeasure out;
  out.gx = gx;
  out.gy = gy;
  out.height_index = i;
  size_t g = 0;
  for (; g < eng.grains.size(); ++g)
    if (std::get<0>(eng.grains[g]) == gx && std::get<1>(eng.grains[g]) == gy) break;
  out.measure = eng.sampler.select(eng.intervals_at(g, i), &out.theta);
  return out;
}

GranularFunction height_projection(const DensityPiece& piece, int i,
                                   const ExceptionalConfig& cfg) {
  HeightsEngine eng(piece, cfg);
  GranularFunction out(piece.fn.lattice());
  int n = out.n();
  const auto& offs = eng.sampler.offsets();
  double w0 = eng.sampler.sample_weight();
  for (size_t g = 0; g < eng.grains.size(); ++g) {
    auto [gx, gy, v] = eng.grains[g];
    eng.per_atom_heights(g, [&](int p, int h) {
      if (h < i) return;
      int x = gx + offs[p].dx, y = gy + offs[p].dy;
      if (x >= 0 && x < n && y >= 0 && y < n) out.at(x, y) += w0 * v;
    });
  }
  return out;
}

HeightDecomposition telescope(const DensityPiece& piece, const ExceptionalConfig& cfg) {
  HeightDecomposition dec;
  dec.m = critical_height(cfg.k, cfg.gamma, cfg.alpha, cfg.d, cfg.knobs.c_iter);
  dec.i_top = height_top(cfg.k, cfg.gamma, cfg.alpha, cfg.d);
  dec.sigma_conv = spherical_mean(piece.fn, cfg.k);
  const Lattice& lat = piece.fn.lattice();
  int nband = std::max(0, dec.i_top - dec.m);
  dec.intermediates.assign(nband, GranularFunction(lat));
  dec.heavy_tail = GranularFunction(lat);
  GranularFunction gm(lat);  // g^m
  HeightsEngine eng(piece, cfg);
  const auto& offs = eng.sampler.offsets();
  double w0 = eng.sampler.sample_weight();
  int n = lat.n();
  for (size_t g = 0; g < eng.grains.size(); ++g) {
    auto [gx, gy, v] = eng.grains[g];
    eng.per_atom_heights(g, [&](int p, int h) {
      if (h < dec.m) return;
      int x = gx + offs[p].dx, y = gy + offs[p].dy;
      if (x < 0 || x >= n || y < 0 || y >= n) return;
      double c = w0 * v;
      gm.at(x, y) += c;
      if (h >= dec.i_top)
        dec.heavy_tail.at(x, y) += c;
      else
        dec.intermediates[h - dec.m].at(x, y) += c;
    });
  }
  dec.light = dec.sigma_conv;
  dec.light -= gm;
  return dec;
}

L1Report l1_intermediate(const DensityPiece& piece, const ExceptionalConfig& cfg,
                         ScaleRange range) {
  if (range.k_min > range.k_max)
    throw std::invalid_argument("l1_intermediate: empty scale range");
  L1Report rep;
  double fmass = mass(piece.fn);
  if (fmass <= 0.0) return rep;
  double total = 0.0;
  for (int k = std::max(0, range.k_min); k <= range.k_max; ++k) {
    ExceptionalConfig ck = cfg;
    ck.k = k;
    if (regime_partition(k, ck) != Regime::K2) continue;
    HeightDecomposition dec = telescope(piece, ck);
    for (size_t j = 0; j < dec.intermediates.size(); ++j) {
      double mj = mass(dec.intermediates[j]);  // nonnegative terms
      total += mj;
      if (rep.per_offset.size() <= j) rep.per_offset.resize(j + 1, 0.0);
      rep.per_offset[j] += mj;
    }
  }
  for (double& x : rep.per_offset) x /= fmass;
  rep.total_ratio = total / (iterated_log(3, 1.0 / cfg.alpha) * fmass);
  return rep;
}

double l2_light(const DensityPiece& piece, const ExceptionalConfig& cfg) {
  double fmass = mass(piece.fn);
  if (fmass <= 0.0) return 0.0;
  HeightDecomposition dec = telescope(piece, cfg);
  double ll = ll2(1.0 / cfg.alpha);
  return l2_norm_sq(dec.light) * ll * ll / (cfg.alpha * fmass);
}

double l2_global_scale_bound(const DensityPiece& piece, const ExceptionalConfig& cfg) {
  double fmass = mass(piece.fn);
  if (fmass <= 0.0) return 0.0;
  GranularFunction conv = spherical_mean(piece.fn, cfg.k);
  return l2_norm_sq(conv) * std::exp2(double(cfg.k) * (cfg.d - 1)) /
         (cfg.gamma * std::log2(1.0 / cfg.alpha) * fmass);
}

void save_heights_csv(const std::vector<HeightsRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "k,gamma,m,i_top,light_l2_ratio,heavy_support_contained,per_j_l1_ratios\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%d,%d,%.12g,%d,", r.k, r.gamma, r.m,
                  r.i_top, r.light_l2_ratio, r.heavy_contained ? 1 : 0);
    f << buf;
    for (size_t j = 0; j < r.per_j_l1.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.12g", j ? ";" : "", r.per_j_l1[j]);
      f << buf;
    }
    f << "\n";
  }
}

}  // namespace lacmax
