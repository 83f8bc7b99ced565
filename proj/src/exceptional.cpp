#include "lacmax/exceptional.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "lacmax/cz.hpp"

namespace lacmax {

double log2_clamped(double t) { return std::log2(std::max(t, 2.0)); }
double ll2(double inv_alpha) { return log2_clamped(std::log2(inv_alpha)); }
double lll2(double inv_alpha) { return log2_clamped(ll2(inv_alpha)); }

double ExceptionalConfig::log2_rstar() const {
  double lq = std::log2(l_q());
  double gb = (std::log2(gamma) - std::log2(alpha)) / (d - 1);
  return std::max(lq, gb);
}

ScaleLadder scale_ladder(const ExceptionalConfig& cfg) {
  if (!(cfg.alpha > 0 && cfg.alpha < 1) || !(cfg.gamma > 0))
    throw std::domain_error("scale_ladder: bad alpha or gamma");
  double er = cfg.log2_rstar();
  double e0 = std::log2(cfg.gamma) / (cfg.d - 1);
  if (cfg.k < er - 1e-9)
    throw std::domain_error("scale_ladder: need 2^k >= max(l(q), (gamma/alpha)^(1/(d-1)))");
  double stop = std::log2(cfg.knobs.c_stop) + er;
  ScaleLadder lad;
  lad.log2_rstar = er;
  lad.rstar = std::exp2(er);
  double e = e0;
  lad.log2_c.push_back(e);
  while (e < stop) {
    e = (e + er) / 2;
    lad.log2_c.push_back(e);
    if (lad.log2_c.size() > 200)
      throw std::runtime_error("scale_ladder: runaway ladder");
  }
  for (double le : lad.log2_c) lad.c.push_back(std::exp2(le));
  return lad;
}

double ladder_closed_form_log2(double log2_c0, double log2_rstar, int j) {
  return log2_rstar + std::ldexp(log2_c0 - log2_rstar, -j);
}

std::vector<Direction> direction_net(double c_hi, double c_lo, int d) {
  if (!(c_lo < c_hi)) throw std::invalid_argument("direction_net: need c_lo < c_hi");
  (void)d;
  int count = int(std::ceil(c_hi / c_lo - 1e-12));
  std::vector<Direction> dirs;
  dirs.reserve(count);
  for (int t = 0; t < count; ++t) dirs.push_back({std::numbers::pi * t / count});
  return dirs;
}

namespace {

std::pair<int64_t, int64_t> grid_index(double px, double py, const Direction& dir,
                                       double c_short, double c_long) {
  double u = px * dir.ux() + py * dir.uy();
  double v = -px * dir.uy() + py * dir.ux();
  return {int64_t(std::floor(u / c_short + 0.5)), int64_t(std::floor(v / c_long + 0.5))};
}

OrientedRect grid_rect(std::pair<int64_t, int64_t> ab, const Direction& dir,
                       double c_short, double c_long) {
  OrientedRect r;
  double cu = ab.first * c_short, cv = ab.second * c_long;
  r.cx = cu * dir.ux() - cv * dir.uy();
  r.cy = cu * dir.uy() + cv * dir.ux();
  r.dir = dir;
  r.short_side = c_short;
  r.long_side = c_long;
  return r;
}

}  // namespace

std::vector<DirScaleRects> rect_masses(const DensityPiece& piece,
                                       const ScaleLadder& ladder,
                                       const ExceptionalKnobs& knobs) {
  (void)knobs;
  std::vector<DirScaleRects> out;
  const Lattice& lat = piece.fn.lattice();
  double delta = lat.delta();
  double area = lat.cell_area();
  GridSet supp = piece.fn.support();
  int x0, y0, x1, y1;
  bool nonempty = supp.bounding_box(x0, y0, x1, y1);
  for (int i = 1; i <= ladder.top_index(); ++i) {
    double c_short = ladder.c[i - 1], c_long = ladder.c[i];
    for (const Direction& dir : direction_net(c_long, c_short)) {
      DirScaleRects dsr;
      dsr.i = i;
      dsr.dir = dir;
      dsr.c_short = c_short;
      dsr.c_long = c_long;
      if (nonempty) {
        for (int y = y0; y <= y1; ++y)
          for (int x = x0; x <= x1; ++x) {
            double v = piece.fn.at(x, y);
            if (v == 0.0) continue;
            auto ab = grid_index((x + 0.5) * delta, (y + 0.5) * delta, dir, c_short, c_long);
            dsr.mass[ab] += v * area;
          }
      }
      out.push_back(std::move(dsr));
    }
  }
  return out;
}

HeavyRectSet heavy_rectangles(const DensityPiece& piece, Direction phi, int i,
                              const ScaleLadder& ladder, const ExceptionalConfig& cfg) {
  if (i < 1 || i > ladder.top_index())
    throw std::invalid_argument("heavy_rectangles: scale index out of range");
  double c_short = ladder.c[i - 1], c_long = ladder.c[i];
  HeavyRectSet hs;
  hs.dir = phi;
  hs.i = i;
  hs.threshold = c_short * cfg.height * cfg.gamma;
  const Lattice& lat = piece.fn.lattice();
  double delta = lat.delta();
  double area = lat.cell_area();
  GridSet supp = piece.fn.support();
  int x0, y0, x1, y1;
  if (!supp.bounding_box(x0, y0, x1, y1)) return hs;
  std::map<std::pair<int64_t, int64_t>, double> acc;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      double v = piece.fn.at(x, y);
      if (v == 0.0) continue;
      acc[grid_index((x + 0.5) * delta, (y + 0.5) * delta, phi, c_short, c_long)] +=
          v * area;
    }
  for (const auto& [ab, m] : acc)
    if (m >= hs.threshold) {
      hs.rects.push_back(grid_rect(ab, phi, c_short, c_long));
      hs.masses.push_back(m);
    }
  return hs;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Minkowski support of (antipodal cap pair) * chi_{dilated rect}, exact atom
// path: OR of the rect raster shifted by every selected atom offset.
void or_shifted(GridSet& acc, const GridSet& base, const std::vector<CellOffset>& offs) {
  acc |= base.dilate(offs);
}

// conservative annular-sector superset of the same support, for caps too wide
// or too costly to enumerate atom by atom
void rasterize_sector(GridSet& acc, const Lattice& lat, double cx, double cy,
                      double radius, double rad_pad, double phi, double half_ang) {
  int n = lat.n();
  double delta = lat.delta();
  double rmax = radius + rad_pad;
  double rmin = std::max(0.0, radius - rad_pad);
  int ix0 = std::max(0, int(std::floor((cx - rmax) / delta)));
  int ix1 = std::min(n - 1, int(std::floor((cx + rmax) / delta)));
  int iy0 = std::max(0, int(std::floor((cy - rmax) / delta)));
  int iy1 = std::min(n - 1, int(std::floor((cy + rmax) / delta)));
  bool all_angles = half_ang >= std::numbers::pi / 2;
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x) {
      double px = (x + 0.5) * delta - cx;
      double py = (y + 0.5) * delta - cy;
      double r = std::hypot(px, py);
      if (r < rmin - delta || r > rmax + delta) continue;
      if (!all_angles) {
        double ang = std::atan2(py, px);
        // unsigned distance to the line direction phi (antipodal pair)
        double dd = std::fabs(std::remainder(ang - phi, std::numbers::pi));
        if (dd > half_ang) continue;
      }
      acc.set(x, y);
    }
}

}  // namespace

GridSet exceptional_set(const DensityPiece& piece, const ExceptionalConfig& cfg) {
  const Lattice& lat = piece.fn.lattice();
  GridSet s(lat);
  ScaleLadder ladder = scale_ladder(cfg);
  if (ladder.top_index() < 1) return s;
  CircleSampler sampler(cfg.k, lat);
  double radius = sampler.radius();
  for (int i = 1; i <= ladder.top_index(); ++i) {
    double c_short = ladder.c[i - 1], c_long = ladder.c[i];
    double width = cfg.knobs.c_width * c_short / c_long;
    bool arc_resolved = radius * std::min(width, kTwoPi) >= 4 * lat.delta();
    for (const Direction& dir : direction_net(c_long, c_short)) {
      HeavyRectSet heavy = heavy_rectangles(piece, dir, i, ladder, cfg);
      if (heavy.rects.empty()) continue;
      std::vector<CellOffset> atoms;
      if (arc_resolved) {
        DiscreteMeasure cap = sampler.select(
            {{dir.angle - width / 2, dir.angle + width / 2},
             {dir.angle + std::numbers::pi - width / 2,
              dir.angle + std::numbers::pi + width / 2}});
        atoms = cap.cells;
      }
      for (const auto& rect : heavy.rects) {
        OrientedRect big = rect.dilated(cfg.knobs.c_dilate);
        double halfdiag = std::hypot(big.short_side, big.long_side) / 2;
        double rect_cells = (big.short_side / lat.delta() + 1) *
                            (big.long_side / lat.delta() + 1);
        bool atom_path = arc_resolved && atoms.size() * rect_cells < 4e7;
        if (atom_path) {
          or_shifted(s, big.rasterize(lat), atoms);
        } else {
          double rad_pad = halfdiag + 2 * lat.delta();
          double fat = std::asin(std::min(1.0, rad_pad / std::max(radius - rad_pad,
                                                                  lat.delta())));
          rasterize_sector(s, lat, rect.cx, rect.cy, radius, rad_pad, dir.angle,
                           std::min(width / 2 + fat, std::numbers::pi));
        }
      }
    }
  }
  return s;
}

double size_lemma_ratio(const DensityPiece& piece, const ExceptionalConfig& cfg) {
  if (piece.lambda <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  GridSet s = exceptional_set(piece, cfg);
  return s.measure() * cfg.height /
         (std::exp2(double(cfg.k) * (cfg.d - 1)) * piece.lambda);
}

Regime regime_partition(int k, const ExceptionalConfig& cfg) {
  if (k < 0) throw std::domain_error("regime_partition: k must be >= 0");
  double kd = double(k) * (cfg.d - 1);
  double a = std::log2(cfg.l_q()) * (cfg.d - 1);
  double b = std::log2(cfg.gamma) - std::log2(cfg.alpha);
  if (kd < std::max(a, b)) return Regime::K1;
  if (kd <= b + cfg.knobs.c_k2 * ll2(1.0 / cfg.alpha)) return Regime::K2;
  return Regime::K3;
}

RegimeReport regime_exceptional(const GranularFunction& f, double alpha,
                                const ExceptionalKnobs& knobs, ScaleRange range) {
  const Lattice& lat = f.lattice();
  RegimeReport rep;
  rep.a_set = GridSet(lat);
  double total_mass = mass(f);
  GridSet omega = superlevel(hardy_littlewood(f), alpha);
  if (omega.empty()) return rep;
  std::vector<WhitneyCube> cubes = whitney(omega);
  int kmin = std::max(0, std::max(range.k_min, lat.log2_grain + 3));
  int q_id = 0;
  for (const auto& wq : cubes) {
    GranularFunction fq = f;
    GridSet qset(lat);
    qset.set_cube(wq.cube);
    fq.restrict_to(qset);
    if (mass(fq) == 0.0) {
      ++q_id;
      continue;
    }
    DensityLadder lad = gamma_ladder(alpha, wq.cube.side(lat), 2);
    std::vector<DensityPiece> pieces = decompose(fq, wq.cube, lad);
    for (const auto& piece : pieces) {
      if (piece.j == 0 || mass(piece.fn) == 0.0) continue;
      for (int k = kmin; k <= range.k_max; ++k) {
        ExceptionalConfig cfg;
        cfg.alpha = alpha;
        cfg.gamma = piece.gamma;
        cfg.k = k;
        cfg.q = wq.cube;
        cfg.lat = lat;
        cfg.knobs = knobs;
        Regime reg = regime_partition(k, cfg);
        RegimeRow row;
        row.q_id = q_id;
        row.k = k;
        row.gamma = piece.gamma;
        row.regime = reg == Regime::K1 ? 1 : reg == Regime::K2 ? 2 : 3;
        if (reg == Regime::K1) {
          DiscreteMeasure mu = circle_measure(k, lat);
          GridSet sup = piece.fn.support().dilate(mu.cells);
          row.s_measure = sup.measure();
          rep.a_set |= sup;
        } else if (reg == Regime::K2) {
          cfg.height = std::exp2(double(k) * (cfg.d - 1)) * alpha / piece.gamma *
                       ll2(1.0 / alpha);
          row.height = cfg.height;
          ScaleLadder sl = scale_ladder(cfg);
          row.n_scales = sl.top_index();
          GridSet s = exceptional_set(piece, cfg);
          for (int i = 1; i <= sl.top_index(); ++i)
            for (const Direction& dir : direction_net(sl.c[i], sl.c[i - 1]))
              row.n_heavy += int(heavy_rectangles(piece, dir, i, sl, cfg).rects.size());
          row.s_measure = s.measure();
          row.ratio = piece.lambda > 0
                          ? s.measure() * cfg.height /
                                (std::exp2(double(k) * (cfg.d - 1)) * piece.lambda)
                          : std::numeric_limits<double>::quiet_NaN();
          rep.a_set |= s;
        }
        rep.rows.push_back(row);
      }
    }
    ++q_id;
  }
  rep.measure = rep.a_set.measure();
  rep.ratio = total_mass > 0 ? rep.measure * alpha / total_mass : 0.0;
  return rep;
}

void save_regime_csv(const RegimeReport& rep, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "q_id,k,gamma,M,regime,N_scales,n_heavy,S_measure,ratio\n";
  char buf[192];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%d,%d,%d,%.12g,%.12g\n", r.q_id,
                  r.k, r.gamma, r.height, r.regime, r.n_scales, r.n_heavy, r.s_measure,
                  r.ratio);
    f << buf;
  }
}

}  // namespace lacmax
