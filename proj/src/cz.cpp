#include "lacmax/cz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>

namespace lacmax {

namespace {

// squared set-to-set distance in cells between the cube [x0,x1]x[y0,y1] and
// cell (cx,cy); 0 for touching or overlapping blocks
int64_t gap_sq(int x0, int y0, int x1, int y1, int cx, int cy) {
  int gx = 0, gy = 0;
  if (cx < x0) gx = x0 - cx - 1;
  else if (cx > x1) gx = cx - x1 - 1;
  if (cy < y0) gy = y0 - cy - 1;
  else if (cy > y1) gy = cy - y1 - 1;
  return int64_t(gx) * gx + int64_t(gy) * gy;
}

// min squared distance from the cube to a complement cell, scanning a window
// of w cells around the cube; returns INT64_MAX if none in the window
int64_t min_gap_sq(const GridSet& omega, int x0, int y0, int x1, int y1, int w,
                   int64_t early_stop_below) {
  int n = omega.n();
  int64_t best = INT64_MAX;
  int wx0 = std::max(0, x0 - w), wx1 = std::min(n - 1, x1 + w);
  int wy0 = std::max(0, y0 - w), wy1 = std::min(n - 1, y1 + w);
  for (int y = wy0; y <= wy1; ++y)
    for (int x = wx0; x <= wx1; ++x) {
      if (omega.test(x, y)) continue;
      int64_t g = gap_sq(x0, y0, x1, y1, x, y);
      if (g < best) {
        best = g;
        if (best < early_stop_below) return best;
      }
    }
  // domain boundary does not count as complement: Omega is a subset of the
  // domain and its complement within the domain is what the paper's Omega^c
  // means here (supports are padded away from the boundary)
  return best;
}

}  // namespace

std::vector<WhitneyCube> whitney(const GridSet& omega) {
  const Lattice& lat = omega.lattice();
  int levels = lat.levels();
  int n = lat.n();
  if (omega.popcount() == int64_t(n) * n)
    throw std::domain_error("whitney: Omega must have nonempty complement");
  std::vector<WhitneyCube> out;
  if (omega.empty()) return out;

  // allin[lev]: cube fully inside Omega; blocked[lev]: an ancestor was taken
  std::vector<std::vector<uint8_t>> allin(levels + 1);
  allin[levels].resize(size_t(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) allin[levels][size_t(y) * n + x] = omega.test(x, y);
  for (int lev = levels - 1; lev >= 0; --lev) {
    int m = 1 << lev, mc = m * 2;
    allin[lev].resize(size_t(m) * m);
    const auto& ch = allin[lev + 1];
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x)
        allin[lev][size_t(y) * m + x] = ch[size_t(2 * y) * mc + 2 * x] &&
                                        ch[size_t(2 * y) * mc + 2 * x + 1] &&
                                        ch[size_t(2 * y + 1) * mc + 2 * x] &&
                                        ch[size_t(2 * y + 1) * mc + 2 * x + 1];
  }

  std::vector<uint8_t> blocked(1, 0);
  double delta = lat.delta();
  for (int lev = 0; lev <= levels; ++lev) {
    int m = 1 << lev;
    int s = n >> lev;  // side in cells
    std::vector<uint8_t> taken(size_t(m) * m, 0);
    int64_t diam_sq = 2 * int64_t(s) * s;
    // window radius: anything at distance > 4*diam is irrelevant
    int w = int(std::ceil(4.0 * std::sqrt(2.0) * s)) + 1;
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x) {
        size_t idx = size_t(y) * m + x;
        if (blocked[idx] || !allin[lev][idx]) continue;
        int x0 = x * s, y0 = y * s, x1 = x0 + s - 1, y1 = y0 + s - 1;
        if (lev < levels) {
          int64_t g = min_gap_sq(omega, x0, y0, x1, y1, w, diam_sq);
          if (g < diam_sq) continue;  // too close to the complement; subdivide
          out.push_back({{lev, x, y}, std::sqrt(double(g)) * delta, false});
        } else {
          // grain floor: take the remaining cell unconditionally.  Its parent
          // was rejected, so a complement cell exists within 4*diam.
          int64_t g = min_gap_sq(omega, x0, y0, x1, y1, w, 0);
          out.push_back({{lev, x, y}, std::sqrt(double(g)) * delta, g < diam_sq});
        }
        taken[idx] = 1;
      }
    if (lev < levels) {
      int mc = m * 2;
      std::vector<uint8_t> nb(size_t(mc) * mc);
      for (int y = 0; y < mc; ++y)
        for (int x = 0; x < mc; ++x) {
          size_t pidx = size_t(y / 2) * m + x / 2;
          nb[size_t(y) * mc + x] = blocked[pidx] || taken[pidx];
        }
      blocked = std::move(nb);
    }
  }
  return out;
}

void save_whitney_csv(const std::vector<WhitneyCube>& cubes, const Lattice& lat,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "level,i,j,dist\n";
  char buf[96];
  for (const auto& w : cubes) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.12g\n", w.cube.level, w.cube.ix,
                  w.cube.iy, w.dist);
    f << buf;
  }
}

bool whitney_invariants_ok(const std::vector<WhitneyCube>& cubes, const GridSet& omega) {
  const Lattice& lat = omega.lattice();
  GridSet acc(lat);
  for (const auto& w : cubes) {
    GridSet c(lat);
    c.set_cube(w.cube);
    if (!(acc & c).empty()) return false;  // overlap
    if (!c.subset_of(omega)) return false;
    acc |= c;
    double diam = w.cube.side(lat) * std::sqrt(2.0);
    if (!w.at_grain_floor && w.dist < diam * (1 - 1e-12)) return false;
    if (w.dist > 4 * diam * (1 + 1e-12)) return false;
  }
  return acc == omega;
}

namespace {

std::vector<std::pair<int, int>> monomials_upto(int degree) {
  std::vector<std::pair<int, int>> mono;
  for (int total = 0; total <= degree; ++total)
    for (int ax = total; ax >= 0; --ax) mono.push_back({ax, total - ax});
  return mono;
}

}  // namespace

PolyBasis::PolyBasis(int degree, int m) : degree_(degree), m_(m) {
  auto mono = monomials_upto(degree);
  size_t ncells = size_t(m) * m;
  double inv = 1.0 / double(ncells);
  // raw monomial values at cell centers of [-1/2, 1/2]^2
  std::vector<std::vector<double>> raw;
  for (auto [ax, ay] : mono) {
    std::vector<double> v(ncells);
    for (int y = 0; y < m; ++y) {
      double py = (y + 0.5) / m - 0.5;
      for (int x = 0; x < m; ++x) {
        double px = (x + 0.5) / m - 0.5;
        v[size_t(y) * m + x] = std::pow(px, ax) * std::pow(py, ay);
      }
    }
    raw.push_back(std::move(v));
  }
  // modified Gram-Schmidt under <u,v> = inv * sum(u v); drop dependent rows
  for (size_t j = 0; j < raw.size(); ++j) {
    std::vector<double> v = raw[j];
    std::vector<double> coef(raw.size(), 0.0);
    coef[j] = 1.0;
    double orig = 0.0;
    for (double t : v) orig += t * t;
    orig = std::sqrt(orig * inv);
    for (int pass = 0; pass < 2; ++pass)
      for (size_t b = 0; b < values_.size(); ++b) {
        double dot = 0.0;
        for (size_t i = 0; i < ncells; ++i) dot += v[i] * values_[b][i];
        dot *= inv;
        for (size_t i = 0; i < ncells; ++i) v[i] -= dot * values_[b][i];
        for (size_t c = 0; c < coef.size(); ++c) coef[c] -= dot * coeffs_[b][c];
      }
    double nrm = 0.0;
    for (double t : v) nrm += t * t;
    nrm = std::sqrt(nrm * inv);
    if (nrm <= 1e-10 * std::max(1.0, orig)) continue;  // dependent on this grid
    double s = 1.0 / nrm;
    for (double& t : v) t *= s;
    for (double& c : coef) c *= s;
    values_.push_back(std::move(v));
    coeffs_.push_back(std::move(coef));
  }
}

double PolyBasis::gram_defect() const {
  double inv = 1.0 / (double(m_) * m_);
  double worst = 0.0;
  for (size_t a = 0; a < values_.size(); ++a)
    for (size_t b = a; b < values_.size(); ++b) {
      double dot = 0.0;
      for (size_t i = 0; i < values_[a].size(); ++i) dot += values_[a][i] * values_[b][i];
      dot *= inv;
      worst = std::max(worst, std::fabs(dot - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

const PolyBasis& PolyBasis::get(int degree, int cells_per_side) {
  static std::map<std::pair<int, int>, std::unique_ptr<PolyBasis>> cache;
  auto key = std::make_pair(degree, cells_per_side);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::unique_ptr<PolyBasis>(new PolyBasis(degree, cells_per_side)))
             .first;
  return *it->second;
}

GranularFunction poly_project(const GranularFunction& f, const DyadicCube& q,
                              const PolyBasis& basis) {
  const Lattice& lat = f.lattice();
  int s = q.side_cells(lat);
  if (basis.cells_per_side() != s)
    throw std::invalid_argument("poly_project: basis resolution does not match cube");
  int x0 = q.x0(lat), y0 = q.y0(lat);
  double inv = 1.0 / (double(s) * s);
  GranularFunction out(lat);
  std::vector<double> coef(basis.size(), 0.0);
  for (int j = 0; j < basis.size(); ++j) {
    const auto& bv = basis.values(j);
    double dot = 0.0;
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x) dot += f.at(x0 + x, y0 + y) * bv[size_t(y) * s + x];
    coef[j] = dot * inv;
  }
  for (int j = 0; j < basis.size(); ++j) {
    const auto& bv = basis.values(j);
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x) out.at(x0 + x, y0 + y) += coef[j] * bv[size_t(y) * s + x];
  }
  return out;
}

GranularFunction bad_part(const GranularFunction& f, const DyadicCube& q,
                          const PolyBasis& basis) {
  const Lattice& lat = f.lattice();
  GranularFunction fq(lat);
  int s = q.side_cells(lat);
  int x0 = q.x0(lat), y0 = q.y0(lat);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) fq.at(x0 + x, y0 + y) = f.at(x0 + x, y0 + y);
  GranularFunction proj = poly_project(fq, q, basis);
  fq -= proj;
  return fq;
}

}  // namespace lacmax
