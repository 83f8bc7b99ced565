#include "lacmax/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace lacmax {

DensityLadder gamma_ladder(double alpha, double l_q, int d) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("gamma_ladder: need 0 < alpha < 1");
  if (!(l_q > 0.0)) throw std::domain_error("gamma_ladder: l_q must be positive");
  DensityLadder lad;
  lad.alpha = alpha;
  lad.l_q = l_q;
  lad.d = d;
  double lo = 2.0 * std::log2(alpha) + (d - 1) * std::log2(l_q);
  double hi = (d - 1) * std::log2(l_q);
  int elo = int(std::ceil(lo - 1e-9));
  int ehi = int(std::floor(hi + 1e-9));
  for (int e = elo; e <= ehi; ++e) {
    lad.exponents.push_back(e);
    lad.gammas.push_back(std::ldexp(1.0, e));
  }
  return lad;
}

namespace {

// summed-area table over the q block; sums of current residual cell values
struct BlockSums {
  int s;  // block side in cells
  std::vector<double> acc;  // (s+1)^2

  void build(const GranularFunction& f, int x0, int y0, int s_) {
    s = s_;
    acc.assign(size_t(s + 1) * (s + 1), 0.0);
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x)
        acc[size_t(y + 1) * (s + 1) + x + 1] = f.at(x0 + x, y0 + y) +
                                               acc[size_t(y) * (s + 1) + x + 1] +
                                               acc[size_t(y + 1) * (s + 1) + x] -
                                               acc[size_t(y) * (s + 1) + x];
  }
  double box(int x, int y, int w) const {  // cell sum of [x, x+w) x [y, y+w)
    return acc[size_t(y + w) * (s + 1) + x + w] - acc[size_t(y) * (s + 1) + x + w] -
           acc[size_t(y + w) * (s + 1) + x] + acc[size_t(y) * (s + 1) + x];
  }
};

}  // namespace

std::vector<DensityPiece> decompose(const GranularFunction& f_q, const DyadicCube& q,
                                    const DensityLadder& ladder) {
  const Lattice& lat = f_q.lattice();
  int sq = q.side_cells(lat);
  int qx = q.x0(lat), qy = q.y0(lat);
  int n = lat.n();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double v = f_q.at(x, y);
      if (v < 0.0 || v > 1.0 + 1e-12)
        throw std::domain_error("decompose: values must lie in [0, 1]");
      if (v > 0.0 && !q.contains(lat, x, y))
        throw std::domain_error("decompose: support leaks outside q");
    }

  int nlev = int(ladder.gammas.size()) - 1;
  double area = lat.cell_area();
  GranularFunction residual = f_q;
  std::vector<DensityPiece> pieces(nlev + 1);
  for (int j = 0; j <= nlev; ++j) {
    pieces[j].j = j;
    pieces[j].gamma = ladder.gammas[j];
    pieces[j].fn = GranularFunction(lat);
    pieces[j].excised = GridSet(lat);
    pieces[j].q = q;
  }

  BlockSums sums;
  for (int j = nlev; j >= 1; --j) {
    double gamma = ladder.gammas[j];
    for (int side = sq; side >= 1; side >>= 1) {
      sums.build(residual, qx, qy, sq);
      double side_len = side * lat.delta();
      double threshold = gamma * side_len;
      bool claimed_any = false;
      for (int by = 0; by + side <= sq; by += side)
        for (int bx = 0; bx + side <= sq; bx += side) {
          double integral = sums.box(bx, by, side) * area;
          if (integral >= threshold) {
            for (int y = by; y < by + side; ++y)
              for (int x = bx; x < bx + side; ++x) {
                int gx = qx + x, gy = qy + y;
                double v = residual.at(gx, gy);
                if (v != 0.0) {
                  pieces[j].fn.at(gx, gy) = v;
                  residual.at(gx, gy) = 0.0;
                }
                pieces[j].excised.set(gx, gy);
              }
            claimed_any = true;
          }
        }
      (void)claimed_any;
    }
  }
  // residual piece: everything in q not excised at any level j >= 1
  GridSet taken(lat);
  for (int j = 1; j <= nlev; ++j) taken |= pieces[j].excised;
  for (int y = 0; y < sq; ++y)
    for (int x = 0; x < sq; ++x) {
      int gx = qx + x, gy = qy + y;
      if (!taken.test(gx, gy)) {
        pieces[0].excised.set(gx, gy);
        double v = residual.at(gx, gy);
        if (v != 0.0) pieces[0].fn.at(gx, gy) = v;
      }
    }
  for (auto& p : pieces) p.lambda = length_of(p.excised);
  return pieces;
}

WidthReport verify_widths(const std::vector<DensityPiece>& pieces) {
  WidthReport rep;
  rep.r_min_nonzero = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) {
    double m = mass(p.fn);
    double r = 0.0;
    if (m > 0.0) {
      if (p.lambda <= 0.0)
        throw std::runtime_error("verify_widths: nonzero mass with zero length");
      r = m / (p.gamma * p.lambda);
    }
    rep.r.push_back(r);
    // width3: scan all dyadic cubes inside q
    double w = 0.0;
    if (m > 0.0) {
      const Lattice& lat = p.fn.lattice();
      int sq = p.q.side_cells(lat);
      int qx = p.q.x0(lat), qy = p.q.y0(lat);
      BlockSums sums;
      sums.build(p.fn, qx, qy, sq);
      double area = lat.cell_area();
      for (int side = sq; side >= 1; side >>= 1) {
        double side_len = side * lat.delta();
        for (int by = 0; by + side <= sq; by += side)
          for (int bx = 0; bx + side <= sq; bx += side) {
            double integral = sums.box(bx, by, side) * area;
            w = std::max(w, integral / (p.gamma * side_len));
          }
      }
    }
    rep.w.push_back(w);
    if (p.j >= 1 && r > 0.0) rep.r_min_nonzero = std::min(rep.r_min_nonzero, r);
    rep.r_max = std::max(rep.r_max, r);
    rep.w_max = std::max(rep.w_max, w);
  }
  if (!std::isfinite(rep.r_min_nonzero)) rep.r_min_nonzero = 0.0;
  return rep;
}

void save_pieces(const std::vector<DensityPiece>& pieces, const WidthReport& rep,
                 const std::string& dir_prefix) {
  std::ofstream csv(dir_prefix + "pieces.csv");
  if (!csv) throw std::runtime_error("cannot open " + dir_prefix + "pieces.csv");
  csv << "j,gamma,mass,lambda,r,w\n";
  char buf[160];
  for (size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.j, p.gamma,
                  mass(p.fn), p.lambda, rep.r[i], rep.w[i]);
    csv << buf;
    save_pgm(p.excised, dir_prefix + "piece_" + std::to_string(p.j) + ".pgm");
  }
}

}  // namespace lacmax
