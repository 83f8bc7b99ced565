#pragma once

#include <cstdint>
#include <map>

#include "lacmax/density.hpp"
#include "lacmax/grid.hpp"
#include "lacmax/maximal.hpp"
#include "lacmax/spherical.hpp"

namespace lacmax {

// Iterated base-2 logs with inner values clamped below at 2, so each level
// stays >= 1 on desk-scale inputs (e.g. ll2(2^-2 inverse) = 1).
double log2_clamped(double t);      // log2(max(t, 2))
double ll2(double inv_alpha);       // log2_clamped(log2(inv_alpha))
double lll2(double inv_alpha);      // log2_clamped(ll2(inv_alpha))

// The literal constants of the construction, exposed as knobs; the defaults
// are the source values.  Desk-scale runs shrink some of them (see harness).
struct ExceptionalKnobs {
  double c_stop = 0.0009765625;  // 2^-10, ladder stop factor
  double c_width = 100.0;        // cap angular width factor
  double c_dilate = 100.0;       // rectangle dilation factor
  double c_iter = 100.0;         // critical-height constant
  double c_k2 = 100.0;           // K2 band width factor
};

struct ExceptionalConfig {
  double alpha = 0.25;
  double gamma = 1.0;
  int k = 0;
  DyadicCube q;
  Lattice lat;
  int d = 2;
  double height = 1.0;  // M
  ExceptionalKnobs knobs;

  double l_q() const { return q.side(lat); }
  // R* = max(l(q), (gamma/alpha)^(1/(d-1)))
  double log2_rstar() const;
};

// Scales c_0 < c_1 < ... < c_N: c_0 = gamma^(1/(d-1)), c_{j+1} = sqrt(c_j R*),
// stopping at the first c_N >= c_stop * R*.  Kept as exact log2 exponents.
struct ScaleLadder {
  std::vector<double> log2_c;
  std::vector<double> c;
  double log2_rstar = 0.0;
  double rstar = 0.0;

  int top_index() const { return int(c.size()) - 1; }  // N
};

ScaleLadder scale_ladder(const ExceptionalConfig& cfg);

// Closed form log2 c_j = 2^-j log2 c_0 + (1 - 2^-j) log2 R*; agrees with the
// recursion exactly in floating point.
double ladder_closed_form_log2(double log2_c0, double log2_rstar, int j);

// ceil(c_hi/c_lo) equispaced directions modulo pi (rect orientation is
// unsigned in the plane).
std::vector<Direction> direction_net(double c_hi, double c_lo, int d = 2);

// Integrals of a piece over the rotated grid of c_i x c_{i-1} rectangles for
// one scale index and one direction.  Grid cells are half-open in rotated
// coordinates with one rectangle centered at the origin; every lattice cell
// lands in exactly one grid rectangle.
struct DirScaleRects {
  int i = 0;  // scale index, 1..N
  Direction dir;
  double c_short = 0.0;  // c_{i-1}, extent along dir
  double c_long = 0.0;   // c_i
  std::map<std::pair<int64_t, int64_t>, double> mass;  // grid index -> integral
};

// All rect-grid integrals of the piece across scales 1..N and their direction
// nets; independent of the height parameter.
std::vector<DirScaleRects> rect_masses(const DensityPiece& piece,
                                       const ScaleLadder& ladder,
                                       const ExceptionalKnobs& knobs);

struct HeavyRectSet {
  Direction dir;
  int i = 0;
  double threshold = 0.0;  // c_{i-1} * M * gamma
  std::vector<OrientedRect> rects;
  std::vector<double> masses;
};

// Rectangles of the (i, phi) grid with integral >= c_{i-1} * M * gamma.
HeavyRectSet heavy_rectangles(const DensityPiece& piece, Direction phi, int i,
                              const ScaleLadder& ladder, const ExceptionalConfig& cfg);

// S_{M,k,q,gamma}: union over scales and directions of
// supp(cap * chi_{union of dilated heavy rects}), caps taken as antipodal arc
// pairs of width c_width * c_{i-1}/c_i about each direction.
GridSet exceptional_set(const DensityPiece& piece, const ExceptionalConfig& cfg);

// |S| * M / (2^{k(d-1)} * lambda); NaN when lambda = 0 (not applicable).
double size_lemma_ratio(const DensityPiece& piece, const ExceptionalConfig& cfg);

enum class Regime { K1, K2, K3 };

// K1: k(d-1) < max(log2 l(q) * (d-1), log2(gamma/alpha));
// K2: up to log2(gamma/alpha) + c_k2 * ll2; K3: the rest.  Requires k >= 0.
Regime regime_partition(int k, const ExceptionalConfig& cfg);

struct RegimeRow {
  int q_id = 0;
  int k = 0;
  double gamma = 0.0;
  double height = 0.0;  // M used (0 for K1/K3)
  int regime = 0;       // 1, 2, 3
  int n_scales = 0;
  int n_heavy = 0;
  double s_measure = 0.0;
  double ratio = 0.0;  // size_lemma_ratio for K2 rows
};

struct RegimeReport {
  GridSet a_set;
  double measure = 0.0;
  double ratio = 0.0;  // |A| * alpha / ||f||_1
  std::vector<RegimeRow> rows;
};

// Assembles A = union over (q, k, gamma) of A_{q,k,gamma} with the K2 height
// M = 2^{k(d-1)} * alpha / gamma * ll2(1/alpha); k runs over the given range
// clipped to k >= 0.
RegimeReport regime_exceptional(const GranularFunction& f, double alpha,
                                const ExceptionalKnobs& knobs, ScaleRange range);

void save_regime_csv(const RegimeReport& rep, const std::string& path);

}  // namespace lacmax
