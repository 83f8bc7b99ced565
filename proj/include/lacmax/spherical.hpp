#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "lacmax/grid.hpp"

namespace lacmax {

// Thrown when a sphere or cap cannot be resolved on the grid (radius or arc
// below the sampling floor).
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unit vector in S^1, stored by angle.
struct Direction {
  double angle = 0.0;  // radians
  double ux() const;
  double uy() const;
};

enum class MeasureKind { Circle, Cap, CapUnion };

// A weighted atomic measure supported near a circle of radius 2^k.  Atoms are
// whole-cell offsets; convolution against a GranularFunction shifts by whole
// cells, so the discrete operator is exactly linear and positivity
// preserving.  total_mass is recorded at construction, not re-derived.
struct DiscreteMeasure {
  MeasureKind kind = MeasureKind::Circle;
  int k = 0;           // radius 2^k
  int log2_grain = 0;  // lattice grain the offsets were binned on
  double radius = 0.0;
  double total_mass = 0.0;
  double width = 0.0;  // angular width (caps)
  Direction normal;    // cap normal (caps)
  std::vector<CellOffset> cells;
  std::vector<double> weights;
};

// Equispaced sampling of the circle of radius 2^k, each sample rounded to the
// nearest lattice offset.  The sample count P is the smallest multiple of 8
// >= 16*pi*2^k/delta, so the sample set is closed under reflection and
// quarter turns; angles are strictly increasing in [0, 2pi).
class CircleSampler {
 public:
  CircleSampler(int k, const Lattice& lat);

  int k() const { return k_; }
  int sample_count() const { return P_; }
  double radius() const { return radius_; }
  double sample_weight() const { return w_; }  // normalized so P*w sums to 1
  const std::vector<double>& angles() const { return angle_; }
  const std::vector<CellOffset>& offsets() const { return off_; }

  // The full circle measure, atoms aggregated per cell, recorded mass 1.
  DiscreteMeasure full_measure() const;

  // Sub-measure of samples whose angle lies in the union of the given
  // intervals (radians; wrapping allowed), with per-sample weights kept, so a
  // full-angle selection reproduces full_measure() exactly.  theta_out gets
  // the total subtended angle of the interval union.
  DiscreteMeasure select(const std::vector<std::pair<double, double>>& intervals,
                         double* theta_out = nullptr) const;

 private:
  int k_;
  int P_;
  double radius_;
  double w_;
  int log2_grain_;
  std::vector<double> angle_;
  std::vector<CellOffset> off_;
};

// L^1-normalized surface measure on the circle of radius 2^k, binned to the
// lattice.  Requires 2^k >= 8*delta.
DiscreteMeasure circle_measure(int k, const Lattice& lat);

// Uniform measure on the arc {angular distance from `normal` <= width/2},
// rescaled so its mass is exactly width/(2*pi).  Requires arc length
// 2^k * width >= 4*delta.
DiscreteMeasure cap_measure(int k, Direction normal, double width, const Lattice& lat);

// (mu * f)(x) = sum_atoms w * f(x - atom).  Throws std::domain_error if the
// support of f expanded by the atom offsets does not fit inside the domain.
// `convolve` uses the frequency-domain path; `convolve_direct` the plain
// shifted-sum path.  Both use the same grid indexing and agree to ~1e-12.
GranularFunction convolve(const DiscreteMeasure& mu, const GranularFunction& f);
GranularFunction convolve_direct(const DiscreteMeasure& mu, const GranularFunction& f);

// The kernel sigma_k * sigma_k as a granular density centered at cell
// (n/2, n/2); total mass 1, supported in |x| <= 2^(k+1) + 4*delta.
GranularFunction autocorrelation_kernel(int k, const Lattice& lat);

// Reusable frequency-domain convolution against a fixed measure on a fixed
// lattice; amortizes the kernel transform across many functions.
class ConvolutionPlan {
 public:
  ConvolutionPlan(DiscreteMeasure mu, const Lattice& lat);
  GranularFunction apply(const GranularFunction& f) const;
  const DiscreteMeasure& measure() const { return mu_; }

 private:
  DiscreteMeasure mu_;
  Lattice lat_;
  std::vector<std::complex<double>> spec_;
};

// Axis-oriented rectangle: short side `short_side` along `dir`, long side
// across it.  Rasterization takes the cells whose centers land in the
// half-open rotated box.
struct OrientedRect {
  double cx = 0.0, cy = 0.0;
  Direction dir;
  double short_side = 0.0;
  double long_side = 0.0;

  bool contains(double px, double py) const;  // closed, symmetric
  GridSet rasterize(const Lattice& lat) const;
  OrientedRect dilated(double factor) const;  // about the center
};

struct KernelRectLayer {
  double weight = 0.0;
  std::vector<OrientedRect> rects;
};

// Domination of 2^{-k(d-1)} |x|^{-1} on c_0 <= |x| <= c_N/2 by weighted
// indicator sums of origin-centered rotated rectangles, one layer per ladder
// step: layer i has ~(c_i/c_{i-1})^{d-1} rects of dims c_i x c_{i-1} with
// weight 2^{-k(d-1)} c_i^{-(d-1)} c_{i-1}^{d-2}.
std::vector<KernelRectLayer> dominate_kernel(const std::vector<double>& ladder, int k,
                                             int d = 2);

// Pointwise value of the weighted rect-indicator sum at a point.
double rect_layer_sum(const std::vector<KernelRectLayer>& layers, double px, double py);

}  // namespace lacmax
