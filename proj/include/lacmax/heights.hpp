#pragma once

#include "lacmax/exceptional.hpp"

namespace lacmax {

// m(k, q, gamma) = k(d-1) - log2(gamma/alpha) - ceil(c_iter * lll2(1/alpha)).
int critical_height(int k, double gamma, double alpha, int d, double c_iter);

// Top of the intermediate band: k(d-1) - log2(gamma/alpha) + ceil(lll2);
// heights at or above it form the heavy tail.
int height_top(int k, double gamma, double alpha, int d);

// Cap-union measure attached to one grain: the supports of the (scale,
// direction) caps whose grid rectangle through the grain is heavy at height
// 2^i.  Per-sample weights equal sigma_k's, so the full-angle case reproduces
// sigma_k exactly.
struct GrainCapMeasure {
  int gx = 0, gy = 0;  // the grain cell
  int height_index = 0;
  DiscreteMeasure measure;
  double theta = 0.0;  // total subtended angle
};

GrainCapMeasure grain_cap(int gx, int gy, int i, const DensityPiece& piece,
                          const ExceptionalConfig& cfg);

// g_k^{i,gamma} = sum over grains of grain-cap * (f restricted to the grain).
GranularFunction height_projection(const DensityPiece& piece, int i,
                                   const ExceptionalConfig& cfg);

// sigma_k * f = light + sum of intermediates + heavy tail, split at the
// critical height m and at height_top.
struct HeightDecomposition {
  int m = 0;
  int i_top = 0;
  GranularFunction sigma_conv;
  GranularFunction light;  // sigma_conv - g^m
  std::vector<GranularFunction> intermediates;  // g^i - g^{i+1}, m <= i < i_top
  GranularFunction heavy_tail;                  // g^{i_top}
};

HeightDecomposition telescope(const DensityPiece& piece, const ExceptionalConfig& cfg);

struct L1Report {
  // || sum_k sum_{m<=i<i_top} (g^i - g^{i+1}) ||_1 / (Log^3(1/alpha) ||f||_1)
  double total_ratio = 0.0;
  // per offset j: || sum_k (g^{m+j} - g^{m+j+1}) ||_1 / ||f||_1
  std::vector<double> per_offset;
};

// Sums the intermediate band over all K2 scales in the range.
L1Report l1_intermediate(const DensityPiece& piece, const ExceptionalConfig& cfg,
                         ScaleRange range);

// ||light||_2^2 * ll2(1/alpha)^2 / (alpha ||f||_1)
double l2_light(const DensityPiece& piece, const ExceptionalConfig& cfg);

// ||sigma_k * f||_2^2 * 2^{k(d-1)} / (gamma log2(1/alpha) ||f||_1)
double l2_global_scale_bound(const DensityPiece& piece, const ExceptionalConfig& cfg);

struct HeightsRow {
  int k = 0;
  double gamma = 0.0;
  int m = 0;
  int i_top = 0;
  double light_l2_ratio = 0.0;
  bool heavy_contained = false;
  std::vector<double> per_j_l1;
};

void save_heights_csv(const std::vector<HeightsRow>& rows, const std::string& path);

}  // namespace lacmax
