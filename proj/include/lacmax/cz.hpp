#pragma once

#include "lacmax/grid.hpp"

namespace lacmax {

// Whitney cube: dyadic cube together with its distance to the complement of
// Omega.  Distances are set-to-set between closed cell blocks, computed in
// exact integer cell arithmetic.  Cubes at the grain floor (single cells that
// could not certify diam <= dist) are flagged.
struct WhitneyCube {
  DyadicCube cube;
  double dist = 0.0;
  bool at_grain_floor = false;
};

// Partition of Omega into dyadic cubes with diam(Q) <= dist(Q, Omega^c)
// <= 4*diam(Q), greedy largest-cube-first; the lower bound is waived for
// grain-floor cubes.  Omega must have nonempty complement.
std::vector<WhitneyCube> whitney(const GridSet& omega);

// CSV rows "level,i,j,dist" per cube.
void save_whitney_csv(const std::vector<WhitneyCube>& cubes, const Lattice& lat,
                      const std::string& path);

// Checks the partition (disjoint, union = omega) and the distance
// comparability diam <= dist <= 4 diam, skipping the lower bound on flagged
// grain-floor cubes.
bool whitney_invariants_ok(const std::vector<WhitneyCube>& cubes, const GridSet& omega);

// Orthonormal polynomial basis of degree <= D on a cube of m x m cells,
// orthonormal under the discrete normalized inner product
// <u, v> = (1/m^2) sum over cell centers.  Monomials that become linearly
// dependent on a coarse grid are dropped.
class PolyBasis {
 public:
  static const PolyBasis& get(int degree, int cells_per_side);  // cached

  int degree() const { return degree_; }
  int cells_per_side() const { return m_; }
  int size() const { return int(values_.size()); }
  // values of basis function j at the m x m cell centers, row-major
  const std::vector<double>& values(int j) const { return values_[j]; }
  // coefficients of basis function j in the monomial basis (graded lex)
  const std::vector<double>& coeffs(int j) const { return coeffs_[j]; }
  // max |<P_i, P_j> - delta_ij| over the table
  double gram_defect() const;

 private:
  PolyBasis(int degree, int m);
  int degree_;
  int m_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<double>> coeffs_;
};

// Pi_q[f]: L^2(q)-orthogonal projection of f restricted to q onto the
// polynomial space, extended by zero outside q.
GranularFunction poly_project(const GranularFunction& f, const DyadicCube& q,
                              const PolyBasis& basis);

// b_q = f*chi_q - Pi_q[f*chi_q]
GranularFunction bad_part(const GranularFunction& f, const DyadicCube& q,
                          const PolyBasis& basis);

}  // namespace lacmax
