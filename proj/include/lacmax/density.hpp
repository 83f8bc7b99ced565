#pragma once

#include "lacmax/grid.hpp"

namespace lacmax {

// All dyadic values gamma in [alpha^2 l(q)^(d-1), l(q)^(d-1)], increasing.
struct DensityLadder {
  double alpha = 0.0;
  double l_q = 0.0;
  int d = 2;
  std::vector<int> exponents;  // gamma_j = 2^exponents[j]
  std::vector<double> gammas;

  int top_index() const { return int(gammas.size()) - 1; }
};

DensityLadder gamma_ladder(double alpha, double l_q, int d = 2);

// One critical-density piece of f_q.  Pieces partition the values of f_q:
// summing fn over all pieces reproduces f_q cell for cell.
struct DensityPiece {
  int j = 0;  // ladder index, 0 = residual piece
  double gamma = 0.0;
  GranularFunction fn;   // f_q^{gamma_j}
  GridSet excised;       // E_q^{gamma_j} (full excised cubes; may overlap
                         // higher-level sets where their residual was zero)
  double lambda = 0.0;   // length_of(excised)
  DyadicCube q;
};

// Critical-density decomposition: walk the ladder from the top, excising all
// dyadic cubes Q inside q (largest first) on which the current residual
// integrates to at least gamma_j * l(Q); the j = 0 piece collects what is
// left.  Requires supp(f_q) inside q and 0 <= f_q <= 1.
std::vector<DensityPiece> decompose(const GranularFunction& f_q, const DyadicCube& q,
                                    const DensityLadder& ladder);

struct WidthReport {
  // per piece, indexed like the input: mass / (gamma * lambda); 0 for empty
  std::vector<double> r;
  // per piece: max over dyadic Q of int_Q |f| / (gamma * l(Q)); 0 for empty
  std::vector<double> w;
  double r_min_nonzero = 0.0;  // over pieces with j >= 1
  double r_max = 0.0;
  double w_max = 0.0;
};

WidthReport verify_widths(const std::vector<DensityPiece>& pieces);

// Per-piece dump: PGM of the excised set next to a CSV row
// (j, gamma, mass, lambda, r, w) per piece.
void save_pieces(const std::vector<DensityPiece>& pieces, const WidthReport& rep,
                 const std::string& dir_prefix);

}  // namespace lacmax
