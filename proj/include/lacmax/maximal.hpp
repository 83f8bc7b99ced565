#pragma once

#include "lacmax/grid.hpp"
#include "lacmax/spherical.hpp"

namespace lacmax {

// Truncation of the sup over k in Z.  Valid when 2^k_min >= 8*delta and the
// inputs are padded for 2^k_max.
struct ScaleRange {
  int k_min = 0;
  int k_max = 0;
};

// A_k f = f * sigma_k.  Uses the frequency-domain path with a per-(k, lattice)
// cached spectrum.
GranularFunction spherical_mean(const GranularFunction& f, int k);

// M f = max over k in range of |A_k f|.
GranularFunction lacunary_maximal(const GranularFunction& f, ScaleRange range);

// Dyadic Hardy-Littlewood maximal function: sup over dyadic cubes Q
// containing x of the average of |f| over Q.  Weak (1,1) with constant 1
// holds exactly for this variant.
GranularFunction hardy_littlewood(const GranularFunction& f);

// {g > alpha} as a bitmap (strict inequality).
GridSet superlevel(const GranularFunction& g, double alpha);

}  // namespace lacmax
