#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lacmax {

// Iterated logarithm: Log(t) = log2(100 + t), and Log^n = Log composed n
// times, so Log^2(t) = log2(100 + log2(100 + t)).  Throws std::domain_error
// for t < 0 or n < 1.
double iterated_log(int n, double t);

// The discrete substrate.  The domain is the half-open square [0, L)^2
// partitioned into n x n cells of side delta, where L = 2^log2_len,
// delta = 2^log2_grain and n = 2^(log2_len - log2_grain).  Everything in the
// library lives on such a lattice; two objects interoperate only if their
// lattices are identical.
struct Lattice {
  int log2_len = 0;
  int log2_grain = -6;

  int levels() const { return log2_len - log2_grain; }  // n = 2^levels
  int n() const { return 1 << levels(); }
  double len() const;
  double delta() const;
  double cell_area() const { return delta() * delta(); }

  bool operator==(const Lattice&) const = default;
};

// Offset between two cells, in cells.  Measure atoms and Minkowski dilations
// are expressed as lists of these.
struct CellOffset {
  int dx = 0;
  int dy = 0;
};

// A dyadic cube at `level` has side L / 2^level and covers the cells
// [ix*s, (ix+1)*s) x [iy*s, (iy+1)*s) with s = n >> level.  level = 0 is the
// whole domain, level = lat.levels() is a single cell.
struct DyadicCube {
  int level = 0;
  int ix = 0;
  int iy = 0;

  int side_cells(const Lattice& lat) const { return lat.n() >> level; }
  double side(const Lattice& lat) const;
  int x0(const Lattice& lat) const { return ix * side_cells(lat); }
  int y0(const Lattice& lat) const { return iy * side_cells(lat); }
  bool contains(const Lattice& lat, int cx, int cy) const;

  bool operator==(const DyadicCube&) const = default;
};

class GridSet;

// A nonnegative function constant on each cell of its lattice.
class GranularFunction {
 public:
  GranularFunction() = default;
  explicit GranularFunction(Lattice lat) : lat_(lat), v_(size_t(lat.n()) * lat.n(), 0.0) {}

  const Lattice& lattice() const { return lat_; }
  int n() const { return lat_.n(); }

  double at(int ix, int iy) const { return v_[size_t(iy) * lat_.n() + ix]; }
  double& at(int ix, int iy) { return v_[size_t(iy) * lat_.n() + ix]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  GridSet support() const;
  double max_value() const;

  GranularFunction& operator+=(const GranularFunction& o);
  GranularFunction& operator-=(const GranularFunction& o);
  GranularFunction& operator*=(double c);
  // Zero outside the set; returns self.
  GranularFunction& restrict_to(const GridSet& s);

 private:
  Lattice lat_;
  std::vector<double> v_;
};

// total mass, delta^2 * sum of cell values
double mass(const GranularFunction& f);
double sup_norm(const GranularFunction& f);
double l1_norm(const GranularFunction& f);  // delta^2 * sum |v|, for signed intermediates
double l2_norm_sq(const GranularFunction& f);
// inner product <f, g> = delta^2 * sum f*g
double inner(const GranularFunction& f, const GranularFunction& g);

// A measurable set as a cell bitmap with exact measure delta^2 * popcount.
class GridSet {
 public:
  GridSet() = default;
  explicit GridSet(Lattice lat);

  const Lattice& lattice() const { return lat_; }
  int n() const { return lat_.n(); }

  bool test(int ix, int iy) const;
  void set(int ix, int iy, bool on = true);
  void set_cube(const DyadicCube& q, bool on = true);
  bool cube_inside(const DyadicCube& q) const;  // every cell of q in the set

  int64_t popcount() const;
  double measure() const { return double(popcount()) * lat_.cell_area(); }
  bool empty() const { return popcount() == 0; }

  GridSet& operator|=(const GridSet& o);
  GridSet& operator&=(const GridSet& o);
  GridSet& operator-=(const GridSet& o);  // set difference
  GridSet complement() const;
  bool subset_of(const GridSet& o) const;
  bool operator==(const GridSet& o) const;

  // Minkowski sum with a list of cell offsets, clipped to the domain.
  GridSet dilate(const std::vector<CellOffset>& offs) const;

  // Bounding box of the set cells, inclusive; false if empty.
  bool bounding_box(int& x0, int& y0, int& x1, int& y1) const;

  const std::vector<uint64_t>& words() const { return bits_; }

 private:
  friend GridSet operator|(GridSet a, const GridSet& b);
  Lattice lat_;
  int words_per_row_ = 0;
  std::vector<uint64_t> bits_;
};

GridSet operator|(GridSet a, const GridSet& b);
GridSet operator&(GridSet a, const GridSet& b);
GridSet operator-(GridSet a, const GridSet& b);

// Maximal cover of E by dyadic cubes: pairwise disjoint, union = E, and no
// cube's parent is fully contained in E.  Cubes are returned sorted by
// (level, iy, ix).
std::vector<DyadicCube> maximal_dyadic_cover(const GridSet& e);

// lambda(E) = sum of sidelengths over the maximal dyadic cover.
double length_of(const GridSet& e);

// PGM (P5) bitmap serialization, one byte per cell, 255 = in-set.
void save_pgm(const GridSet& s, const std::string& path);
GridSet load_pgm(const std::string& path);

// GranularFunction serialization: flat CSV "x,y,value" rows (cell indices,
// zero cells omitted) plus a JSON header {"L":..., "delta":..., "d":2}.
void save_function_csv(const GranularFunction& f, const std::string& csv_path,
                       const std::string& json_path);
GranularFunction load_function_csv(const std::string& csv_path,
                                   const std::string& json_path);

}  // namespace lacmax
