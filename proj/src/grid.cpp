#include "lacmax/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lacmax {

double iterated_log(int n, double t) {
  if (n < 1) throw std::domain_error("iterated_log: n must be >= 1");
  if (t < 0 || !std::isfinite(t)) throw std::domain_error("iterated_log: t must be >= 0");
  double x = t;
  for (int i = 0; i < n; ++i) x = std::log2(100.0 + x);
  return x;
}

double Lattice::len() const { return std::ldexp(1.0, log2_len); }
double Lattice::delta() const { return std::ldexp(1.0, log2_grain); }

double DyadicCube::side(const Lattice& lat) const {
  return std::ldexp(1.0, lat.log2_len - level);
}

bool DyadicCube::contains(const Lattice& lat, int cx, int cy) const {
  int s = side_cells(lat);
  return cx >= ix * s && cx < (ix + 1) * s && cy >= iy * s && cy < (iy + 1) * s;
}

GridSet GranularFunction::support() const {
  GridSet s(lat_);
  int nn = lat_.n();
  for (int y = 0; y < nn; ++y)
    for (int x = 0; x < nn; ++x)
      if (at(x, y) > 0.0) s.set(x, y);
  return s;
}

double GranularFunction::max_value() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, x);
  return m;
}

GranularFunction& GranularFunction::operator+=(const GranularFunction& o) {
  if (!(lat_ == o.lat_)) throw std::invalid_argument("lattice mismatch");
  for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

GranularFunction& GranularFunction::operator-=(const GranularFunction& o) {
  if (!(lat_ == o.lat_)) throw std::invalid_argument("lattice mismatch");
  for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

GranularFunction& GranularFunction::operator*=(double c) {
  for (double& x : v_) x *= c;
  return *this;
}

GranularFunction& GranularFunction::restrict_to(const GridSet& s) {
  if (!(lat_ == s.lattice())) throw std::invalid_argument("lattice mismatch");
  int nn = lat_.n();
  for (int y = 0; y < nn; ++y)
    for (int x = 0; x < nn; ++x)
      if (!s.test(x, y)) at(x, y) = 0.0;
  return *this;
}

double mass(const GranularFunction& f) {
  double s = 0.0;
  for (double x : f.values()) s += x;
  return s * f.lattice().cell_area();
}

double sup_norm(const GranularFunction& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::fabs(x));
  return m;
}

double l1_norm(const GranularFunction& f) {
  double s = 0.0;
  for (double x : f.values()) s += std::fabs(x);
  return s * f.lattice().cell_area();
}

double l2_norm_sq(const GranularFunction& f) {
  double s = 0.0;
  for (double x : f.values()) s += x * x;
  return s * f.lattice().cell_area();
}

double inner(const GranularFunction& f, const GranularFunction& g) {
  if (!(f.lattice() == g.lattice())) throw std::invalid_argument("lattice mismatch");
  double s = 0.0;
  const auto& a = f.values();
  const auto& b = g.values();
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * f.lattice().cell_area();
}

GridSet::GridSet(Lattice lat) : lat_(lat) {
  words_per_row_ = (lat.n() + 63) / 64;
  bits_.assign(size_t(words_per_row_) * lat.n(), 0);
}

bool GridSet::test(int ix, int iy) const {
  return (bits_[size_t(iy) * words_per_row_ + (ix >> 6)] >> (ix & 63)) & 1u;
}

void GridSet::set(int ix, int iy, bool on) {
  uint64_t& w = bits_[size_t(iy) * words_per_row_ + (ix >> 6)];
  uint64_t m = uint64_t(1) << (ix & 63);
  if (on)
    w |= m;
  else
    w &= ~m;
}

void GridSet::set_cube(const DyadicCube& q, bool on) {
  int s = q.side_cells(lat_);
  for (int y = q.y0(lat_); y < q.y0(lat_) + s; ++y)
    for (int x = q.x0(lat_); x < q.x0(lat_) + s; ++x) set(x, y, on);
}

bool GridSet::cube_inside(const DyadicCube& q) const {
  int s = q.side_cells(lat_);
  for (int y = q.y0(lat_); y < q.y0(lat_) + s; ++y)
    for (int x = q.x0(lat_); x < q.x0(lat_) + s; ++x)
      if (!test(x, y)) return false;
  return true;
}

int64_t GridSet::popcount() const {
  int64_t c = 0;
  for (uint64_t w : bits_) c += std::popcount(w);
  return c;
}

GridSet& GridSet::operator|=(const GridSet& o) {
  if (!(lat_ == o.lat_)) throw std::invalid_argument("lattice mismatch");
  for (size_t i = 0; i < bits_.size(); ++i) bits_[i] |= o.bits_[i];
  return *this;
}

GridSet& GridSet::operator&=(const GridSet& o) {
  if (!(lat_ == o.lat_)) throw std::invalid_argument("lattice mismatch");
  for (size_t i = 0; i < bits_.size(); ++i) bits_[i] &= o.bits_[i];
  return *this;
}

GridSet& GridSet::operator-=(const GridSet& o) {
  if (!(lat_ == o.lat_)) throw std::invalid_argument("lattice mismatch");
  for (size_t i = 0; i < bits_.size(); ++i) bits_[i] &= ~o.bits_[i];
  return *this;
}

GridSet GridSet::complement() const {
  GridSet r(lat_);
  int nn = lat_.n();
  for (size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = ~bits_[i];
  // mask tail bits beyond n in the last word of each row
  int tail = nn & 63;
  if (tail) {
    uint64_t mask = (uint64_t(1) << tail) - 1;
    for (int y = 0; y < nn; ++y) r.bits_[size_t(y) * words_per_row_ + words_per_row_ - 1] &= mask;
  }
  return r;
}

bool GridSet::subset_of(const GridSet& o) const {
  if (!(lat_ == o.lat_)) throw std::invalid_argument("lattice mismatch");
  for (size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] & ~o.bits_[i]) return false;
  return true;
}

bool GridSet::operator==(const GridSet& o) const {
  return lat_ == o.lat_ && bits_ == o.bits_;
}

GridSet GridSet::dilate(const std::vector<CellOffset>& offs) const {
  GridSet r(lat_);
  int nn = lat_.n();
  int x0, y0, x1, y1;
  if (!bounding_box(x0, y0, x1, y1)) return r;
  for (const auto& o : offs) {
    int ylo = std::max(0, y0 + o.dy), yhi = std::min(nn - 1, y1 + o.dy);
    for (int y = ylo; y <= yhi; ++y) {
      int sy = y - o.dy;
      // shift row sy by o.dx and OR into row y
      const uint64_t* src = &bits_[size_t(sy) * words_per_row_];
      uint64_t* dst = &r.bits_[size_t(y) * words_per_row_];
      int sh = o.dx;
      if (sh >= 0) {
        int wsh = sh >> 6, bsh = sh & 63;
        for (int w = words_per_row_ - 1; w >= wsh; --w) {
          uint64_t v = src[w - wsh] << bsh;
          if (bsh && w - wsh - 1 >= 0) v |= src[w - wsh - 1] >> (64 - bsh);
          dst[w] |= v;
        }
      } else {
        int s = -sh, wsh = s >> 6, bsh = s & 63;
        for (int w = 0; w + wsh < words_per_row_; ++w) {
          uint64_t v = src[w + wsh] >> bsh;
          if (bsh && w + wsh + 1 < words_per_row_) v |= src[w + wsh + 1] << (64 - bsh);
          dst[w] |= v;
        }
      }
    }
  }
  // mask tail bits
  int tail = nn & 63;
  if (tail) {
    uint64_t mask = (uint64_t(1) << tail) - 1;
    for (int y = 0; y < nn; ++y) r.bits_[size_t(y) * words_per_row_ + words_per_row_ - 1] &= mask;
  }
  return r;
}

bool GridSet::bounding_box(int& x0, int& y0, int& x1, int& y1) const {
  int nn = lat_.n();
  x0 = nn;
  y0 = nn;
  x1 = -1;
  y1 = -1;
  for (int y = 0; y < nn; ++y) {
    const uint64_t* row = &bits_[size_t(y) * words_per_row_];
    bool any = false;
    for (int w = 0; w < words_per_row_; ++w) {
      if (!row[w]) continue;
      any = true;
      int lo = w * 64 + std::countr_zero(row[w]);
      int hi = w * 64 + 63 - std::countl_zero(row[w]);
      x0 = std::min(x0, lo);
      x1 = std::max(x1, hi);
    }
    if (any) {
      if (y0 == nn) y0 = y;
      y1 = y;
    }
  }
  return x1 >= 0;
}

GridSet operator|(GridSet a, const GridSet& b) { return a |= b; }
GridSet operator&(GridSet a, const GridSet& b) { return a &= b; }
GridSet operator-(GridSet a, const GridSet& b) { return a -= b; }

namespace {

// full[lev] has one bool per cube at that level; built bottom-up by merging
// quads of children.
std::vector<std::vector<uint8_t>> full_masks(const GridSet& e) {
  int levels = e.lattice().levels();
  std::vector<std::vector<uint8_t>> full(levels + 1);
  int n = e.n();
  full[levels].resize(size_t(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) full[levels][size_t(y) * n + x] = e.test(x, y);
  for (int lev = levels - 1; lev >= 0; --lev) {
    int m = 1 << lev;
    int mc = m * 2;
    full[lev].resize(size_t(m) * m);
    const auto& ch = full[lev + 1];
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x)
        full[lev][size_t(y) * m + x] = ch[size_t(2 * y) * mc + 2 * x] &&
                                       ch[size_t(2 * y) * mc + 2 * x + 1] &&
                                       ch[size_t(2 * y + 1) * mc + 2 * x] &&
                                       ch[size_t(2 * y + 1) * mc + 2 * x + 1];
  }
  return full;
}

}  // namespace

std::vector<DyadicCube> maximal_dyadic_cover(const GridSet& e) {
  auto full = full_masks(e);
  int levels = e.lattice().levels();
  std::vector<DyadicCube> out;
  for (int lev = 0; lev <= levels; ++lev) {
    int m = 1 << lev;
    for (int y = 0; y < m; ++y)
      for (int x = 0; x < m; ++x) {
        if (!full[lev][size_t(y) * m + x]) continue;
        if (lev > 0 && full[lev - 1][size_t(y / 2) * (m / 2) + x / 2]) continue;
        out.push_back({lev, x, y});
      }
  }
  return out;
}

double length_of(const GridSet& e) {
  double s = 0.0;
  for (const auto& q : maximal_dyadic_cover(e)) s += q.side(e.lattice());
  return s;
}

void save_pgm(const GridSet& s, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  int n = s.n();
  f << "P5\n" << n << " " << n << "\n255\n";
  std::vector<unsigned char> row(n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) row[x] = s.test(x, y) ? 255 : 0;
    f.write(reinterpret_cast<const char*>(row.data()), n);
  }
}

GridSet load_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  f >> magic >> w >> h >> maxv;
  if (magic != "P5" || w != h || w <= 0 || maxv != 255)
    throw std::runtime_error("unsupported PGM: " + path);
  if ((w & (w - 1)) != 0) throw std::runtime_error("PGM side not a power of 2");
  f.get();  // single whitespace after header
  Lattice lat;
  lat.log2_len = 0;
  lat.log2_grain = -(std::countr_zero(unsigned(w)));
  GridSet s(lat);
  std::vector<unsigned char> row(w);
  for (int y = 0; y < h; ++y) {
    f.read(reinterpret_cast<char*>(row.data()), w);
    if (!f) throw std::runtime_error("truncated PGM: " + path);
    for (int x = 0; x < w; ++x)
      if (row[x] >= 128) s.set(x, y);
  }
  return s;
}

void save_function_csv(const GranularFunction& fn, const std::string& csv_path,
                       const std::string& json_path) {
  {
    nlohmann::json j;
    j["L"] = fn.lattice().len();
    j["delta"] = fn.lattice().delta();
    j["d"] = 2;
    std::ofstream f(json_path);
    if (!f) throw std::runtime_error("cannot open " + json_path);
    f << j.dump(2) << "\n";
  }
  std::ofstream f(csv_path);
  if (!f) throw std::runtime_error("cannot open " + csv_path);
  f << "x,y,value\n";
  char buf[64];
  int n = fn.n();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double v = fn.at(x, y);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", x, y, v);
      f << buf;
    }
}

GranularFunction load_function_csv(const std::string& csv_path,
                                   const std::string& json_path) {
  nlohmann::json j;
  {
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("cannot open " + json_path);
    f >> j;
  }
  double L = j.at("L").get<double>();
  double delta = j.at("delta").get<double>();
  Lattice lat;
  lat.log2_len = int(std::lround(std::log2(L)));
  lat.log2_grain = int(std::lround(std::log2(delta)));
  if (std::ldexp(1.0, lat.log2_len) != L || std::ldexp(1.0, lat.log2_grain) != delta)
    throw std::runtime_error("non-dyadic L or delta in " + json_path);
  GranularFunction fn(lat);
  std::ifstream f(csv_path);
  if (!f) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    int x, y;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &x, &y, &v) != 3)
      throw std::runtime_error("bad CSV row: " + line);
    if (x < 0 || x >= fn.n() || y < 0 || y >= fn.n())
      throw std::runtime_error("CSV cell out of range: " + line);
    fn.at(x, y) = v;
  }
  return fn;
}

}  // namespace lacmax
