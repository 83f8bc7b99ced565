#include "lacmax/spherical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "fft.hpp"

namespace lacmax {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}
}  // namespace

double Direction::ux() const { return std::cos(angle); }
double Direction::uy() const { return std::sin(angle); }

CircleSampler::CircleSampler(int k, const Lattice& lat) : k_(k) {
  log2_grain_ = lat.log2_grain;
  if (k < lat.log2_grain + 3)
    throw ResolutionError("circle radius below 8*delta");
  radius_ = std::ldexp(1.0, k);
  double delta = lat.delta();
  double want = 16.0 * std::numbers::pi * radius_ / delta;
  P_ = int((std::llround(std::ceil(want)) + 7) / 8 * 8);
  angle_.resize(P_);
  off_.resize(P_);
  double inv_delta = 1.0 / delta;
  for (int p = 0; p < P_; ++p) {
    double th = kTwoPi * (p + 0.5) / P_;
    angle_[p] = th;
    // nearest lattice offset; the half-sample phase keeps samples off the
    // axes so the set is closed under reflection
    off_[p].dx = int(std::lround(radius_ * std::cos(th) * inv_delta));
    off_[p].dy = int(std::lround(radius_ * std::sin(th) * inv_delta));
  }
  double sum = 0.0;
  for (int p = 0; p < P_; ++p) sum += 1.0 / P_;
  w_ = (1.0 / P_) / sum;
}

namespace {

DiscreteMeasure aggregate(const std::vector<CellOffset>& cells,
                          const std::vector<double>& weights) {
  std::map<std::pair<int, int>, double> acc;
  for (size_t i = 0; i < cells.size(); ++i)
    acc[{cells[i].dy, cells[i].dx}] += weights[i];
  DiscreteMeasure m;
  m.cells.reserve(acc.size());
  m.weights.reserve(acc.size());
  double total = 0.0;
  for (const auto& [key, w] : acc) {
    m.cells.push_back({key.second, key.first});
    m.weights.push_back(w);
    total += w;
  }
  m.total_mass = total;
  return m;
}

}  // namespace

DiscreteMeasure CircleSampler::full_measure() const {
  std::vector<double> w(P_, w_);
  DiscreteMeasure m = aggregate(off_, w);
  m.kind = MeasureKind::Circle;
  m.k = k_;
  m.log2_grain = log2_grain_;
  m.radius = radius_;
  m.total_mass = 1.0;
  return m;
}

DiscreteMeasure CircleSampler::select(
    const std::vector<std::pair<double, double>>& intervals, double* theta_out) const {
  // normalize to non-wrapping intervals in [0, 2pi), then merge
  std::vector<std::pair<double, double>> iv;
  for (auto [lo, hi] : intervals) {
    double len = hi - lo;
    if (len <= 0) continue;
    if (len >= kTwoPi) {
      iv.assign(1, {0.0, kTwoPi});
      break;
    }
    double a = wrap_angle(lo);
    double b = a + len;
    if (b <= kTwoPi) {
      iv.push_back({a, b});
    } else {
      iv.push_back({a, kTwoPi});
      iv.push_back({0.0, b - kTwoPi});
    }
  }
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> merged;
  for (auto& p : iv) {
    if (!merged.empty() && p.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, p.second);
    else
      merged.push_back(p);
  }
  double theta = 0.0;
  std::vector<CellOffset> cells;
  std::vector<double> ws;
  for (auto [a, b] : merged) {
    theta += b - a;
    // samples are sorted by angle; take the contiguous run in [a, b]
    auto lo = std::lower_bound(angle_.begin(), angle_.end(), a);
    for (auto it = lo; it != angle_.end() && *it <= b; ++it) {
      size_t p = size_t(it - angle_.begin());
      cells.push_back(off_[p]);
      ws.push_back(w_);
    }
  }
  if (theta_out) *theta_out = theta;
  DiscreteMeasure m = aggregate(cells, ws);
  m.kind = MeasureKind::CapUnion;
  m.k = k_;
  m.log2_grain = log2_grain_;
  m.radius = radius_;
  return m;
}

DiscreteMeasure circle_measure(int k, const Lattice& lat) {
  return CircleSampler(k, lat).full_measure();
}

DiscreteMeasure cap_measure(int k, Direction normal, double width, const Lattice& lat) {
  if (width <= 0 || width > kTwoPi)
    throw std::domain_error("cap width must be in (0, 2*pi]");
  CircleSampler s(k, lat);
  if (std::ldexp(1.0, k) * width < 4.0 * lat.delta())
    throw ResolutionError("cap arc below 4*delta");
  DiscreteMeasure m =
      s.select({{normal.angle - width / 2, normal.angle + width / 2}});
  double target = width / kTwoPi;
  if (m.total_mass > 0) {
    double scale = target / m.total_mass;
    for (double& w : m.weights) w *= scale;
  }
  m.total_mass = target;
  m.kind = width >= kTwoPi ? MeasureKind::Circle : MeasureKind::Cap;
  m.width = width;
  m.normal = normal;
  return m;
}

namespace {

void check_padding(const DiscreteMeasure& mu, const GranularFunction& f) {
  if (mu.log2_grain != f.lattice().log2_grain)
    throw std::invalid_argument("measure and function grain mismatch");
  GridSet supp = f.support();
  int x0, y0, x1, y1;
  if (!supp.bounding_box(x0, y0, x1, y1)) return;  // zero function
  int mdx = 0, mdy = 0;
  for (const auto& c : mu.cells) {
    mdx = std::max({mdx, c.dx, -c.dx});
    mdy = std::max({mdy, c.dy, -c.dy});
  }
  int n = f.n();
  if (x0 - mdx < 0 || y0 - mdy < 0 || x1 + mdx >= n || y1 + mdy >= n)
    throw std::domain_error("convolve: support + measure extent overflows the domain");
}

}  // namespace

GranularFunction convolve_direct(const DiscreteMeasure& mu, const GranularFunction& f) {
  check_padding(mu, f);
  GranularFunction out(f.lattice());
  GridSet supp = f.support();
  int x0, y0, x1, y1;
  if (!supp.bounding_box(x0, y0, x1, y1)) return out;
  for (size_t a = 0; a < mu.cells.size(); ++a) {
    int dx = mu.cells[a].dx, dy = mu.cells[a].dy;
    double w = mu.weights[a];
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        double v = f.at(x, y);
        if (v != 0.0) out.at(x + dx, y + dy) += w * v;
      }
  }
  return out;
}

GranularFunction convolve(const DiscreteMeasure& mu, const GranularFunction& f) {
  check_padding(mu, f);
  int n = f.n();
  std::vector<double> kern(size_t(n) * n, 0.0);
  for (size_t a = 0; a < mu.cells.size(); ++a) {
    int dx = ((mu.cells[a].dx % n) + n) % n;
    int dy = ((mu.cells[a].dy % n) + n) % n;
    kern[size_t(dy) * n + dx] += mu.weights[a];
  }
  std::vector<double> conv = detail::cyclic_convolve_2d(kern, f.values(), n);
  GranularFunction out(f.lattice());
  out.values() = std::move(conv);
  return out;
}

ConvolutionPlan::ConvolutionPlan(DiscreteMeasure mu, const Lattice& lat)
    : mu_(std::move(mu)), lat_(lat) {
  int n = lat.n();
  std::vector<std::complex<double>> kern(size_t(n) * n, 0.0);
  for (size_t a = 0; a < mu_.cells.size(); ++a) {
    int dx = ((mu_.cells[a].dx % n) + n) % n;
    int dy = ((mu_.cells[a].dy % n) + n) % n;
    kern[size_t(dy) * n + dx] += mu_.weights[a];
  }
  detail::fft2(kern, n, false);
  spec_ = std::move(kern);
}

GranularFunction ConvolutionPlan::apply(const GranularFunction& f) const {
  if (!(f.lattice() == lat_)) throw std::invalid_argument("lattice mismatch");
  check_padding(mu_, f);
  int n = lat_.n();
  std::vector<std::complex<double>> fa(size_t(n) * n);
  for (size_t i = 0; i < fa.size(); ++i) fa[i] = f.values()[i];
  detail::fft2(fa, n, false);
  for (size_t i = 0; i < fa.size(); ++i) fa[i] *= spec_[i];
  detail::fft2(fa, n, true);
  GranularFunction out(lat_);
  for (size_t i = 0; i < fa.size(); ++i) out.values()[i] = fa[i].real();
  return out;
}

GranularFunction autocorrelation_kernel(int k, const Lattice& lat) {
  DiscreteMeasure mu = circle_measure(k, lat);
  int n = lat.n();
  int c = n / 2;
  double maxoff = std::ldexp(2.0, k) / lat.delta() + 4;
  if (c - maxoff < 0 || c + maxoff >= n)
    throw std::domain_error("autocorrelation_kernel: domain too small for 2^(k+1)");
  GranularFunction out(lat);
  double inv_area = 1.0 / lat.cell_area();
  for (size_t a = 0; a < mu.cells.size(); ++a)
    for (size_t b = 0; b < mu.cells.size(); ++b) {
      int x = c + mu.cells[a].dx + mu.cells[b].dx;
      int y = c + mu.cells[a].dy + mu.cells[b].dy;
      out.at(x, y) += mu.weights[a] * mu.weights[b] * inv_area;
    }
  return out;
}

bool OrientedRect::contains(double px, double py) const {
  double rx = px - cx, ry = py - cy;
  double u = rx * dir.ux() + ry * dir.uy();
  double v = -rx * dir.uy() + ry * dir.ux();
  return std::fabs(u) <= short_side / 2 && std::fabs(v) <= long_side / 2;
}

GridSet OrientedRect::rasterize(const Lattice& lat) const {
  GridSet out(lat);
  double delta = lat.delta();
  int n = lat.n();
  double rad = std::hypot(short_side, long_side) / 2;
  int ix0 = std::max(0, int(std::floor((cx - rad) / delta)));
  int ix1 = std::min(n - 1, int(std::floor((cx + rad) / delta)));
  int iy0 = std::max(0, int(std::floor((cy - rad) / delta)));
  int iy1 = std::min(n - 1, int(std::floor((cy + rad) / delta)));
  double cux = dir.ux(), cuy = dir.uy();
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x) {
      double px = (x + 0.5) * delta - cx;
      double py = (y + 0.5) * delta - cy;
      double u = px * cux + py * cuy;
      double v = -px * cuy + py * cux;
      if (u >= -short_side / 2 && u < short_side / 2 && v >= -long_side / 2 &&
          v < long_side / 2)
        out.set(x, y);
    }
  return out;
}

OrientedRect OrientedRect::dilated(double factor) const {
  OrientedRect r = *this;
  r.short_side *= factor;
  r.long_side *= factor;
  return r;
}

std::vector<KernelRectLayer> dominate_kernel(const std::vector<double>& ladder, int k,
                                             int d) {
  for (size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] > ladder[i - 1]))
      throw std::invalid_argument("dominate_kernel: ladder must be strictly increasing");
  std::vector<KernelRectLayer> layers;
  for (size_t i = 1; i < ladder.size(); ++i) {
    double chi = ladder[i], clo = ladder[i - 1];
    KernelRectLayer layer;
    layer.weight = std::ldexp(1.0, -k * (d - 1)) * std::pow(chi, -(d - 1)) *
                   std::pow(clo, d - 2);
    int count = int(std::ceil(chi / clo));
    for (int t = 0; t < count; ++t) {
      OrientedRect r;
      r.cx = r.cy = 0.0;
      r.dir.angle = std::numbers::pi * t / count;
      r.short_side = clo;
      r.long_side = chi;
      layer.rects.push_back(r);
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

double rect_layer_sum(const std::vector<KernelRectLayer>& layers, double px, double py) {
  double s = 0.0;
  for (const auto& layer : layers) {
    int cnt = 0;
    for (const auto& r : layer.rects)
      if (r.contains(px, py)) ++cnt;
    s += layer.weight * cnt;
  }
  return s;
}

}  // namespace lacmax
