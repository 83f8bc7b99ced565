#include "fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lacmax::detail {

namespace {

// twiddle table per size, built on demand; guarded by being per-thread safe
// only through construction order (library is single-threaded per operation)
const std::vector<std::complex<double>>& twiddles(int n) {
  static std::vector<std::vector<std::complex<double>>> cache;
  size_t idx = 0;
  int m = n;
  while (m > 1) {
    ++idx;
    m >>= 1;
  }
  if (cache.size() <= idx) cache.resize(idx + 1);
  auto& t = cache[idx];
  if (t.empty()) {
    t.resize(n / 2);
    for (int i = 0; i < n / 2; ++i) {
      double ang = -2.0 * std::numbers::pi * i / n;
      t[i] = {std::cos(ang), std::sin(ang)};
    }
  }
  return t;
}

}  // namespace

void fft(std::complex<double>* a, int n, bool inverse) {
  if (n <= 1) return;
  if (n & (n - 1)) throw std::invalid_argument("fft size must be a power of 2");
  // bit reversal
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& tw = twiddles(n);
  for (int len = 2; len <= n; len <<= 1) {
    int step = n / len;
    for (int i = 0; i < n; i += len) {
      for (int k = 0; k < len / 2; ++k) {
        std::complex<double> w = tw[size_t(k) * step];
        if (inverse) w = std::conj(w);
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] *= inv;
  }
}

void fft2(std::vector<std::complex<double>>& a, int n, bool inverse) {
  for (int y = 0; y < n; ++y) fft(a.data() + size_t(y) * n, n, inverse);
  std::vector<std::complex<double>> col(n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) col[y] = a[size_t(y) * n + x];
    fft(col.data(), n, inverse);
    for (int y = 0; y < n; ++y) a[size_t(y) * n + x] = col[y];
  }
}

std::vector<double> cyclic_convolve_2d(const std::vector<double>& a,
                                       const std::vector<double>& b, int n) {
  std::vector<std::complex<double>> fa(size_t(n) * n), fb(size_t(n) * n);
  for (size_t i = 0; i < fa.size(); ++i) fa[i] = a[i];
  for (size_t i = 0; i < fb.size(); ++i) fb[i] = b[i];
  fft2(fa, n, false);
  fft2(fb, n, false);
  for (size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  fft2(fa, n, true);
  std::vector<double> out(size_t(n) * n);
  for (size_t i = 0; i < out.size(); ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace lacmax::detail
