#pragma once

#include <complex>
#include <vector>

namespace lacmax::detail {

// In-place radix-2 FFT, n a power of two.  inverse=true applies the 1/n
// scaling.  Deterministic (no runtime plan selection).
void fft(std::complex<double>* a, int n, bool inverse);

// 2-D transform of an n x n row-major array.
void fft2(std::vector<std::complex<double>>& a, int n, bool inverse);

// Cyclic convolution of two real n x n arrays: out[c] = sum_s a[s] b[c - s],
// indices mod n per axis.
std::vector<double> cyclic_convolve_2d(const std::vector<double>& a,
                                       const std::vector<double>& b, int n);

}  // namespace lacmax::detail
