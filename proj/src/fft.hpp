#pragma once

#include <complex>
#include <cstddef>

namespace tdhfb::detail {

enum class Direction { forward, backward };

// Unnormalized FFTW transforms over d-dimensional M^d blocks. The backward
// transform is not scaled; callers divide by M^d (per transformed axis group).

// Each of `count` contiguous columns of length M^d.
void fft_columns(int dim, int M, std::complex<double>* data, std::ptrdiff_t count, Direction dir);
// Second index of an n x n column-major kernel (n = M^d), for every row.
void fft_rows(int dim, int M, std::complex<double>* data, Direction dir);
// Both indices of an n x n kernel at once.
void fft_both(int dim, int M, std::complex<double>* data, Direction dir);

// Version string of the linked FFT library.
const char* fft_library_version();

}  // namespace tdhfb::detail
