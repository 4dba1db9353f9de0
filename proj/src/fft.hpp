#pragma once

#include <complex>
#include <span>

namespace sharpk::detail {

// Unnormalized multidimensional DFT over a cube of side `points`.
// sign = -1 computes sum_j x_j e^{-2 pi i j.k/M}, sign = +1 the conjugate kernel.
void fft_cube(std::span<std::complex<double>> data, int dim, int points, int sign);

}  // namespace sharpk::detail
