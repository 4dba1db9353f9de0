#pragma once

#include <vector>

#include "sharpk/torus.hpp"

namespace sharpk::detail {

// Per-slot phase e^{-2 pi i k (o/(2M) - 1/2)} linking FFT indices to torus coordinates.
std::vector<Complex> axis_phase(const TorusGrid& g);

}  // namespace sharpk::detail
