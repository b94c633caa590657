#pragma once

#include <complex>

namespace scratchwave {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz), valid for Im z >= 0.
// Relative accuracy is better than 1e-12 over the upper half plane.
std::complex<double> faddeeva_upper(std::complex<double> z);

// Complex error function assembled from faddeeva_upper. Overflows for large
// |Im z|; callers needing scaled products should use faddeeva_upper directly.
std::complex<double> erf_complex(std::complex<double> z);

}  // namespace scratchwave
