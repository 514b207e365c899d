#pragma once

#include <complex>

namespace qdmux {

/// Faddeeva function w(z) = exp(-z^2) * erfc(-i z) for Im(z) >= 0, via a
/// rational approximation on the whole upper half-plane with a Maclaurin
/// series fallback near the origin. Relative accuracy is well below 1e-6
/// everywhere the visibility model evaluates it. Im(z) < 0 is reflected
/// through w(-z) = 2 exp(-z^2) - w(z) and may overflow for large |z|.
std::complex<double> faddeeva(std::complex<double> z);

}  // namespace qdmux
