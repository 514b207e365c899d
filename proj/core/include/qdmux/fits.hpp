#pragma once

#include <span>
#include <utility>

#include "qdmux/correlate.hpp"

namespace qdmux {

struct LifetimeFit {
    double t1 = 0.0;           ///< s
    double uncertainty = 0.0;  ///< s, standard error
    double amplitude = 0.0;
    double background = 0.0;
    std::int64_t fit_start_ps = 0;
    std::int64_t fit_end_ps = 0;
};

/// Least-squares fit of A*exp(-t/T1) + B to the histogram tail starting
/// one bin past the peak. The decay constant is located by a variable
/// projection line search; A and B are solved linearly at each trial T1.
LifetimeFit fit_lifetime(const CoincidenceHistogram& decay);

struct FssFit {
    double fss = 0.0;          ///< eV, peak-to-peak >= 0
    double uncertainty = 0.0;  ///< eV
    double e0 = 0.0;           ///< eV, mean line energy
    double phase = 0.0;        ///< rad
};

/// Fits E(theta) = E0 + (FSS/2)*cos(2*theta + phi) to polarization-analyzer
/// samples (angle in rad, X line energy in eV). Needs >= 8 samples spanning
/// at least pi.
FssFit fit_fss(std::span<const std::pair<double, double>> samples);

}  // namespace qdmux
