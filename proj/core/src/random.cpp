#include "qdmux/random.hpp"

#include <cmath>

#include "qdmux/constants.hpp"

namespace qdmux {

// Box-Muller; hand-rolled so the draw sequence does not depend on the
// standard library's distribution implementation.
double RandomSource::normal(double mean, double sigma) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + sigma * spare_;
    }
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + sigma * r * std::cos(a);
}

}  // namespace qdmux
