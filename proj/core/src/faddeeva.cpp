#include "qdmux/faddeeva.hpp"

#include <array>
#include <cmath>

#include "qdmux/constants.hpp"

namespace qdmux {

namespace {

// Rational approximation on the upper half-plane (Weideman's method,
// N = 48): w(z) ~= 2 P(Z)/(L - i z)^2 + (1/sqrt(pi))/(L - i z) with
// Z = (L + i z)/(L - i z). Coefficients precomputed at full double
// precision; highest degree first.
constexpr double kL = 5.825901260487881;
constexpr std::array<double, 48> kPoly = {
    -3.70074341541718826e-17, 3.90809708090504099e-17,  8.91304535964125145e-17,
    4.33646987676311602e-17,  2.10357809007447985e-17,  7.06831347963979208e-20,
    3.85910504816624698e-16,  7.25379754852292609e-16,  -1.87923282206915558e-15,
    -5.23915859509534328e-15, 9.52753636075451554e-15,  4.23425555842355866e-14,
    -3.19334159628465632e-14, -3.22775731097254591e-13, -9.65501738984251051e-14,
    2.21541877720001645e-12,  3.42533409044184144e-12,  -1.19354512668394108e-11,
    -4.38658676752703712e-11, 2.16220023479657394e-11,  3.87942207730320342e-10,
    5.77528985547910890e-10,  -2.01565992731615496e-09, -9.59625471307884432e-09,
    -6.38680992890150548e-09, 6.92700063602607607e-08,  2.65494920068709391e-07,
    1.94943374672414598e-07,  -1.94456577900989678e-06, -9.47563824045082754e-06,
    -1.90544616191120193e-05, 1.75063163711175849e-05,  3.07869136408890425e-04,
    1.48649912519561826e-03,  5.12581354822568610e-03,  1.45468377922374024e-02,
    3.58613699833766827e-02,  7.89558955347000463e-02,  1.57863304433804696e-01,
    2.89799890796048121e-01,  4.92257023913990566e-01,  7.78062419148422779e-01,
    1.14922046453977811e+00,  1.59130846911780033e+00,  2.07075997167429149e+00,
    2.53704848744469036e+00,  2.93044989562375635e+00,  3.19406458939507099e+00,
};

std::complex<double> faddeeva_rational(std::complex<double> z) {
    const std::complex<double> d = kL - std::complex<double>(0.0, 1.0) * z;
    const std::complex<double> big_z = (kL + std::complex<double>(0.0, 1.0) * z) / d;
    std::complex<double> p = kPoly[0];
    for (std::size_t i = 1; i < kPoly.size(); ++i) p = p * big_z + kPoly[i];
    constexpr double inv_sqrt_pi = 0.5641895835477562869;
    return 2.0 * p / (d * d) + inv_sqrt_pi / d;
}

// Maclaurin series near the origin: even part sums to exp(-z^2), the odd
// part is i z * sum_m (-z^2)^m / Gamma(m + 3/2).
std::complex<double> faddeeva_series(std::complex<double> z) {
    const std::complex<double> mz2 = -z * z;
    constexpr double inv_gamma_3_2 = 1.1283791670955125739;  // 1/Gamma(3/2) = 2/sqrt(pi)
    std::complex<double> term = inv_gamma_3_2;
    std::complex<double> sum = term;
    for (int m = 1; m <= 24; ++m) {
        term *= mz2 / (m + 0.5);
        sum += term;
        if (std::norm(term) < 1e-36 * std::norm(sum)) break;
    }
    return std::exp(mz2) + std::complex<double>(0.0, 1.0) * z * sum;
}

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
    if (z.imag() < 0.0) {
        // w(-z) = 2 exp(-z^2) - w(z); exp may overflow far from the axis
        const std::complex<double> zr(-z.real(), -z.imag());
        return 2.0 * std::exp(-z * z) - faddeeva(zr);
    }
    if (std::norm(z) < 0.0625) return faddeeva_series(z);
    return faddeeva_rational(z);
}

}  // namespace qdmux
