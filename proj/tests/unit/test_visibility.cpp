#include <doctest.h>

#include <cmath>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"
#include "qdmux/random.hpp"
#include "qdmux/visibility.hpp"

using namespace qdmux;

TEST_CASE("correct_hom reproduces the corrected visibilities") {
    CHECK(std::abs(correct_hom(0.876, 0.028, 0.47, 0.53) - 0.937) < 0.001);
    CHECK(std::abs(correct_hom(0.840, 0.022, 0.47, 0.53) - 0.90) < 0.015);
}

TEST_CASE("correct_hom identity for an ideal splitter and single photons") {
    for (double v : {0.0, 0.3, 0.876, 1.0})
        CHECK(correct_hom(v, 0.0, 0.5, 0.5) == doctest::Approx(v).epsilon(1e-14));
}

TEST_CASE("correct_hom is monotone in v_raw and g2, minimal at a balanced splitter") {
    double prev = -1.0;
    for (double v = 0.0; v <= 1.0; v += 0.05) {
        const double c = correct_hom(v, 0.02, 0.47, 0.53);
        CHECK(c > prev);
        prev = c;
    }
    prev = -1.0;
    for (double g = 0.0; g <= 0.5; g += 0.02) {
        const double c = correct_hom(0.8, g, 0.47, 0.53);
        CHECK(c > prev);
        prev = c;
    }
    const double balanced = correct_hom(0.8, 0.02, 0.5, 0.5);
    for (double r = 0.05; r < 0.99; r += 0.05) {
        if (std::abs(r - 0.5) < 1e-12) continue;
        CHECK(correct_hom(0.8, 0.02, r, 1.0 - r) > balanced);
    }
}

TEST_CASE("correct_hom rejects g2 >= 1") {
    CHECK_THROWS_AS(correct_hom(0.8, 1.0, 0.5, 0.5), ParameterError);
    CHECK_THROWS_AS(correct_hom(0.8, 0.1, 0.0, 1.0), ParameterError);
}

TEST_CASE("visibility_limit values") {
    const double dnu = 7.0e-6 / kPlanckEvS;  // 1.6926 GHz
    CHECK(visibility_limit(170e-12, 0.0, 1.0 / 170e-12) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(visibility_limit(170e-12, dnu, 1.0 / 170e-12) - 0.234) < 1e-3);
    CHECK(std::abs(visibility_limit(175e-12, dnu, 1.0 / 175e-12) - 0.224) < 1e-3);
}

TEST_CASE("visibility_wandering matches the paper's 25% bound at sigma -> 0") {
    VisibilityInputs in;
    in.t1 = 170e-12;
    in.delta_nu = 7.0e-6 / kPlanckEvS;
    in.sigma = 0.0;
    CHECK(std::abs(visibility_wandering(in) - 0.25) < 0.03);
    in.delta_nu = 0.0;
    CHECK(visibility_wandering(in) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("visibility_wandering equals the Monte Carlo wandering oracle") {
    // Gaussian-averaged pairwise overlap: Delta ~ N(delta_nu, sigma),
    // each pair weighted by the lifetime-limited Lorentzian overlap.
    VisibilityInputs in;
    in.t1 = 170e-12;
    in.delta_nu = 1.693e9;
    in.sigma = 0.5e9;
    const double gamma = in.effective_gamma();
    CHECK(gamma == doctest::Approx(1.0 / 170e-12));

    RandomSource rng(20260810);
    const int n = 10'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = in.delta_nu + rng.normal(0.0, in.sigma);
        const double x = 2.0 * kPi * d * in.t1;
        const double o2 = 1.0 / (1.0 + x * x);
        sum += o2;
        sum2 += o2 * o2;
    }
    const double mc = sum / n;
    const double mc_err = std::sqrt((sum2 / n - mc * mc) / n);
    const double model = visibility_wandering(in);
    CHECK(std::abs(mc - model) < 3.0 * mc_err);
}

TEST_CASE("visibility_wandering joins its analytic limit continuously") {
    VisibilityInputs in;
    in.t1 = 175e-12;
    in.delta_nu = 7.0e-6 / kPlanckEvS;
    const double gamma = in.effective_gamma();
    const double crossover = std::max(gamma, 2.0 * kPi * in.delta_nu) * 1e-4;
    VisibilityInputs above = in, below = in;
    above.sigma = crossover * (1.0 + 1e-7);
    below.sigma = crossover * (1.0 - 1e-7);
    const double va = visibility_wandering(above);
    const double vb = visibility_wandering(below);
    CHECK(std::abs(va - vb) / vb < 1e-6);
}

TEST_CASE("visibility_wandering converges to visibility_limit as sigma -> 0") {
    for (double t1 : {20e-12, 175e-12, 500e-12}) {
        for (double fss_uev : {0.5, 7.0, 20.0}) {
            const double dnu = fss_uev * 1e-6 / kPlanckEvS;
            const double gamma = 1.0 / t1;
            VisibilityInputs in{t1, dnu, gamma * 1e-3, gamma};
            const double limit = visibility_limit(t1, dnu, gamma);
            CHECK(std::abs(visibility_wandering(in) - limit) / limit < 1e-3);
        }
    }
}

TEST_CASE("visibility_wandering is symmetric in the sign of the detuning") {
    VisibilityInputs plus{175e-12, 1.7e9, 0.4e9, 0.0};
    VisibilityInputs minus = plus;
    minus.delta_nu = -plus.delta_nu;
    CHECK(visibility_wandering(plus) == doctest::Approx(visibility_wandering(minus)).epsilon(1e-14));
}

TEST_CASE("visibility map: unity at zero splitting, monotone, line cut at 25%") {
    MapSpec spec;
    spec.t1_points = 60;
    spec.fss_points = 60;
    const auto map = visibility_map(spec, 2);
    for (std::size_t i = 0; i < map.t1_axis.size(); ++i)
        CHECK(std::abs(map.at(i, 0) - 1.0) < 1e-9);
    for (std::size_t i = 0; i < map.t1_axis.size(); ++i)
        for (std::size_t j = 1; j < map.fss_axis.size(); ++j)
            CHECK(map.at(i, j) < map.at(i, j - 1));
    for (std::size_t j = 1; j < map.fss_axis.size(); ++j)
        for (std::size_t i = 1; i < map.t1_axis.size(); ++i)
            CHECK(map.at(i, j) < map.at(i - 1, j));

    const auto cut = map_line_cut(map, 170e-12);
    double best_v = 1.0, best_d = 1.0;
    for (const auto& [fss, v] : cut) {
        if (std::abs(fss - 7.0e-6) < best_d) {
            best_d = std::abs(fss - 7.0e-6);
            best_v = v;
        }
    }
    CHECK(std::abs(best_v - 0.25) < 0.03);
}

TEST_CASE("visibility_wandering stays in (0, 1] over a broad grid") {
    for (double t1 : {20e-12, 100e-12, 500e-12})
        for (double dnu : {0.0, 1e9, 5e9})
            for (double sigma : {0.0, 1e6, 1e9, 1e11}) {
                VisibilityInputs in{t1, dnu, sigma, 0.0};
                const double v = visibility_wandering(in);
                CHECK(v > 0.0);
                CHECK(v <= 1.0 + 1e-12);
            }
}
