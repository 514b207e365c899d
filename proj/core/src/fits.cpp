#include "qdmux/fits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"

namespace qdmux {

namespace {

struct TailData {
    std::vector<double> t;  // s, relative to the fit start
    std::vector<double> y;
};

// chi^2 of A*exp(-t/T1)+B with (A, B) solved by linear least squares
double chi2_at(const TailData& d, double t1, double* amp = nullptr, double* bg = nullptr) {
    const std::size_t n = d.t.size();
    double sff = 0.0, sf = 0.0, sfy = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = std::exp(-d.t[i] / t1);
        sff += f * f;
        sf += f;
        sfy += f * d.y[i];
        sy += d.y[i];
    }
    const double nn = static_cast<double>(n);
    const double det = sff * nn - sf * sf;
    double a = 0.0, b = 0.0;
    if (std::abs(det) > 1e-30 * std::max(1.0, sff * nn)) {
        a = (sfy * nn - sf * sy) / det;
        b = (sff * sy - sf * sfy) / det;
    } else {
        b = sy / nn;
    }
    if (amp) *amp = a;
    if (bg) *bg = b;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = d.y[i] - a * std::exp(-d.t[i] / t1) - b;
        chi2 += r * r;
    }
    return chi2;
}

}  // namespace

LifetimeFit fit_lifetime(const CoincidenceHistogram& decay) {
    decay.validate();
    const auto& counts = decay.counts;
    const std::size_t peak =
        static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    if (counts[peak] == 0) throw FitError("fit_lifetime: empty histogram");
    const std::size_t start = peak + 1;
    if (counts.size() < start + 10)
        throw FitError("fit_lifetime: need at least 10 bins past the peak");

    TailData d;
    d.t.reserve(counts.size() - start);
    d.y.reserve(counts.size() - start);
    const double t0 = to_seconds(decay.bin_center_ps(start));
    for (std::size_t i = start; i < counts.size(); ++i) {
        d.t.push_back(to_seconds(decay.bin_center_ps(i)) - t0);
        d.y.push_back(static_cast<double>(counts[i]));
    }

    // coarse log-spaced scan, then golden-section refinement
    const double bw = to_seconds(decay.bin_width_ps);
    const double range = d.t.back() - d.t.front();
    const double t1_lo = bw / 5.0;
    const double t1_hi = range * 5.0;
    double best_t1 = t1_lo;
    double best_chi2 = std::numeric_limits<double>::infinity();
    const int n_scan = 80;
    for (int k = 0; k <= n_scan; ++k) {
        const double t1 = t1_lo * std::pow(t1_hi / t1_lo, static_cast<double>(k) / n_scan);
        const double c = chi2_at(d, t1);
        if (c < best_chi2) {
            best_chi2 = c;
            best_t1 = t1;
        }
    }
    const double step = std::pow(t1_hi / t1_lo, 1.0 / n_scan);
    double lo = best_t1 / step, hi = best_t1 * step;
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - (hi - lo) * kInvPhi;
    double x2 = lo + (hi - lo) * kInvPhi;
    double f1 = chi2_at(d, x1), f2 = chi2_at(d, x2);
    while ((hi - lo) > 1e-8 * best_t1) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * kInvPhi;
            f1 = chi2_at(d, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * kInvPhi;
            f2 = chi2_at(d, x2);
        }
    }

    LifetimeFit fit;
    fit.t1 = 0.5 * (lo + hi);
    const double chi2_min = chi2_at(d, fit.t1, &fit.amplitude, &fit.background);
    fit.fit_start_ps = decay.bin_center_ps(start);
    fit.fit_end_ps = decay.bin_center_ps(counts.size() - 1);
    if (fit.amplitude <= 0.0 || fit.t1 >= t1_hi * 0.99)
        throw FitError("fit_lifetime: tail does not decay");

    // standard error from the chi^2 curvature
    const std::size_t n = d.t.size();
    if (n > 3) {
        const double h = fit.t1 * 1e-3;
        const double c_plus = chi2_at(d, fit.t1 + h);
        const double c_minus = chi2_at(d, fit.t1 - h);
        const double dd = (c_plus - 2.0 * chi2_min + c_minus) / (h * h);
        const double s2 = chi2_min / static_cast<double>(n - 3);
        fit.uncertainty = dd > 0.0 ? std::sqrt(2.0 * s2 / dd) : 0.0;
    }
    return fit;
}

FssFit fit_fss(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 8) throw DataError("fit_fss: need at least 8 samples");
    double amin = samples[0].first, amax = samples[0].first;
    for (const auto& [th, e] : samples) {
        amin = std::min(amin, th);
        amax = std::max(amax, th);
    }
    if (amax - amin < kPi - 1e-9) throw DataError("fit_fss: samples must span at least pi");

    // linear model E = e0 + a cos(2 theta) + b sin(2 theta)
    std::array<std::array<double, 3>, 3> m{};
    std::array<double, 3> rhs{};
    for (const auto& [th, e] : samples) {
        const std::array<double, 3> row{1.0, std::cos(2.0 * th), std::sin(2.0 * th)};
        for (int i = 0; i < 3; ++i) {
            rhs[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i)] * e;
            for (int j = 0; j < 3; ++j)
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                    row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(j)];
        }
    }

    // Gaussian elimination with partial pivoting; inverse needed for errors
    std::array<std::array<double, 6>, 3> aug{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) aug[i][j] = m[i][j];
        aug[i][3 + i] = 1.0;
    }
    const double scale = std::max({std::abs(m[0][0]), std::abs(m[1][1]), std::abs(m[2][2]), 1e-300});
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
        if (std::abs(aug[piv][col]) < 1e-12 * scale)
            throw FitError("fit_fss: rank-deficient sample set");
        std::swap(aug[piv], aug[col]);
        const double d = aug[col][col];
        for (int j = 0; j < 6; ++j) aug[col][j] /= d;
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = aug[r][col];
            for (int j = 0; j < 6; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    std::array<double, 3> sol{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sol[i] += aug[i][3 + j] * rhs[j];

    const double e0 = sol[0], a = sol[1], b = sol[2];
    const double amp = std::sqrt(a * a + b * b);

    FssFit fit;
    fit.e0 = e0;
    fit.fss = 2.0 * amp;
    fit.phase = std::atan2(-b, a);

    double chi2 = 0.0;
    for (const auto& [th, e] : samples) {
        const double r = e - (e0 + a * std::cos(2.0 * th) + b * std::sin(2.0 * th));
        chi2 += r * r;
    }
    const double dof = static_cast<double>(samples.size()) - 3.0;
    const double s2 = dof > 0.0 ? chi2 / dof : 0.0;
    const double var_a = s2 * aug[1][4];
    const double var_b = s2 * aug[2][5];
    const double cov_ab = s2 * aug[1][5];
    if (amp > 0.0) {
        fit.uncertainty =
            2.0 * std::sqrt(std::max(0.0, (a * a * var_a + b * b * var_b + 2.0 * a * b * cov_ab))) /
            amp;
    } else {
        fit.uncertainty = 2.0 * std::sqrt(std::max(var_a, var_b));
    }
    return fit;
}

}  // namespace qdmux
