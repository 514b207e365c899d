#include "qdmux/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"
#include "qdmux/faddeeva.hpp"
#include "qdmux/parallel.hpp"

namespace qdmux {

double correct_hom(double v_raw, double g2, double r, double t) {
    if (!(g2 >= 0.0 && g2 < 1.0)) throw ParameterError("correct_hom: g2 must be in [0,1)");
    if (!(r > 0.0 && r < 1.0 && t > 0.0 && t < 1.0))
        throw ParameterError("correct_hom: r and t must be in (0,1)");
    return (v_raw + g2) / (1.0 - g2) * (r * r + t * t) / (2.0 * r * t);
}

void VisibilityInputs::validate() const {
    if (!(t1 > 0.0)) throw ParameterError("visibility.t1 must be > 0");
    if (!(sigma >= 0.0)) throw ParameterError("visibility.sigma must be >= 0");
    if (!std::isfinite(delta_nu)) throw ParameterError("visibility.delta_nu must be finite");
    if (!(effective_gamma() > 0.0)) throw ParameterError("visibility.gamma must be > 0");
}

double visibility_limit(double t1, double delta_nu, double gamma) {
    if (!(t1 > 0.0 && gamma > 0.0)) throw ParameterError("visibility_limit: t1 and gamma must be > 0");
    const double w = 2.0 * kPi * delta_nu;
    return gamma / (t1 * (w * w + gamma * gamma));
}

double visibility_wandering(const VisibilityInputs& in) {
    in.validate();
    const double gamma = in.effective_gamma();
    const double dnu = std::abs(in.delta_nu);
    // Re[w(z)]/Sigma cancels catastrophically as Sigma -> 0; below the
    // crossover the asymptotic limit is exact to ~1e-8 already.
    const double crossover = std::max(gamma, 2.0 * kPi * dnu) * 1e-4;
    if (in.sigma < crossover) return visibility_limit(in.t1, dnu, gamma);
    const std::complex<double> z{dnu / (std::sqrt(2.0) * in.sigma),
                                 gamma / (2.0 * kPi * std::sqrt(2.0) * in.sigma)};
    const double re_w = faddeeva(z).real();
    return re_w / (std::sqrt(2.0 * kPi) * in.sigma * 2.0 * in.t1);
}

void MapSpec::validate() const {
    if (!(t1_min > 0.0 && t1_max > t1_min)) throw ParameterError("map: need 0 < t1_min < t1_max");
    if (!(fss_min >= 0.0 && fss_max > fss_min)) throw ParameterError("map: need 0 <= fss_min < fss_max");
    if (t1_points < 2 || fss_points < 2) throw ParameterError("map: need at least 2 points per axis");
    if (sigma < 0.0 || gamma_pd < 0.0) throw ParameterError("map: sigma and gamma_pd must be >= 0");
}

VisibilityMap visibility_map(const MapSpec& spec, unsigned threads) {
    spec.validate();
    VisibilityMap map;
    map.t1_axis.resize(static_cast<std::size_t>(spec.t1_points));
    map.fss_axis.resize(static_cast<std::size_t>(spec.fss_points));
    for (int i = 0; i < spec.t1_points; ++i)
        map.t1_axis[static_cast<std::size_t>(i)] =
            spec.t1_min + (spec.t1_max - spec.t1_min) * i / (spec.t1_points - 1);
    for (int j = 0; j < spec.fss_points; ++j)
        map.fss_axis[static_cast<std::size_t>(j)] =
            spec.fss_min + (spec.fss_max - spec.fss_min) * j / (spec.fss_points - 1);
    map.values.assign(map.t1_axis.size() * map.fss_axis.size(), 0.0);

    parallel_for(map.t1_axis.size(), threads, [&](std::size_t i) {
        const double t1 = map.t1_axis[i];
        const double gamma = 1.0 / t1 + spec.gamma_pd;
        for (std::size_t j = 0; j < map.fss_axis.size(); ++j) {
            VisibilityInputs in{t1, map.fss_axis[j] / kPlanckEvS, spec.sigma, gamma};
            map.values[i * map.fss_axis.size() + j] = visibility_wandering(in);
        }
    });
    return map;
}

std::vector<std::pair<double, double>> map_line_cut(const VisibilityMap& map, double t1) {
    if (map.t1_axis.empty()) throw ParameterError("line cut: empty map");
    std::size_t best = 0;
    for (std::size_t i = 1; i < map.t1_axis.size(); ++i)
        if (std::abs(map.t1_axis[i] - t1) < std::abs(map.t1_axis[best] - t1)) best = i;
    std::vector<std::pair<double, double>> cut;
    cut.reserve(map.fss_axis.size());
    for (std::size_t j = 0; j < map.fss_axis.size(); ++j)
        cut.emplace_back(map.fss_axis[j], map.at(best, j));
    return cut;
}

namespace {

void write_provenance(std::ofstream& os, const char* kind, const Provenance& prov) {
    os << "# qdmux " << kind << " v1\n";
    if (!prov.scenario_hash.empty()) os << "# scenario_hash " << prov.scenario_hash << "\n";
    os << "# seed " << prov.seed << "\n";
    for (const auto& [k, v] : prov.extra) os << "# " << k << " " << v << "\n";
}

}  // namespace

void write_visibility_map(const std::string& path, const VisibilityMap& map, const Provenance& prov) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    write_provenance(os, "visibility-map", prov);
    os << "# columns t1_ps fss_ueV visibility\n";
    char line[96];
    for (std::size_t i = 0; i < map.t1_axis.size(); ++i) {
        for (std::size_t j = 0; j < map.fss_axis.size(); ++j) {
            std::snprintf(line, sizeof line, "%.4f\t%.6f\t%.9f\n", map.t1_axis[i] * 1e12,
                          map.fss_axis[j] * 1e6, map.at(i, j));
            os << line;
        }
    }
}

void write_line_cut(const std::string& path, std::span<const std::pair<double, double>> cut,
                    double t1, const Provenance& prov) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    write_provenance(os, "line-cut", prov);
    char line[96];
    std::snprintf(line, sizeof line, "# t1_ps %.4f\n", t1 * 1e12);
    os << line << "# columns fss_ueV visibility\n";
    for (const auto& [fss, v] : cut) {
        std::snprintf(line, sizeof line, "%.6f\t%.9f\n", fss * 1e6, v);
        os << line;
    }
}

}  // namespace qdmux
