#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qdmux/time_tags.hpp"

namespace qdmux {

/// Beamsplitter-imbalance and multiphoton correction
///   HOM = (V_raw + g2) / (1 - g2) * (R^2 + T^2) / (2 R T).
/// The result may exceed 1 for inconsistent inputs; it is returned as-is.
double correct_hom(double v_raw, double g2, double r, double t);

/// Inputs of the wandering-averaged visibility. sigma is the standard
/// deviation of the Gaussian spread of the pairwise center-frequency
/// difference; per-photon wandering of s maps to sigma = sqrt(2)*s.
struct VisibilityInputs {
    double t1 = 175e-12;    ///< radiative lifetime, s
    double delta_nu = 0.0;  ///< FSS/h, Hz
    double sigma = 0.0;     ///< Hz
    double gamma = 0.0;     ///< dephasing, Hz; <= 0 means 1/t1

    double effective_gamma() const { return gamma > 0.0 ? gamma : 1.0 / t1; }
    void validate() const;
};

/// Vanishing-wandering limit gamma / (T1 * ((2 pi dnu)^2 + gamma^2)),
/// which is 1/(1 + (2 pi dnu T1)^2) for gamma = 1/T1.
double visibility_limit(double t1, double delta_nu, double gamma);

/// HOM visibility V = Re[w(z)] / (sqrt(2 pi) Sigma 2 T1) with
/// z = (2 pi dnu + i gamma) / (2 pi sqrt(2) Sigma). Below the crossover
/// sigma < max(gamma, 2 pi dnu)/1e4 the analytic limit takes over; the
/// two branches join continuously.
double visibility_wandering(const VisibilityInputs& in);

/// Dense visibility grid over lifetime x splitting, values row-major with
/// t1 as the slow axis.
struct VisibilityMap {
    std::vector<double> t1_axis;   ///< s
    std::vector<double> fss_axis;  ///< eV
    std::vector<double> values;

    double at(std::size_t i_t1, std::size_t i_fss) const {
        return values[i_t1 * fss_axis.size() + i_fss];
    }
};

struct MapSpec {
    double t1_min = 20e-12;
    double t1_max = 500e-12;
    int t1_points = 200;
    double fss_min = 0.0;
    double fss_max = 20e-6;
    int fss_points = 200;
    double sigma = 0.0;     ///< Hz
    double gamma_pd = 0.0;  ///< extra pure dephasing on top of 1/T1, Hz

    void validate() const;
};

VisibilityMap visibility_map(const MapSpec& spec, unsigned threads = 0);

/// Line cut at fixed lifetime (nearest grid row): (fss_eV, visibility).
std::vector<std::pair<double, double>> map_line_cut(const VisibilityMap& map, double t1);

/// Text tables (t1_ps, fss_ueV, visibility) / (fss_ueV, visibility).
void write_visibility_map(const std::string& path, const VisibilityMap& map, const Provenance& prov);
void write_line_cut(const std::string& path, std::span<const std::pair<double, double>> cut,
                    double t1, const Provenance& prov);

}  // namespace qdmux
