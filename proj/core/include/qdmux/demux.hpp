#pragma once

#include <string>

namespace qdmux {

enum class LimitingFactor { RepRate, EomRate, Lifetime };

const char* to_string(LimitingFactor f);

/// Demultiplexing scheme under comparison: active binary EOM tree,
/// passive excitation-side polarization doubling, or the hybrid of both.
struct DemuxScheme {
    int n_modes = 2;
    double rep_rate = 160e6;          ///< Hz, photon generation clock offered by the source
    double source_efficiency = 0.5;   ///< per shot, end-to-end without EOMs
    double eom_loss_db = 3.0;         ///< per EOM traversal
    double eom_max_rate = 1e9;        ///< Hz, fastest available switch
    bool passive_doubling = false;    ///< excitation-side H/V split provides the first layer
    double t1_x = 175e-12;            ///< s, sets the physical clock ceiling

    void validate() const;
};

struct DemuxReport {
    double rate = 0.0;                 ///< n-fold coincidence rate, Hz
    LimitingFactor limiting_factor = LimitingFactor::RepRate;
    int eom_count = 0;                 ///< total switches in the tree
    int eom_depth = 0;                 ///< traversals per photon
    double first_eom_rate = 0.0;       ///< Hz required of the fastest switch (0 if none)
    double effective_clock = 0.0;      ///< Hz
    double per_mode_efficiency = 0.0;
    double lifetime_clock_bound = 0.0; ///< Hz, 1/(5*t1_x)
};

/// n-fold coincidence rate = clock/n * eff^n with clock capped by the
/// fastest-EOM requirement (clock/2 active, clock/4 when the passive split
/// feeds the tree) and eff = source_efficiency * 10^(-depth*loss_db/10).
/// A clock above 1/(5*t1_x) is flagged as lifetime-limited, never silent.
DemuxReport multiphoton_rate(const DemuxScheme& s);

/// JSON report of one scheme (and its active counterpart when passive).
std::string budget_report_json(const DemuxScheme& s);

}  // namespace qdmux
