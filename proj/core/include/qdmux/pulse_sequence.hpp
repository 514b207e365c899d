#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdmux/qd_model.hpp"

namespace qdmux {

/// One TPE + stim pulse pair aimed at a polarization branch.
/// Times live on the 1 ps integer grid so period arithmetic is exact.
struct ExcitationCycle {
    std::int64_t tpe_time_ps = 0;
    std::int64_t stim_time_ps = 0;
    Polarization branch = Polarization::V;
    bool stim_enabled = true;
    std::int64_t cycle_index = 0;
};

/// Timeline layout: per laser period one branch fires at the period start
/// and the other pair_delay later, each stim pulse stim_delay after its
/// TPE partner.
struct SequenceConfig {
    double rep_period = 12.5e-9;
    double pair_delay = 2e-9;
    double stim_delay = 6e-12;
    std::int64_t n_periods = 1;
    bool stim_enabled_h = true;
    bool stim_enabled_v = true;
    bool v_branch_first = true;

    std::int64_t rep_period_ps() const;
    std::int64_t pair_delay_ps() const;
    std::int64_t stim_delay_ps() const;

    void validate() const;  ///< throws ConfigError
};

/// 2*n_periods cycles in strictly increasing TPE time, first branch at
/// k*rep_period, second at k*rep_period + pair_delay.
std::vector<ExcitationCycle> build_sequence(const SequenceConfig& cfg);

/// Non-fatal checks, e.g. pair_delay not >> t1_x (re-excitation risk).
/// Returns an empty string when there is nothing to report.
std::string sequence_warnings(const SequenceConfig& cfg, const QdParameters& qd);

}  // namespace qdmux
