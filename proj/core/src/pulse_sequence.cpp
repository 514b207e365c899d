#include "qdmux/pulse_sequence.hpp"

#include <cmath>
#include <cstdio>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"

namespace qdmux {

std::int64_t SequenceConfig::rep_period_ps() const { return to_ps(rep_period); }
std::int64_t SequenceConfig::pair_delay_ps() const { return to_ps(pair_delay); }
std::int64_t SequenceConfig::stim_delay_ps() const { return to_ps(stim_delay); }

void SequenceConfig::validate() const {
    if (!(rep_period > 0.0)) throw ConfigError("sequence.rep_period must be > 0");
    if (!(pair_delay > 0.0 && pair_delay < rep_period))
        throw ConfigError("sequence.pair_delay must satisfy 0 < pair_delay < rep_period");
    if (n_periods < 1) throw ConfigError("sequence.n_periods must be >= 1");
    if (rep_period_ps() < 1 || pair_delay_ps() < 1)
        throw ConfigError("sequence timings below the 1 ps grid");
}

std::vector<ExcitationCycle> build_sequence(const SequenceConfig& cfg) {
    cfg.validate();
    const std::int64_t rep = cfg.rep_period_ps();
    const std::int64_t pair = cfg.pair_delay_ps();
    const std::int64_t stim = cfg.stim_delay_ps();
    const Polarization first = cfg.v_branch_first ? Polarization::V : Polarization::H;
    const Polarization second = orthogonal(first);

    std::vector<ExcitationCycle> cycles;
    cycles.reserve(static_cast<std::size_t>(2 * cfg.n_periods));
    for (std::int64_t k = 0; k < cfg.n_periods; ++k) {
        const std::int64_t t0 = k * rep;
        for (int half = 0; half < 2; ++half) {
            ExcitationCycle c;
            c.tpe_time_ps = half == 0 ? t0 : t0 + pair;
            c.stim_time_ps = c.tpe_time_ps + stim;
            c.branch = half == 0 ? first : second;
            c.stim_enabled = (c.branch == Polarization::H) ? cfg.stim_enabled_h : cfg.stim_enabled_v;
            c.cycle_index = 2 * k + half;
            cycles.push_back(c);
        }
    }
    return cycles;
}

std::string sequence_warnings(const SequenceConfig& cfg, const QdParameters& qd) {
    if (cfg.pair_delay < 5.0 * qd.t1_x) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "pair_delay %.3g s is below 5*t1_x (%.3g s): residual excitation can leak "
                      "into the partner branch",
                      cfg.pair_delay, 5.0 * qd.t1_x);
        return buf;
    }
    return {};
}

}  // namespace qdmux
