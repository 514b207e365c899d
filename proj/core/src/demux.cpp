#include "qdmux/demux.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "qdmux/errors.hpp"

namespace qdmux {

const char* to_string(LimitingFactor f) {
    switch (f) {
        case LimitingFactor::RepRate: return "rep_rate";
        case LimitingFactor::EomRate: return "eom_rate";
        case LimitingFactor::Lifetime: return "lifetime";
    }
    return "?";
}

void DemuxScheme::validate() const {
    if (n_modes < 1) throw ParameterError("budget.n_modes must be >= 1");
    if (!(rep_rate > 0.0)) throw ParameterError("budget.rep_rate must be > 0");
    if (!(source_efficiency >= 0.0 && source_efficiency <= 1.0))
        throw ParameterError("budget.source_efficiency must be in [0,1]");
    if (eom_loss_db < 0.0) throw ParameterError("budget.eom_loss_db must be >= 0");
    if (!(eom_max_rate > 0.0)) throw ParameterError("budget.eom_max_rate must be > 0");
    if (!(t1_x > 0.0)) throw ParameterError("budget.t1_x must be > 0");
}

namespace {

int tree_depth(int n_modes) {
    int d = 0;
    int span = 1;
    while (span < n_modes) {
        span *= 2;
        ++d;
    }
    return d;  // ceil(log2(n_modes))
}

}  // namespace

DemuxReport multiphoton_rate(const DemuxScheme& s) {
    s.validate();
    DemuxReport rep;

    const int full_depth = tree_depth(s.n_modes);
    const int depth = s.passive_doubling ? std::max(0, full_depth - 1) : full_depth;
    // a binary tree with n leaves has n-1 switches; the passive split
    // replaces the root one and its two subtrees keep n-2
    const int count = s.passive_doubling ? std::max(0, s.n_modes - 2) : s.n_modes - 1;
    rep.eom_depth = depth;
    rep.eom_count = count;
    rep.lifetime_clock_bound = 1.0 / (5.0 * s.t1_x);

    // The root switch toggles at half the incoming rate; a passive first
    // split halves the rate entering the tree once more.
    double clock_ceiling = std::numeric_limits<double>::infinity();
    const double root_divisor = s.passive_doubling ? 4.0 : 2.0;
    if (count > 0) clock_ceiling = s.eom_max_rate * root_divisor;

    rep.effective_clock = std::min(s.rep_rate, clock_ceiling);
    rep.limiting_factor =
        clock_ceiling < s.rep_rate ? LimitingFactor::EomRate : LimitingFactor::RepRate;
    if (rep.effective_clock > rep.lifetime_clock_bound) rep.limiting_factor = LimitingFactor::Lifetime;

    rep.first_eom_rate = count > 0 ? rep.effective_clock / root_divisor : 0.0;
    rep.per_mode_efficiency = s.source_efficiency * std::pow(10.0, -depth * s.eom_loss_db / 10.0);
    rep.rate = rep.effective_clock / s.n_modes * std::pow(rep.per_mode_efficiency, s.n_modes);
    return rep;
}

std::string budget_report_json(const DemuxScheme& s) {
    auto fill = [](char* buf, std::size_t n, const DemuxScheme& sch, const DemuxReport& r) {
        std::snprintf(buf, n,
                      "    \"n_modes\": %d,\n"
                      "    \"passive_doubling\": %s,\n"
                      "    \"eom_count\": %d,\n"
                      "    \"eom_depth\": %d,\n"
                      "    \"effective_clock_hz\": %.6e,\n"
                      "    \"first_eom_rate_hz\": %.6e,\n"
                      "    \"per_mode_efficiency\": %.6e,\n"
                      "    \"rate_hz\": %.6e,\n"
                      "    \"lifetime_clock_bound_hz\": %.6e,\n"
                      "    \"limiting_factor\": \"%s\"\n",
                      sch.n_modes, sch.passive_doubling ? "true" : "false", r.eom_count, r.eom_depth,
                      r.effective_clock, r.first_eom_rate, r.per_mode_efficiency, r.rate,
                      r.lifetime_clock_bound, to_string(r.limiting_factor));
    };

    const DemuxReport rep = multiphoton_rate(s);
    char body[1024];
    fill(body, sizeof body, s, rep);
    std::string out = "{\n  \"scheme\": {\n";
    out += body;
    out += "  }";
    if (s.passive_doubling) {
        DemuxScheme active = s;
        active.passive_doubling = false;
        const DemuxReport arep = multiphoton_rate(active);
        fill(body, sizeof body, active, arep);
        out += ",\n  \"active_equivalent\": {\n";
        out += body;
        out += "  }";
        char ratio[64];
        std::snprintf(ratio, sizeof ratio, ",\n  \"rate_ratio_vs_active\": %.6f\n",
                      arep.rate > 0.0 ? rep.rate / arep.rate : 0.0);
        out += ratio;
    } else {
        out += "\n";
    }
    out += "}\n";
    return out;
}

}  // namespace qdmux
