#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qdmux/time_tags.hpp"

namespace qdmux {

/// Binned time-difference counts, delays on the half-open window
/// [min_delay, max_delay) in integer picoseconds.
struct CoincidenceHistogram {
    std::int64_t bin_width_ps = 50;
    std::int64_t min_delay_ps = 0;
    std::int64_t max_delay_ps = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t total_pairs = 0;

    std::size_t bin_count() const { return counts.size(); }
    std::int64_t bin_center_ps(std::size_t i) const {
        return min_delay_ps + static_cast<std::int64_t>(i) * bin_width_ps + bin_width_ps / 2;
    }
    void validate() const;
};

/// Counts all pairs (t_b - t_a) strictly inside (-span, span), binned by
/// floor((d + span)/bin_width). Linear two-pointer sweep over the sorted
/// streams, O(N + M + pairs). Passing the same object twice is an
/// autocorrelation and skips self-pairs. Chunked over `threads` workers
/// with bit-identical output for any worker count.
CoincidenceHistogram cross_correlate(const TimeTagStream& a, const TimeTagStream& b,
                                     std::int64_t bin_width_ps, std::int64_t span_ps,
                                     unsigned threads = 1);

/// Sum of counts whose bin centers fall in [center - window/2, center + window/2).
double window_area(const CoincidenceHistogram& h, std::int64_t center_ps, std::int64_t window_ps);

/// Extracted figure of merit with Poissonian uncertainty.
struct VisibilityResult {
    double value = 0.0;
    double uncertainty = 0.0;
    double window = 0.0;  ///< s
    std::map<std::string, double> peak_areas;
};

/// g2(0) as central peak area over the mean of the first side peaks at
/// +-rep_period, 1 ns integration window by default.
VisibilityResult extract_g2(const CoincidenceHistogram& h, double rep_period = 12.5e-9,
                            double window = 1e-9);

/// Raw HOM visibility 1 - A_co(0)/A_cross(0) after normalizing each
/// histogram by its side peaks at +-2*rep_period (outside the interference
/// structure), Poissonian errors.
VisibilityResult extract_hom_visibility(const CoincidenceHistogram& co,
                                        const CoincidenceHistogram& cross, double window = 1e-9,
                                        double rep_period = 12.5e-9);

/// Two-column text table (delay_ps, counts) with a provenance header.
void write_histogram(const std::string& path, const CoincidenceHistogram& h, const Provenance& prov);
CoincidenceHistogram read_histogram(const std::string& path, Provenance* prov = nullptr);

}  // namespace qdmux
