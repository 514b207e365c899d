#include "qdmux/correlate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"
#include "qdmux/parallel.hpp"

namespace qdmux {

void CoincidenceHistogram::validate() const {
    if (bin_width_ps <= 0) throw DataError("histogram bin width must be positive");
    if (max_delay_ps <= min_delay_ps) throw DataError("histogram delay range is empty");
    const std::int64_t range = max_delay_ps - min_delay_ps;
    if (range % bin_width_ps != 0 ||
        counts.size() != static_cast<std::size_t>(range / bin_width_ps))
        throw DataError("histogram bin count does not match its delay range");
}

CoincidenceHistogram cross_correlate(const TimeTagStream& a, const TimeTagStream& b,
                                     std::int64_t bin_width_ps, std::int64_t span_ps,
                                     unsigned threads) {
    if (bin_width_ps <= 0 || span_ps <= 0) throw DataError("correlate: bin width and span must be > 0");
    if ((2 * span_ps) % bin_width_ps != 0)
        throw DataError("correlate: span must be a multiple of the bin width");
    a.validate_sorted();
    if (&a != &b) b.validate_sorted();

    CoincidenceHistogram h;
    h.bin_width_ps = bin_width_ps;
    h.min_delay_ps = -span_ps;
    h.max_delay_ps = span_ps;
    const std::size_t n_bins = static_cast<std::size_t>(2 * span_ps / bin_width_ps);
    h.counts.assign(n_bins, 0);

    const auto& ta = a.tags;
    const auto& tb = b.tags;
    if (ta.empty() || tb.empty()) return h;
    const bool self = (&a == &b);

    threads = resolve_thread_count(threads);
    const std::size_t chunk_size = 1 << 16;
    const std::size_t n_chunks = (ta.size() + chunk_size - 1) / chunk_size;
    std::vector<std::vector<std::uint64_t>> partial(n_chunks);

    parallel_for(n_chunks, threads, [&](std::size_t c) {
        auto& counts = partial[c];
        counts.assign(n_bins, 0);
        const std::size_t i0 = c * chunk_size;
        const std::size_t i1 = std::min(ta.size(), i0 + chunk_size);
        // each chunk scans its own window into b
        std::size_t lo = static_cast<std::size_t>(
            std::lower_bound(tb.begin(), tb.end(), ta[i0] - span_ps + 1) - tb.begin());
        std::size_t hi = lo;
        for (std::size_t i = i0; i < i1; ++i) {
            const std::int64_t t = ta[i];
            while (lo < tb.size() && tb[lo] < t - span_ps + 1) ++lo;
            if (hi < lo) hi = lo;
            while (hi < tb.size() && tb[hi] < t + span_ps) ++hi;
            for (std::size_t j = lo; j < hi; ++j) {
                if (self && j == i) continue;
                const std::int64_t d = tb[j] - t;
                counts[static_cast<std::size_t>((d + span_ps) / bin_width_ps)]++;
            }
        }
    });

    for (const auto& counts : partial)
        if (!counts.empty())
            for (std::size_t k = 0; k < n_bins; ++k) h.counts[k] += counts[k];
    for (const auto c : h.counts) h.total_pairs += c;
    return h;
}

double window_area(const CoincidenceHistogram& h, std::int64_t center_ps, std::int64_t window_ps) {
    const std::int64_t wlo = center_ps - window_ps / 2;
    const std::int64_t whi = center_ps + window_ps / 2;
    double area = 0.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const std::int64_t c = h.bin_center_ps(i);
        if (c >= wlo && c < whi) area += static_cast<double>(h.counts[i]);
    }
    return area;
}

VisibilityResult extract_g2(const CoincidenceHistogram& h, double rep_period, double window) {
    h.validate();
    const std::int64_t rep_ps = to_ps(rep_period);
    const std::int64_t win_ps = to_ps(window);
    if (h.min_delay_ps > -(rep_ps + win_ps / 2) || h.max_delay_ps < rep_ps + win_ps / 2)
        throw DataError("extract_g2: histogram span does not cover the first side peaks");
    const double center = window_area(h, 0, win_ps);
    const double side_m = window_area(h, -rep_ps, win_ps);
    const double side_p = window_area(h, rep_ps, win_ps);
    const double side_sum = side_m + side_p;
    if (side_sum <= 0.0) throw FitError("extract_g2: degenerate normalization, empty side peaks");

    VisibilityResult r;
    r.window = window;
    r.peak_areas = {{"center", center}, {"side_minus", side_m}, {"side_plus", side_p}};
    r.value = 2.0 * center / side_sum;
    // Poisson propagation of the three areas
    r.uncertainty = std::sqrt(4.0 * center / (side_sum * side_sum) * (1.0 + center / side_sum));
    return r;
}

VisibilityResult extract_hom_visibility(const CoincidenceHistogram& co,
                                        const CoincidenceHistogram& cross, double window,
                                        double rep_period) {
    co.validate();
    cross.validate();
    const std::int64_t win_ps = to_ps(window);
    const std::int64_t norm_ps = 2 * to_ps(rep_period);

    const double a_co = window_area(co, 0, win_ps);
    const double a_cross = window_area(cross, 0, win_ps);
    // matched far side peaks cancel acquisition-time differences
    const double n_co = window_area(co, -norm_ps, win_ps) + window_area(co, norm_ps, win_ps);
    const double n_cross =
        window_area(cross, -norm_ps, win_ps) + window_area(cross, norm_ps, win_ps);
    if (a_cross <= 0.0 || n_co <= 0.0 || n_cross <= 0.0)
        throw FitError("extract_hom_visibility: degenerate normalization");

    const double ratio = (a_co / n_co) / (a_cross / n_cross);
    VisibilityResult r;
    r.window = window;
    r.value = 1.0 - ratio;
    r.peak_areas = {{"co_center", a_co},
                    {"cross_center", a_cross},
                    {"co_norm", n_co},
                    {"cross_norm", n_cross}};
    double var = 0.0;
    if (a_co > 0.0) var += ratio * ratio / a_co;
    var += ratio * ratio / a_cross;
    var += ratio * ratio / n_co;
    var += ratio * ratio / n_cross;
    r.uncertainty = std::sqrt(var);
    return r;
}

void write_histogram(const std::string& path, const CoincidenceHistogram& h, const Provenance& prov) {
    h.validate();
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os << "# qdmux histogram v1\n";
    if (!prov.scenario_hash.empty()) os << "# scenario_hash " << prov.scenario_hash << "\n";
    os << "# seed " << prov.seed << "\n";
    os << "# bin_ps " << h.bin_width_ps << "\n";
    os << "# min_delay_ps " << h.min_delay_ps << "\n";
    os << "# max_delay_ps " << h.max_delay_ps << "\n";
    os << "# total_pairs " << h.total_pairs << "\n";
    for (const auto& [k, v] : prov.extra) os << "# " << k << " " << v << "\n";
    os << "# columns delay_ps counts\n";
    char line[64];
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        std::snprintf(line, sizeof line, "%lld\t%llu\n",
                      static_cast<long long>(h.bin_center_ps(i)),
                      static_cast<unsigned long long>(h.counts[i]));
        os << line;
    }
}

CoincidenceHistogram read_histogram(const std::string& path, Provenance* prov) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path);
    CoincidenceHistogram h;
    std::vector<std::uint64_t> counts;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "bin_ps") hs >> h.bin_width_ps;
            else if (key == "min_delay_ps") hs >> h.min_delay_ps;
            else if (key == "max_delay_ps") hs >> h.max_delay_ps;
            else if (key == "total_pairs") hs >> h.total_pairs;
            else if (key == "seed" && prov) hs >> prov->seed;
            else if (key == "scenario_hash" && prov) hs >> prov->scenario_hash;
            continue;
        }
        std::istringstream row(line);
        long long delay = 0;
        unsigned long long c = 0;
        row >> delay >> c;
        counts.push_back(c);
    }
    h.counts = std::move(counts);
    h.validate();
    return h;
}

}  // namespace qdmux
