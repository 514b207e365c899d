#pragma once

#include <string>
#include <vector>

#include "qdmux/correlate.hpp"
#include "qdmux/fits.hpp"
#include "qdmux/scenario.hpp"

namespace qdmux {

/// Runs the scenario's experiment and writes its artifacts (tag files or
/// scan/map tables) into out_dir. Returns the paths written.
std::vector<std::string> run_simulate(const Scenario& s, const std::string& out_dir,
                                      unsigned threads = 0);

struct G2Analysis {
    CoincidenceHistogram histogram;
    VisibilityResult g2;
};
G2Analysis analyze_g2(const TimeTagStream& a, const TimeTagStream& b, double bin_width,
                      double span, double rep_period, double window, unsigned threads = 0);

struct HomAnalysis {
    CoincidenceHistogram co_histogram;
    CoincidenceHistogram cross_histogram;
    VisibilityResult raw;
    double corrected = 0.0;  ///< only set when g2 and splitter values are supplied
    bool has_corrected = false;
};
HomAnalysis analyze_hom(const TimeTagStream& co_a, const TimeTagStream& co_b,
                        const TimeTagStream& cross_a, const TimeTagStream& cross_b,
                        double bin_width, double span, double rep_period, double window,
                        unsigned threads = 0);

struct LifetimeAnalysis {
    CoincidenceHistogram histogram;
    LifetimeFit fit;
};
LifetimeAnalysis analyze_lifetime(const TimeTagStream& sync, const TimeTagStream& clicks,
                                  double bin_width, double span, unsigned threads = 0);

struct ReproduceOptions {
    std::string out_dir = "reproduce";
    std::uint64_t seed = 20260810;
    unsigned threads = 0;
    double scale = 1.0;  ///< scales Monte Carlo sizes; 1.0 is the full pipeline
};

/// Full pipeline: preparation-probability map, stim-delay scan, HBT and
/// HOM experiments with extracted metrics, visibility map and line cut,
/// demux budget, and a summary table comparing extracted values against
/// their targets. Deterministic: identical options give byte-identical
/// artifacts for any worker count.
void run_reproduce(const ReproduceOptions& opts);

}  // namespace qdmux
