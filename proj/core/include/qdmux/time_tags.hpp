#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qdmux {

struct DetectorModel {
    double efficiency = 0.8;
    double jitter_sigma = 10e-12;  ///< Gaussian timing jitter, s
    double dark_rate = 100.0;      ///< Hz
    double dead_time = 0.0;        ///< s

    void validate() const;
};

struct BeamsplitterParams {
    double r = 0.5;  ///< reflectance
    double t = 0.5;  ///< transmittance, r + t = 1

    void validate() const;
};

/// Sorted detection timestamps of one channel, integer picoseconds.
struct TimeTagStream {
    int channel = 0;
    std::string label;
    std::vector<std::int64_t> tags;
    double duration = 0.0;  ///< s

    std::size_t size() const { return tags.size(); }
    void validate_sorted() const;  ///< throws DataError
};

/// Provenance carried by every artifact so a file can be regenerated.
struct Provenance {
    std::string scenario_hash;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> extra;
};

/// Text tag-file format: '#'-prefixed header (seed, scenario hash,
/// duration, channel labels) followed by "channel<TAB>timestamp_ps" rows
/// merged in time order.
void write_tag_streams(const std::string& path, const Provenance& prov,
                       std::span<const TimeTagStream> streams);

std::vector<TimeTagStream> read_tag_streams(const std::string& path, Provenance* prov = nullptr);

}  // namespace qdmux
