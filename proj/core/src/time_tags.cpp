#include "qdmux/time_tags.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"

namespace qdmux {

void DetectorModel::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw ParameterError("detector.efficiency must be in [0,1]");
    if (jitter_sigma < 0.0) throw ParameterError("detector.jitter_sigma must be >= 0");
    if (dark_rate < 0.0) throw ParameterError("detector.dark_rate must be >= 0");
    if (dead_time < 0.0) throw ParameterError("detector.dead_time must be >= 0");
}

void BeamsplitterParams::validate() const {
    if (!(r > 0.0 && r < 1.0 && t > 0.0 && t < 1.0))
        throw ParameterError("beamsplitter.r and .t must be in (0,1)");
    if (std::abs(r + t - 1.0) > 1e-9) throw ParameterError("beamsplitter.r + t must equal 1");
}

void TimeTagStream::validate_sorted() const {
    for (std::size_t i = 1; i < tags.size(); ++i)
        if (tags[i] < tags[i - 1])
            throw DataError("tag stream channel " + std::to_string(channel) + " is not sorted");
}

void write_tag_streams(const std::string& path, const Provenance& prov,
                       std::span<const TimeTagStream> streams) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os << "# qdmux tags v1\n";
    if (!prov.scenario_hash.empty()) os << "# scenario_hash " << prov.scenario_hash << "\n";
    os << "# seed " << prov.seed << "\n";
    std::int64_t duration_ps = 0;
    for (const auto& s : streams) duration_ps = std::max(duration_ps, to_ps(s.duration));
    os << "# duration_ps " << duration_ps << "\n";
    for (const auto& s : streams)
        os << "# channel " << s.channel << " " << (s.label.empty() ? "ch" : s.label) << "\n";
    for (const auto& [k, v] : prov.extra) os << "# " << k << " " << v << "\n";

    // merge rows in time order so the file itself reads as one timeline
    std::vector<std::size_t> pos(streams.size(), 0);
    char line[48];
    for (;;) {
        int best = -1;
        for (std::size_t c = 0; c < streams.size(); ++c) {
            if (pos[c] >= streams[c].tags.size()) continue;
            if (best < 0 || streams[c].tags[pos[c]] < streams[static_cast<std::size_t>(best)]
                                                         .tags[pos[static_cast<std::size_t>(best)]])
                best = static_cast<int>(c);
        }
        if (best < 0) break;
        const auto b = static_cast<std::size_t>(best);
        std::snprintf(line, sizeof line, "%d\t%lld\n", streams[b].channel,
                      static_cast<long long>(streams[b].tags[pos[b]]));
        os << line;
        ++pos[b];
    }
}

std::vector<TimeTagStream> read_tag_streams(const std::string& path, Provenance* prov) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path);
    std::vector<TimeTagStream> streams;
    auto stream_for = [&](int ch) -> TimeTagStream& {
        for (auto& s : streams)
            if (s.channel == ch) return s;
        streams.push_back(TimeTagStream{ch, "ch" + std::to_string(ch), {}, 0.0});
        return streams.back();
    };

    std::int64_t duration_ps = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "seed" && prov) hs >> prov->seed;
            else if (key == "scenario_hash" && prov) hs >> prov->scenario_hash;
            else if (key == "duration_ps") hs >> duration_ps;
            else if (key == "channel") {
                int ch = 0;
                std::string label;
                hs >> ch >> label;
                stream_for(ch).label = label;
            }
            continue;
        }
        const char* b = line.data();
        const char* e = b + line.size();
        int ch = 0;
        auto r1 = std::from_chars(b, e, ch);
        if (r1.ec != std::errc{} || r1.ptr == e)
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed tag row");
        const char* p = r1.ptr;
        while (p != e && (*p == '\t' || *p == ' ')) ++p;
        std::int64_t tag = 0;
        auto r2 = std::from_chars(p, e, tag);
        if (r2.ec != std::errc{})
            throw DataError(path + ":" + std::to_string(lineno) + ": malformed timestamp");
        stream_for(ch).tags.push_back(tag);
    }
    for (auto& s : streams) {
        s.duration = to_seconds(duration_ps);
        s.validate_sorted();
    }
    std::sort(streams.begin(), streams.end(),
              [](const TimeTagStream& a, const TimeTagStream& b) { return a.channel < b.channel; });
    return streams;
}

}  // namespace qdmux
