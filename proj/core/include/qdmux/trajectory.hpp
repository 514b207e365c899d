#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qdmux/pulse_sequence.hpp"
#include "qdmux/qd_model.hpp"
#include "qdmux/random.hpp"
#include "qdmux/time_tags.hpp"

namespace qdmux {

enum class PhotonKind : std::uint8_t { X = 0, XX = 1, Noise = 2 };

struct PhotonRecord {
    double emit_time = 0.0;         ///< s, sampled detection-relevant instant
    double wavepacket_start = 0.0;  ///< s, start of the exponential wavepacket (XX decay / stim)
    double freq_offset = 0.0;       ///< Hz relative to the line center
    Polarization polarization = Polarization::H;
    PhotonKind kind = PhotonKind::X;
    std::int64_t cycle_index = 0;
};

struct ExcitationPulses {
    PulseParameters tpe{1.0, 0.0, 4e-12};
    PulseParameters stim{1.0, 0.0, 4e-12};
};

struct EmissionOptions {
    bool keep_xx = false;  ///< XX photons are spectrally filtered away by default
};

/// Monte Carlo pass over the excitation timeline. Per cycle: biexciton
/// preparation, stimulated or spontaneous XX decay, branch selection,
/// exponential X emission, FSS branch offset plus wandering, optional
/// re-excitation extra.
std::vector<PhotonRecord> simulate_emission(std::span<const ExcitationCycle> cycles,
                                            const QdParameters& qd, const ExcitationPulses& pulses,
                                            RandomSource& rng, const EmissionOptions& opts = {});

/// Polarizing splitter into H and V detector channels. Per photon: Gaussian
/// jitter, efficiency thinning, then per-channel dark counts and dead-time
/// filtering in time order.
std::pair<TimeTagStream, TimeTagStream> route_polarizing(std::span<const PhotonRecord> photons,
                                                         const DetectorModel& det_h,
                                                         const DetectorModel& det_v, double duration,
                                                         RandomSource& rng);

/// |<a|b>|^2 of two one-sided exponential wavepackets with equal lifetime
/// t1, arrival offset tau0 (wavepacket starts, incl. the arm delay applied
/// to a) and center-frequency difference.
double overlap_squared(const PhotonRecord& a, const PhotonRecord& b, double arm_delay, double t1);

/// P(one photon in each output port) = r^2 + t^2 - 2 r t |O|^2.
double coincidence_probability(double overlap2, const BeamsplitterParams& bs);

struct HomOutcome {
    bool coincidence = false;
    int port_a = 0;  ///< output port of photon a (0/1)
    int port_b = 0;
};

/// Samples the two-photon output configuration at the beamsplitter.
/// Non-coincident outcomes bunch both photons into one port chosen r:t.
HomOutcome hom_interfere(const PhotonRecord& a, const PhotonRecord& b, double arm_delay,
                         double overlap2, const BeamsplitterParams& bs, RandomSource& rng);

enum class HomMode { CoH, CrossH, CoV, CrossV, HV, HVCross };
enum class HbtBranch { H, V, Combined };

/// Everything a stream-producing experiment needs.
struct SimulationInputs {
    QdParameters qd;
    ExcitationPulses pulses;
    SequenceConfig sequence;
    DetectorModel det1;
    DetectorModel det2;
    BeamsplitterParams bs;
    std::uint64_t seed = 1;
    unsigned threads = 0;  ///< 0 = resolve from env/hardware
};

/// Asymmetric-delay two-photon interference experiment. Same-polarization
/// modes pair photons one repetition period apart, the H-V modes pair the
/// two photons of one period (pair_delay apart). Cross modes force
/// |O|^2 = 0. Designated pairs interfere; everything else routes r:t.
std::pair<TimeTagStream, TimeTagStream> simulate_hom_experiment(const SimulationInputs& in,
                                                                HomMode mode);

/// Hanbury Brown-Twiss: branch-filtered (or combined) X photons split r:t
/// onto two detectors.
std::pair<TimeTagStream, TimeTagStream> simulate_hbt(const SimulationInputs& in, HbtBranch branch);

/// Polarizing-splitter stream output (channels H=1, V=2).
std::pair<TimeTagStream, TimeTagStream> simulate_polarized_streams(const SimulationInputs& in);

/// Start-stop lifetime data: channel 0 carries the stim instants of the
/// first branch per period as a perfect sync, channel 1 the matching
/// polarization's detector clicks.
std::pair<TimeTagStream, TimeTagStream> simulate_lifetime(const SimulationInputs& in);

struct DelayScanPoint {
    double delta_t = 0.0;       ///< s
    std::uint64_t counts_on = 0;   ///< branch-channel counts, stim enabled
    std::uint64_t counts_off = 0;  ///< same cycles, stim disabled
};

/// Stim-delay scan: single-branch cycle train, branch-channel count
/// ratio stim-on / stim-off per stim delay.
std::vector<DelayScanPoint> simulate_delay_scan(const SimulationInputs& in,
                                                std::span<const double> delta_ts,
                                                Polarization branch);

}  // namespace qdmux
