#include "qdmux/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "qdmux/constants.hpp"
#include "qdmux/errors.hpp"
#include "qdmux/parallel.hpp"

namespace qdmux {

namespace {

constexpr std::int64_t kPeriodsPerBlock = 4096;  // even, so designated pairs never straddle blocks

// rng substream purposes; low bits carry the block / point index
constexpr std::uint64_t kStreamEmission = 1ULL << 56;
constexpr std::uint64_t kStreamDarks = 2ULL << 56;
constexpr std::uint64_t kStreamScan = 3ULL << 56;

double branch_offset(Polarization p, const QdParameters& qd) {
    const double half = qd.fss / (2.0 * kPlanckEvS);
    return p == Polarization::H ? half : -half;
}

struct EmissionContext {
    double p_prep = 1.0;
    double eta = 0.0;  // stim efficiency at the sequence's stim delay
    bool keep_xx = false;
};

EmissionContext make_context(std::span<const ExcitationCycle> cycles, const QdParameters& qd,
                             const ExcitationPulses& pulses, const EmissionOptions& opts) {
    EmissionContext ctx;
    ctx.p_prep = prepare_biexciton_probability(pulses.tpe, qd);
    ctx.keep_xx = opts.keep_xx;
    if (!cycles.empty()) {
        const double delta_t = to_seconds(cycles[0].stim_time_ps - cycles[0].tpe_time_ps);
        ctx.eta = stim_efficiency(delta_t, pulses.stim, qd);
    }
    return ctx;
}

void emit_cycle(const ExcitationCycle& c, const QdParameters& qd, const EmissionContext& ctx,
                RandomSource& rng, std::vector<PhotonRecord>& out) {
    if (!rng.bernoulli(ctx.p_prep)) return;
    const double tpe_s = to_seconds(c.tpe_time_ps);
    const bool stim_ok = c.stim_enabled && rng.bernoulli(ctx.eta);
    const double xx_time = stim_ok ? std::max(to_seconds(c.stim_time_ps), tpe_s)
                                   : tpe_s + rng.exponential(qd.t1_xx);
    const Polarization pol = branch_polarization(stim_ok, c.branch, qd, rng);
    const double x_time = xx_time + rng.exponential(qd.t1_x);
    double freq = branch_offset(pol, qd);
    if (qd.sigma > 0.0) freq += rng.normal(0.0, qd.sigma);
    out.push_back({x_time, xx_time, freq, pol, PhotonKind::X, c.cycle_index});
    if (ctx.keep_xx)
        out.push_back({xx_time, tpe_s, -branch_offset(pol, qd), pol, PhotonKind::XX, c.cycle_index});
    if (qd.reexcitation_prob > 0.0 && rng.bernoulli(qd.reexcitation_prob)) {
        // spurious second cascade, polarization unbiased (the stim pulse is long gone)
        const double xx2 = tpe_s + rng.exponential(qd.t1_xx);
        const Polarization p2 = rng.bernoulli(0.5) ? Polarization::H : Polarization::V;
        const double x2 = xx2 + rng.exponential(qd.t1_x);
        double f2 = branch_offset(p2, qd);
        if (qd.sigma > 0.0) f2 += rng.normal(0.0, qd.sigma);
        out.push_back({x2, xx2, f2, p2, PhotonKind::Noise, c.cycle_index});
    }
}

/// jitter, then efficiency thinning, then 1 ps quantization
void detect_photon(double t, const DetectorModel& det, RandomSource& rng,
                   std::vector<std::int64_t>& out) {
    const double jittered = det.jitter_sigma > 0.0 ? t + rng.normal(0.0, det.jitter_sigma) : t;
    if (det.efficiency < 1.0 && !rng.bernoulli(det.efficiency)) return;
    out.push_back(to_ps(jittered));
}

void add_darks(std::vector<std::int64_t>& tags, const DetectorModel& det, double duration,
               RandomSource& rng) {
    if (det.dark_rate <= 0.0 || duration <= 0.0) return;
    double t = rng.exponential(1.0 / det.dark_rate);
    while (t < duration) {
        tags.push_back(to_ps(t));
        t += rng.exponential(1.0 / det.dark_rate);
    }
}

void finalize_tags(std::vector<std::int64_t>& tags, const DetectorModel& det) {
    std::sort(tags.begin(), tags.end());
    if (det.dead_time <= 0.0 || tags.empty()) return;
    const std::int64_t dead_ps = to_ps(det.dead_time);
    std::vector<std::int64_t> kept;
    kept.reserve(tags.size());
    std::int64_t last = std::numeric_limits<std::int64_t>::min() / 2;
    for (const auto t : tags) {
        if (t - last >= dead_ps) {
            kept.push_back(t);
            last = t;
        }
    }
    tags.swap(kept);
}

struct BlockClicks {
    std::vector<std::int64_t> ch1;
    std::vector<std::int64_t> ch2;
};

/// Shared driver: blocks of whole periods with counter-derived substreams,
/// deterministic concatenation, then darks + dead time per channel.
template <class PerBlock>
std::pair<TimeTagStream, TimeTagStream> run_blocked(const SimulationInputs& in, int ch1,
                                                    const char* label1, int ch2, const char* label2,
                                                    const DetectorModel& det1,
                                                    const DetectorModel& det2, PerBlock per_block) {
    in.qd.validate();
    det1.validate();
    det2.validate();
    in.bs.validate();
    const auto warning = sequence_warnings(in.sequence, in.qd);
    if (!warning.empty()) std::fprintf(stderr, "qdmux: warning: %s\n", warning.c_str());

    const auto cycles = build_sequence(in.sequence);
    const std::int64_t n_periods = in.sequence.n_periods;
    const std::size_t n_blocks =
        static_cast<std::size_t>((n_periods + kPeriodsPerBlock - 1) / kPeriodsPerBlock);
    std::vector<BlockClicks> blocks(n_blocks);

    parallel_for(n_blocks, in.threads, [&](std::size_t bi) {
        RandomSource rng = RandomSource::substream(in.seed, kStreamEmission | bi);
        const std::int64_t p0 = static_cast<std::int64_t>(bi) * kPeriodsPerBlock;
        const std::int64_t p1 = std::min(n_periods, p0 + kPeriodsPerBlock);
        const std::span<const ExcitationCycle> slice{cycles.data() + 2 * p0,
                                                     static_cast<std::size_t>(2 * (p1 - p0))};
        per_block(slice, p0, rng, blocks[bi]);
    });

    const double duration = in.sequence.rep_period * static_cast<double>(n_periods);
    TimeTagStream s1{ch1, label1, {}, duration};
    TimeTagStream s2{ch2, label2, {}, duration};
    std::size_t n1 = 0, n2 = 0;
    for (const auto& b : blocks) {
        n1 += b.ch1.size();
        n2 += b.ch2.size();
    }
    s1.tags.reserve(n1);
    s2.tags.reserve(n2);
    for (const auto& b : blocks) {
        s1.tags.insert(s1.tags.end(), b.ch1.begin(), b.ch1.end());
        s2.tags.insert(s2.tags.end(), b.ch2.begin(), b.ch2.end());
    }
    RandomSource dark_rng1 = RandomSource::substream(in.seed, kStreamDarks | 1);
    RandomSource dark_rng2 = RandomSource::substream(in.seed, kStreamDarks | 2);
    add_darks(s1.tags, det1, duration, dark_rng1);
    add_darks(s2.tags, det2, duration, dark_rng2);
    finalize_tags(s1.tags, det1);
    finalize_tags(s2.tags, det2);
    return {std::move(s1), std::move(s2)};
}

}  // namespace

std::vector<PhotonRecord> simulate_emission(std::span<const ExcitationCycle> cycles,
                                            const QdParameters& qd, const ExcitationPulses& pulses,
                                            RandomSource& rng, const EmissionOptions& opts) {
    qd.validate();
    for (std::size_t i = 1; i < cycles.size(); ++i)
        if (cycles[i].tpe_time_ps < cycles[i - 1].tpe_time_ps)
            throw DataError("simulate_emission: cycles must be sorted");
    const EmissionContext ctx = make_context(cycles, qd, pulses, opts);
    std::vector<PhotonRecord> photons;
    photons.reserve(cycles.size());
    for (const auto& c : cycles) emit_cycle(c, qd, ctx, rng, photons);
    return photons;
}

std::pair<TimeTagStream, TimeTagStream> route_polarizing(std::span<const PhotonRecord> photons,
                                                         const DetectorModel& det_h,
                                                         const DetectorModel& det_v, double duration,
                                                         RandomSource& rng) {
    det_h.validate();
    det_v.validate();
    for (std::size_t i = 1; i < photons.size(); ++i)
        if (photons[i].emit_time < photons[i - 1].emit_time)
            throw DataError("route_polarizing: photons must be sorted by emit_time");
    TimeTagStream h{1, "H", {}, duration};
    TimeTagStream v{2, "V", {}, duration};
    for (const auto& p : photons) {
        if (p.polarization == Polarization::H)
            detect_photon(p.emit_time, det_h, rng, h.tags);
        else
            detect_photon(p.emit_time, det_v, rng, v.tags);
    }
    add_darks(h.tags, det_h, duration, rng);
    add_darks(v.tags, det_v, duration, rng);
    finalize_tags(h.tags, det_h);
    finalize_tags(v.tags, det_v);
    return {std::move(h), std::move(v)};
}

double overlap_squared(const PhotonRecord& a, const PhotonRecord& b, double arm_delay, double t1) {
    const double tau0 = b.wavepacket_start - (a.wavepacket_start + arm_delay);
    const double dnu = b.freq_offset - a.freq_offset;
    const double lorentz = 1.0 + std::pow(2.0 * kPi * dnu * t1, 2);
    return std::exp(-std::abs(tau0) / t1) / lorentz;
}

double coincidence_probability(double overlap2, const BeamsplitterParams& bs) {
    return bs.r * bs.r + bs.t * bs.t - 2.0 * bs.r * bs.t * overlap2;
}

HomOutcome hom_interfere(const PhotonRecord& a, const PhotonRecord& b, double arm_delay,
                         double overlap2, const BeamsplitterParams& bs, RandomSource& rng) {
    (void)a;
    (void)b;
    (void)arm_delay;
    HomOutcome out;
    const double p_c = coincidence_probability(overlap2, bs);
    if (rng.bernoulli(p_c)) {
        out.coincidence = true;
        if (rng.bernoulli(0.5)) {
            out.port_a = 0;
            out.port_b = 1;
        } else {
            out.port_a = 1;
            out.port_b = 0;
        }
    } else {
        const int port = rng.bernoulli(bs.r) ? 0 : 1;
        out.port_a = port;
        out.port_b = port;
    }
    return out;
}

std::pair<TimeTagStream, TimeTagStream> simulate_hbt(const SimulationInputs& in, HbtBranch branch) {
    return run_blocked(
        in, 1, "d1", 2, "d2", in.det1, in.det2,
        [&](std::span<const ExcitationCycle> slice, std::int64_t, RandomSource& rng,
            BlockClicks& out) {
            const EmissionContext ctx = make_context(slice, in.qd, in.pulses, {});
            std::vector<PhotonRecord> scratch;
            for (const auto& c : slice) {
                scratch.clear();
                emit_cycle(c, in.qd, ctx, rng, scratch);
                for (const auto& p : scratch) {
                    if (branch == HbtBranch::H && p.polarization != Polarization::H) continue;
                    if (branch == HbtBranch::V && p.polarization != Polarization::V) continue;
                    const bool to1 = rng.bernoulli(in.bs.r);
                    detect_photon(p.emit_time, to1 ? in.det1 : in.det2, rng,
                                  to1 ? out.ch1 : out.ch2);
                }
            }
        });
}

std::pair<TimeTagStream, TimeTagStream> simulate_polarized_streams(const SimulationInputs& in) {
    return run_blocked(in, 1, "H", 2, "V", in.det1, in.det2,
                       [&](std::span<const ExcitationCycle> slice, std::int64_t, RandomSource& rng,
                           BlockClicks& out) {
                           const EmissionContext ctx = make_context(slice, in.qd, in.pulses, {});
                           std::vector<PhotonRecord> scratch;
                           for (const auto& c : slice) {
                               scratch.clear();
                               emit_cycle(c, in.qd, ctx, rng, scratch);
                               for (const auto& p : scratch) {
                                   if (p.polarization == Polarization::H)
                                       detect_photon(p.emit_time, in.det1, rng, out.ch1);
                                   else
                                       detect_photon(p.emit_time, in.det2, rng, out.ch2);
                               }
                           }
                       });
}

namespace {

struct HomPeriod {
    // designated early/late interferometer inputs plus everything else
    const PhotonRecord* early = nullptr;
    const PhotonRecord* late = nullptr;
    std::vector<const PhotonRecord*> rest;
};

}  // namespace

std::pair<TimeTagStream, TimeTagStream> simulate_hom_experiment(const SimulationInputs& in,
                                                                HomMode mode) {
    const bool hv = (mode == HomMode::HV || mode == HomMode::HVCross);
    const bool cross = (mode == HomMode::CrossH || mode == HomMode::CrossV ||
                        mode == HomMode::HVCross);
    Polarization co_pol = Polarization::H;
    if (mode == HomMode::CoV || mode == HomMode::CrossV) co_pol = Polarization::V;

    const double arm_delay = hv ? in.sequence.pair_delay : in.sequence.rep_period;
    const double t1 = in.qd.t1_x;

    return run_blocked(
        in, 1, "d1", 2, "d2", in.det1, in.det2,
        [&, arm_delay, t1, hv, cross, co_pol](std::span<const ExcitationCycle> slice,
                                              std::int64_t p0, RandomSource& rng,
                                              BlockClicks& out) {
            const EmissionContext ctx = make_context(slice, in.qd, in.pulses, {});
            const std::size_t n_periods = slice.size() / 2;
            std::vector<std::vector<PhotonRecord>> periods(n_periods);
            for (std::size_t k = 0; k < n_periods; ++k) {
                emit_cycle(slice[2 * k], in.qd, ctx, rng, periods[k]);
                emit_cycle(slice[2 * k + 1], in.qd, ctx, rng, periods[k]);
            }

            // designate interferometer inputs per period; displaced photons
            // fall back to independent routing
            auto designate = [](const PhotonRecord*& slot, const PhotonRecord& p,
                                std::vector<const PhotonRecord*>& rest) {
                if (slot == nullptr) {
                    slot = &p;
                } else if (p.emit_time < slot->emit_time) {
                    rest.push_back(slot);
                    slot = &p;
                } else {
                    rest.push_back(&p);
                }
            };
            std::vector<HomPeriod> slots(n_periods);
            for (std::size_t k = 0; k < n_periods; ++k) {
                auto& slot = slots[k];
                for (const auto& p : periods[k]) {
                    if (hv) {
                        // polarizing input splitter: V takes the delayed arm
                        if (p.polarization == Polarization::V)
                            designate(slot.early, p, slot.rest);
                        else
                            designate(slot.late, p, slot.rest);
                    } else {
                        if (p.polarization != co_pol) continue;  // polarizer eats the rest
                        designate(slot.early, p, slot.rest);
                    }
                }
            }

            auto route_single = [&](const PhotonRecord& p, bool delayed_arm) {
                const double click = p.emit_time + (delayed_arm ? arm_delay : 0.0);
                // input port fixes the reflection branch
                const bool to_ch1 = delayed_arm ? rng.bernoulli(in.bs.r) : rng.bernoulli(in.bs.t);
                detect_photon(click, to_ch1 ? in.det1 : in.det2, rng, to_ch1 ? out.ch1 : out.ch2);
            };

            auto interfere_pair = [&](const PhotonRecord& early, const PhotonRecord& late) {
                double o2 = 0.0;
                if (!cross && early.kind != PhotonKind::Noise && late.kind != PhotonKind::Noise)
                    o2 = overlap_squared(early, late, arm_delay, t1);
                const HomOutcome oc = hom_interfere(early, late, arm_delay, o2, in.bs, rng);
                const double click_a = early.emit_time + arm_delay;
                const double click_b = late.emit_time;
                detect_photon(click_a, oc.port_a == 0 ? in.det1 : in.det2, rng,
                              oc.port_a == 0 ? out.ch1 : out.ch2);
                detect_photon(click_b, oc.port_b == 0 ? in.det1 : in.det2, rng,
                              oc.port_b == 0 ? out.ch1 : out.ch2);
            };

            if (hv) {
                for (std::size_t k = 0; k < n_periods; ++k) {
                    auto& slot = slots[k];
                    if (slot.early && slot.late)
                        interfere_pair(*slot.early, *slot.late);
                    else if (slot.early)
                        route_single(*slot.early, true);
                    else if (slot.late)
                        route_single(*slot.late, false);
                    for (const auto* p : slot.rest)
                        route_single(*p, p->polarization == Polarization::V);
                }
            } else {
                // co/cross: photons one repetition period apart meet; the
                // even period of each global pair takes the delayed arm
                // (blocks start at even periods, so local parity is global)
                for (std::size_t k = 0; k < n_periods; k += 2) {
                    auto& s0 = slots[k];
                    if (k + 1 < n_periods) {
                        auto& s1 = slots[k + 1];
                        if (s0.early && s1.early)
                            interfere_pair(*s0.early, *s1.early);
                        else if (s0.early)
                            route_single(*s0.early, true);
                        else if (s1.early)
                            route_single(*s1.early, false);
                        for (const auto* p : s0.rest) route_single(*p, true);
                        for (const auto* p : s1.rest) route_single(*p, false);
                    } else {
                        if (s0.early) route_single(*s0.early, true);
                        for (const auto* p : s0.rest) route_single(*p, true);
                    }
                }
            }
            (void)p0;
        });
}

std::pair<TimeTagStream, TimeTagStream> simulate_lifetime(const SimulationInputs& in) {
    const Polarization first_branch =
        in.sequence.v_branch_first ? Polarization::V : Polarization::H;
    // the sync channel is virtual: no darks, jitter or dead time belong on it
    DetectorModel sync_det;
    sync_det.efficiency = 1.0;
    sync_det.jitter_sigma = 0.0;
    sync_det.dark_rate = 0.0;
    sync_det.dead_time = 0.0;
    return run_blocked(
        in, 0, "sync", 1, "X", sync_det, in.det1,
        [&](std::span<const ExcitationCycle> slice, std::int64_t, RandomSource& rng,
            BlockClicks& out) {
            const EmissionContext ctx = make_context(slice, in.qd, in.pulses, {});
            std::vector<PhotonRecord> scratch;
            for (const auto& c : slice) {
                if (c.branch == first_branch) out.ch1.push_back(c.stim_time_ps);
                scratch.clear();
                emit_cycle(c, in.qd, ctx, rng, scratch);
                for (const auto& p : scratch) {
                    if (p.polarization != first_branch) continue;
                    detect_photon(p.emit_time, in.det1, rng, out.ch2);
                }
            }
        });
}

std::vector<DelayScanPoint> simulate_delay_scan(const SimulationInputs& in,
                                                std::span<const double> delta_ts,
                                                Polarization branch) {
    std::vector<DelayScanPoint> points;
    points.reserve(delta_ts.size());
    for (std::size_t i = 0; i < delta_ts.size(); ++i) {
        DelayScanPoint pt;
        pt.delta_t = delta_ts[i];
        for (int on = 1; on >= 0; --on) {
            SimulationInputs run = in;
            run.sequence.stim_delay = delta_ts[i];
            run.sequence.stim_enabled_h = on != 0 && branch == Polarization::H;
            run.sequence.stim_enabled_v = on != 0 && branch == Polarization::V;
            std::uint64_t mix_state = in.seed ^ (kStreamScan | (i * 2 + static_cast<std::size_t>(on)));
            run.seed = splitmix64(mix_state);

            // single-branch cycle train: keep only the scanned branch
            const auto all = build_sequence(run.sequence);
            std::vector<ExcitationCycle> kept;
            kept.reserve(all.size() / 2);
            for (const auto& c : all)
                if (c.branch == branch) kept.push_back(c);

            const EmissionContext ctx = make_context(kept, run.qd, run.pulses, {});
            std::uint64_t count = 0;
            const std::size_t n_blocks =
                (kept.size() + kPeriodsPerBlock - 1) / kPeriodsPerBlock;
            std::vector<std::uint64_t> partial(n_blocks, 0);
            parallel_for(n_blocks, in.threads, [&](std::size_t bi) {
                RandomSource rng = RandomSource::substream(run.seed, kStreamEmission | bi);
                const std::size_t c0 = bi * kPeriodsPerBlock;
                const std::size_t c1 = std::min(kept.size(), c0 + kPeriodsPerBlock);
                std::vector<PhotonRecord> scratch;
                std::vector<std::int64_t> clicks;
                for (std::size_t ci = c0; ci < c1; ++ci) {
                    scratch.clear();
                    emit_cycle(kept[ci], run.qd, ctx, rng, scratch);
                    for (const auto& p : scratch) {
                        if (p.polarization != branch) continue;
                        detect_photon(p.emit_time, in.det1, rng, clicks);
                    }
                }
                partial[bi] = clicks.size();
            });
            for (const auto c : partial) count += c;
            if (on)
                pt.counts_on = count;
            else
                pt.counts_off = count;
        }
        points.push_back(pt);
    }
    return points;
}

}  // namespace qdmux
