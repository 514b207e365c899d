#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qdmux/constants.hpp"
#include "qdmux/correlate.hpp"
#include "qdmux/trajectory.hpp"

using namespace qdmux;

namespace {

SequenceConfig small_sequence(std::int64_t n_periods) {
    SequenceConfig cfg;
    cfg.n_periods = n_periods;
    return cfg;
}

QdParameters clean_qd() {
    QdParameters qd;
    qd.prep_fidelity = 1.0;
    qd.stim_fidelity = 1.0;
    qd.sigma = 0.0;
    qd.reexcitation_prob = 0.0;
    return qd;
}

DetectorModel transparent_detector() { return DetectorModel{1.0, 0.0, 0.0, 0.0}; }

SimulationInputs clean_inputs(std::int64_t n_periods, std::uint64_t seed) {
    SimulationInputs in;
    in.qd = clean_qd();
    in.sequence = small_sequence(n_periods);
    in.det1 = transparent_detector();
    in.det2 = transparent_detector();
    in.bs = BeamsplitterParams{0.5, 0.5};
    in.seed = seed;
    in.threads = 2;
    return in;
}

}  // namespace

TEST_CASE("deterministic stimulation forces the stim polarization") {
    QdParameters qd = clean_qd();
    qd.t1_xx = 1.0;  // no decay on the stim timescale: efficiency is the bare turn-on
    SequenceConfig cfg = small_sequence(2000);
    cfg.stim_delay = 30e-12;  // saturated turn-on
    cfg.stim_enabled_h = false;
    const auto all = build_sequence(cfg);
    std::vector<ExcitationCycle> v_cycles;
    for (const auto& c : all)
        if (c.branch == Polarization::V) v_cycles.push_back(c);

    RandomSource rng(5);
    const auto photons = simulate_emission(v_cycles, qd, ExcitationPulses{}, rng);
    CHECK(photons.size() == v_cycles.size());
    for (const auto& p : photons) CHECK(p.polarization == Polarization::V);
}

TEST_CASE("spontaneous X-XX delay averages to the exciton lifetime") {
    QdParameters qd = clean_qd();
    SequenceConfig cfg = small_sequence(500000);
    cfg.stim_enabled_h = false;
    cfg.stim_enabled_v = false;
    const auto cycles = build_sequence(cfg);
    RandomSource rng(6);
    EmissionOptions opts;
    const auto photons = simulate_emission(cycles, qd, ExcitationPulses{}, rng, opts);
    double sum = 0.0;
    for (const auto& p : photons) sum += p.emit_time - p.wavepacket_start;
    const double n = static_cast<double>(photons.size());
    const double mean = sum / n;
    const double standard_error = qd.t1_x / std::sqrt(n);
    CHECK(std::abs(mean - qd.t1_x) < 3.0 * standard_error);
    for (const auto& p : photons) CHECK(p.emit_time >= to_seconds(0));
}

TEST_CASE("branch pools sit FSS/h apart in center frequency") {
    QdParameters qd = clean_qd();
    SequenceConfig cfg = small_sequence(20000);
    cfg.stim_enabled_h = false;
    cfg.stim_enabled_v = false;
    const auto cycles = build_sequence(cfg);
    RandomSource rng(7);
    const auto photons = simulate_emission(cycles, qd, ExcitationPulses{}, rng);
    double h_sum = 0.0, v_sum = 0.0;
    std::size_t h_n = 0, v_n = 0;
    for (const auto& p : photons) {
        if (p.polarization == Polarization::H) {
            h_sum += p.freq_offset;
            ++h_n;
        } else {
            v_sum += p.freq_offset;
            ++v_n;
        }
    }
    REQUIRE(h_n > 0);
    REQUIRE(v_n > 0);
    const double split = h_sum / static_cast<double>(h_n) - v_sum / static_cast<double>(v_n);
    CHECK(split == doctest::Approx(7.0e-6 / kPlanckEvS).epsilon(1e-9));  // sigma = 0: exact

    // with wandering the pools smear but keep their separation
    qd.sigma = 0.5e9;
    RandomSource rng2(8);
    const auto smeared = simulate_emission(cycles, qd, ExcitationPulses{}, rng2);
    double hs = 0.0, vs = 0.0;
    std::size_t hn = 0, vn = 0;
    for (const auto& p : smeared) {
        if (p.polarization == Polarization::H) {
            hs += p.freq_offset;
            ++hn;
        } else {
            vs += p.freq_offset;
            ++vn;
        }
    }
    const double split2 = hs / static_cast<double>(hn) - vs / static_cast<double>(vn);
    const double err = 3.0 * qd.sigma * std::sqrt(1.0 / static_cast<double>(hn) +
                                                  1.0 / static_cast<double>(vn));
    CHECK(std::abs(split2 - 7.0e-6 / kPlanckEvS) < err);
}

TEST_CASE("transparent detectors reproduce emission times exactly") {
    QdParameters qd = clean_qd();
    const auto cycles = build_sequence(small_sequence(2000));
    RandomSource rng(9);
    auto photons = simulate_emission(cycles, qd, ExcitationPulses{}, rng);
    std::sort(photons.begin(), photons.end(),
              [](const PhotonRecord& a, const PhotonRecord& b) { return a.emit_time < b.emit_time; });
    RandomSource det_rng(10);
    const auto [h, v] =
        route_polarizing(photons, transparent_detector(), transparent_detector(), 1.0, det_rng);
    CHECK(h.tags.size() + v.tags.size() == photons.size());
    std::vector<std::int64_t> expected_h;
    for (const auto& p : photons)
        if (p.polarization == Polarization::H) expected_h.push_back(to_ps(p.emit_time));
    std::sort(expected_h.begin(), expected_h.end());
    CHECK(h.tags == expected_h);
}

TEST_CASE("efficiency thinning is binomial") {
    QdParameters qd = clean_qd();
    const auto cycles = build_sequence(small_sequence(50000));
    RandomSource rng(11);
    auto photons = simulate_emission(cycles, qd, ExcitationPulses{}, rng);
    std::sort(photons.begin(), photons.end(),
              [](const PhotonRecord& a, const PhotonRecord& b) { return a.emit_time < b.emit_time; });
    DetectorModel half = transparent_detector();
    half.efficiency = 0.5;
    RandomSource det_rng(12);
    const auto [h, v] = route_polarizing(photons, half, half, 1.0, det_rng);
    const double n = static_cast<double>(photons.size());
    const double kept = static_cast<double>(h.tags.size() + v.tags.size());
    CHECK(std::abs(kept - 0.5 * n) < 3.0 * std::sqrt(0.25 * n));
}

TEST_CASE("dark counts alone form a Poisson process at the configured rate") {
    DetectorModel dark = transparent_detector();
    dark.dark_rate = 1000.0;
    RandomSource rng(13);
    const auto [h, v] = route_polarizing({}, dark, dark, 100.0, rng);
    const double expected = 1000.0 * 100.0;
    CHECK(std::abs(static_cast<double>(h.tags.size()) - expected) < 3.0 * std::sqrt(expected));
    CHECK(std::abs(static_cast<double>(v.tags.size()) - expected) < 3.0 * std::sqrt(expected));
    for (std::size_t i = 1; i < h.tags.size(); ++i) CHECK(h.tags[i] >= h.tags[i - 1]);
}

TEST_CASE("dead time enforces the minimum same-channel separation") {
    std::vector<PhotonRecord> photons;
    for (int i = 0; i < 100; ++i)
        photons.push_back({i * 10e-12, 0.0, 0.0, Polarization::H, PhotonKind::X, i});
    DetectorModel det = transparent_detector();
    det.dead_time = 50e-12;
    RandomSource rng(14);
    const auto [h, v] = route_polarizing(photons, det, det, 1.0, rng);
    REQUIRE(!h.tags.empty());
    for (std::size_t i = 1; i < h.tags.size(); ++i) CHECK(h.tags[i] - h.tags[i - 1] >= 50);
}

TEST_CASE("two-photon overlap and coincidence probability") {
    PhotonRecord a{0.0, 0.0, 0.0, Polarization::H, PhotonKind::X, 0};
    PhotonRecord b{0.0, 0.0, 0.0, Polarization::H, PhotonKind::X, 1};
    const BeamsplitterParams balanced{0.5, 0.5};

    CHECK(overlap_squared(a, b, 0.0, 170e-12) == doctest::Approx(1.0));
    CHECK(coincidence_probability(1.0, balanced) == doctest::Approx(0.0));
    CHECK(coincidence_probability(0.0, balanced) == doctest::Approx(0.5));

    // time offset decays the overlap exponentially
    b.wavepacket_start = 170e-12;
    CHECK(overlap_squared(a, b, 0.0, 170e-12) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    b.wavepacket_start = 0.0;

    // detuned wavepackets: |O|^2 = 1/(1 + (2 pi dnu T1)^2)
    b.freq_offset = 1.693e9;
    const double o2 = overlap_squared(a, b, 0.0, 170e-12);
    CHECK(o2 == doctest::Approx(0.23418).epsilon(1e-4));
    CHECK(coincidence_probability(o2, balanced) == doctest::Approx(0.383).epsilon(1e-3));
}

TEST_CASE("hom_interfere outcome frequencies follow the coincidence probability") {
    PhotonRecord a{0.0, 0.0, 0.0, Polarization::H, PhotonKind::X, 0};
    PhotonRecord b{0.0, 0.0, 1.693e9, Polarization::H, PhotonKind::X, 1};
    const BeamsplitterParams balanced{0.5, 0.5};
    const double o2 = overlap_squared(a, b, 0.0, 170e-12);
    const double pc = coincidence_probability(o2, balanced);
    RandomSource rng(15);
    int coincidences = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (hom_interfere(a, b, 0.0, o2, balanced, rng).coincidence) ++coincidences;
    const double sigma = std::sqrt(pc * (1.0 - pc) * n);
    CHECK(std::abs(coincidences - pc * n) < 3.0 * sigma);
}

TEST_CASE("identical photons disappear from the cross-port coincidences") {
    SimulationInputs in = clean_inputs(40000, 21);
    in.qd.fss = 0.0;
    in.qd.t1_xx = 1e-6;  // ideal stim timing: every pair overlaps perfectly
    const auto [co1, co2] = simulate_hom_experiment(in, HomMode::HV);
    const auto [cx1, cx2] = simulate_hom_experiment(in, HomMode::HVCross);
    const auto co_hist = cross_correlate(co1, co2, 50, 40000, 2);
    const auto cx_hist = cross_correlate(cx1, cx2, 50, 40000, 2);
    const auto vis = extract_hom_visibility(co_hist, cx_hist);
    CHECK(vis.value > 1.0 - 5.0 * vis.uncertainty - 0.01);
    CHECK(vis.value <= 1.0 + 1e-9);
}

TEST_CASE("same-polarization pairs interfere away at zero detuning") {
    SimulationInputs in = clean_inputs(60000, 26);
    in.qd.t1_xx = 1e-6;  // ideal stim timing
    const auto [co1, co2] = simulate_hom_experiment(in, HomMode::CoH);
    const auto [cx1, cx2] = simulate_hom_experiment(in, HomMode::CrossH);
    const auto co_hist = cross_correlate(co1, co2, 50, 60000, 2);
    const auto cx_hist = cross_correlate(cx1, cx2, 50, 60000, 2);
    const auto vis = extract_hom_visibility(co_hist, cx_hist);
    CHECK(vis.value > 1.0 - 5.0 * vis.uncertainty - 0.01);
    CHECK(vis.value <= 1.0 + 1e-9);
}

TEST_CASE("cross-mode central coincidences scale with r^2 + t^2") {
    SimulationInputs in = clean_inputs(60000, 27);
    in.qd.t1_xx = 1e-6;
    in.bs = BeamsplitterParams{0.47, 0.53};
    const auto [cx1, cx2] = simulate_hom_experiment(in, HomMode::HVCross);
    const auto h = cross_correlate(cx1, cx2, 50, 40000, 2);
    const double a0 = window_area(h, 0, 1000);
    // one designated pair per period; 1 ns window captures most of the
    // Laplace-shaped peak: exp(-500 ps / 175 ps) in each tail
    const double capture = 1.0 - std::exp(-500.0 / 175.0);
    const double expected =
        static_cast<double>(in.sequence.n_periods) * (0.47 * 0.47 + 0.53 * 0.53) * capture;
    CHECK(std::abs(a0 - expected) < 4.0 * std::sqrt(expected));
}

TEST_CASE("the XX photon precedes its X photon and the keep flag retains it") {
    QdParameters qd = clean_qd();
    const auto cycles = build_sequence(small_sequence(5000));
    RandomSource rng(28);
    EmissionOptions opts;
    opts.keep_xx = true;
    const auto photons = simulate_emission(cycles, qd, ExcitationPulses{}, rng, opts);
    std::size_t n_x = 0, n_xx = 0;
    for (const auto& p : photons) {
        if (p.kind == PhotonKind::X) {
            ++n_x;
            CHECK(p.emit_time >= p.wavepacket_start);
        } else if (p.kind == PhotonKind::XX) {
            ++n_xx;
        }
    }
    CHECK(n_x == n_xx);  // every cascade emits both
    CHECK(n_x == cycles.size());

    // consecutive records of one cycle: XX emission never after the X
    for (std::size_t i = 0; i + 1 < photons.size(); ++i) {
        if (photons[i].cycle_index == photons[i + 1].cycle_index &&
            photons[i].kind == PhotonKind::X && photons[i + 1].kind == PhotonKind::XX)
            CHECK(photons[i + 1].emit_time <= photons[i].emit_time);
    }
}

TEST_CASE("stim doubling: V rate twice the no-stim rate at the 6 ps optimum") {
    SimulationInputs in = clean_inputs(1, 22);
    in.qd.t1_xx = 240e-12;
    in.pulses.tpe.duration = 2e-12;
    in.pulses.stim.duration = 2e-12;
    in.sequence.n_periods = 400000;
    const double deltas[] = {6e-12, -20e-12};
    const auto pts = simulate_delay_scan(in, deltas, Polarization::V);
    const double r6 = static_cast<double>(pts[0].counts_on) / static_cast<double>(pts[0].counts_off);
    const double rm20 =
        static_cast<double>(pts[1].counts_on) / static_cast<double>(pts[1].counts_off);
    CHECK(std::abs(r6 - 2.0) < 0.05);
    CHECK(std::abs(rm20 - 1.0) < 0.05);
}

TEST_CASE("identical seeds replay bit-identical streams for any worker count") {
    SimulationInputs in = clean_inputs(20000, 23);
    in.qd.reexcitation_prob = 0.03;
    in.det1 = DetectorModel{0.8, 10e-12, 100.0, 0.0};
    in.det2 = in.det1;

    auto [a1, a2] = simulate_hbt(in, HbtBranch::Combined);
    auto [b1, b2] = simulate_hbt(in, HbtBranch::Combined);
    CHECK(a1.tags == b1.tags);
    CHECK(a2.tags == b2.tags);

    SimulationInputs in_single = in;
    in_single.threads = 1;
    SimulationInputs in_many = in;
    in_many.threads = 5;
    auto [c1, c2] = simulate_hbt(in_single, HbtBranch::Combined);
    auto [d1, d2] = simulate_hbt(in_many, HbtBranch::Combined);
    CHECK(c1.tags == a1.tags);
    CHECK(d1.tags == a1.tags);
    CHECK(c2.tags == a2.tags);
    CHECK(d2.tags == a2.tags);
}

TEST_CASE("streams respect ordering and accounting invariants") {
    SimulationInputs in = clean_inputs(30000, 24);
    in.qd.reexcitation_prob = 0.05;
    in.det1 = DetectorModel{0.7, 10e-12, 200.0, 20e-9};
    in.det2 = in.det1;
    const auto [s1, s2] = simulate_polarized_streams(in);
    for (const auto* s : {&s1, &s2}) {
        s->validate_sorted();
        const std::int64_t dead = to_ps(in.det1.dead_time);
        for (std::size_t i = 1; i < s->tags.size(); ++i)
            CHECK(s->tags[i] - s->tags[i - 1] >= dead);
    }
    // detected <= emitted + darks, with slack for the dark expectation
    const double duration = in.sequence.rep_period * static_cast<double>(in.sequence.n_periods);
    const double max_emitted = 2.0 * static_cast<double>(in.sequence.n_periods) * 1.05 * 2.0;
    const double darks = 2.0 * in.det1.dark_rate * duration;
    CHECK(static_cast<double>(s1.tags.size() + s2.tags.size()) < max_emitted + darks + 1000.0);
}

TEST_CASE("combined HBT histogram shows pair peaks near zero and triplets at one period") {
    SimulationInputs in = clean_inputs(150000, 25);
    in.qd.prep_fidelity = 0.95;
    const auto [s1, s2] = simulate_hbt(in, HbtBranch::Combined);
    const auto h = cross_correlate(s1, s2, 50, 20000, 2);
    const auto area = [&](double center_ns) {
        return window_area(h, to_ps(center_ns * 1e-9), 1000);
    };
    const double a0 = area(0.0);
    const double a2m = area(-2.0), a2p = area(2.0);
    const double a10 = area(10.5), a12 = area(12.5), a14 = area(14.5);
    CHECK(a2m > 100.0);
    CHECK(a2p > 100.0);
    CHECK(a0 < 0.05 * a2p);
    // two independent single-photon trains: outer peaks equal, center is their sum
    CHECK(std::abs(a10 - a14) < 3.0 * std::sqrt(a10 + a14));
    CHECK(std::abs(a12 - (a10 + a14)) < 3.0 * std::sqrt(a12 + a10 + a14));
}
