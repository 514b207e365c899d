#pragma once

#include <cstdint>
#include <string>

#include "qdmux/trajectory.hpp"

namespace qdmux {

enum class Experiment {
    HbtH,
    HbtV,
    HbtCombined,
    HomCoH,
    HomCrossH,
    HomCoV,
    HomCrossV,
    HomHV,
    DelayScan,
    RabiMap,
    Lifetime,
};

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Stim-delay scan grid (DelayScan experiment).
struct ScanSpec {
    double min = -20e-12;
    double max = 40e-12;
    double step = 2e-12;
};

/// Preparation-probability map grid (RabiMap experiment).
struct RabiGrid {
    double detuning_min = -200e9;
    double detuning_max = 200e9;
    int detuning_points = 81;
    double area_min = 0.0;
    double area_max = 2.0;
    int area_points = 81;
};

/// Complete description of one simulated experiment run.
struct Scenario {
    QdParameters qd;
    ExcitationPulses pulses;
    SequenceConfig sequence;
    DetectorModel det1;
    DetectorModel det2;
    BeamsplitterParams beamsplitter;
    Experiment experiment = Experiment::HbtH;
    std::uint64_t seed = 1;
    ScanSpec scan;
    RabiGrid rabi;

    SimulationInputs inputs(unsigned threads = 0) const;
    void validate() const;

    /// FNV-1a of the canonical JSON form; stamped into every artifact.
    std::string hash() const;
};

/// Strict JSON parsing with field-path diagnostics on error.
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);

}  // namespace qdmux
