#include "qdmux/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qdmux/errors.hpp"

namespace qdmux {

using nlohmann::json;

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::HbtH: return "hbt_h";
        case Experiment::HbtV: return "hbt_v";
        case Experiment::HbtCombined: return "hbt_combined";
        case Experiment::HomCoH: return "hom_co_h";
        case Experiment::HomCrossH: return "hom_cross_h";
        case Experiment::HomCoV: return "hom_co_v";
        case Experiment::HomCrossV: return "hom_cross_v";
        case Experiment::HomHV: return "hom_hv";
        case Experiment::DelayScan: return "delay_scan";
        case Experiment::RabiMap: return "rabi_map";
        case Experiment::Lifetime: return "lifetime";
    }
    return "?";
}

Experiment experiment_from_string(const std::string& name) {
    static const std::pair<const char*, Experiment> table[] = {
        {"hbt_h", Experiment::HbtH},           {"hbt_v", Experiment::HbtV},
        {"hbt_combined", Experiment::HbtCombined}, {"hom_co_h", Experiment::HomCoH},
        {"hom_cross_h", Experiment::HomCrossH}, {"hom_co_v", Experiment::HomCoV},
        {"hom_cross_v", Experiment::HomCrossV}, {"hom_hv", Experiment::HomHV},
        {"delay_scan", Experiment::DelayScan}, {"rabi_map", Experiment::RabiMap},
        {"lifetime", Experiment::Lifetime},
    };
    for (const auto& [key, value] : table)
        if (name == key) return value;
    throw ConfigError("experiment: unknown value '" + name + "'");
}

SimulationInputs Scenario::inputs(unsigned threads) const {
    SimulationInputs in;
    in.qd = qd;
    in.pulses = pulses;
    in.sequence = sequence;
    in.det1 = det1;
    in.det2 = det2;
    in.bs = beamsplitter;
    in.seed = seed;
    in.threads = threads;
    return in;
}

void Scenario::validate() const {
    try {
        qd.validate();
        pulses.tpe.validate();
        pulses.stim.validate();
        det1.validate();
        det2.validate();
        beamsplitter.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    sequence.validate();
    if (scan.step <= 0.0) throw ConfigError("scan.step must be > 0");
    if (scan.max < scan.min) throw ConfigError("scan.max must be >= scan.min");
    if (rabi.detuning_points < 2 || rabi.area_points < 2)
        throw ConfigError("rabi grid needs at least 2 points per axis");
}

namespace {

double get_num(const json& j, const char* path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number())
        throw ConfigError(std::string(path) + "." + key + ": expected a number");
    return v.get<double>();
}

bool get_bool(const json& j, const char* path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean())
        throw ConfigError(std::string(path) + "." + key + ": expected a boolean");
    return v.get<bool>();
}

std::int64_t get_int(const json& j, const char* path, const char* key, std::int64_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(std::string(path) + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

QdParameters parse_qd(const json& j) {
    QdParameters qd;
    qd.t1_x = get_num(j, "qd", "t1_x", qd.t1_x);
    qd.t1_xx = get_num(j, "qd", "t1_xx", qd.t1_xx);
    qd.fss = get_num(j, "qd", "fss", qd.fss);
    qd.sigma = get_num(j, "qd", "sigma", qd.sigma);
    qd.gamma = get_num(j, "qd", "gamma", qd.gamma);
    qd.prep_fidelity = get_num(j, "qd", "prep_fidelity", qd.prep_fidelity);
    qd.stim_fidelity = get_num(j, "qd", "stim_fidelity", qd.stim_fidelity);
    qd.reexcitation_prob = get_num(j, "qd", "reexcitation_prob", qd.reexcitation_prob);
    return qd;
}

PulseParameters parse_pulse(const json& j, const char* path, PulseParameters base) {
    base.area = get_num(j, path, "area", base.area);
    base.detuning = get_num(j, path, "detuning", base.detuning);
    base.duration = get_num(j, path, "duration", base.duration);
    return base;
}

DetectorModel parse_detector(const json& j, const char* path, DetectorModel base) {
    base.efficiency = get_num(j, path, "efficiency", base.efficiency);
    base.jitter_sigma = get_num(j, path, "jitter_sigma", base.jitter_sigma);
    base.dark_rate = get_num(j, path, "dark_rate", base.dark_rate);
    base.dead_time = get_num(j, path, "dead_time", base.dead_time);
    return base;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    Scenario s;
    if (j.contains("qd")) s.qd = parse_qd(j.at("qd"));
    if (j.contains("pulses")) {
        const auto& p = j.at("pulses");
        if (p.contains("tpe")) s.pulses.tpe = parse_pulse(p.at("tpe"), "pulses.tpe", s.pulses.tpe);
        if (p.contains("stim"))
            s.pulses.stim = parse_pulse(p.at("stim"), "pulses.stim", s.pulses.stim);
    }
    if (j.contains("sequence")) {
        const auto& q = j.at("sequence");
        s.sequence.rep_period = get_num(q, "sequence", "rep_period", s.sequence.rep_period);
        s.sequence.pair_delay = get_num(q, "sequence", "pair_delay", s.sequence.pair_delay);
        s.sequence.stim_delay = get_num(q, "sequence", "stim_delay", s.sequence.stim_delay);
        s.sequence.n_periods = get_int(q, "sequence", "n_periods", s.sequence.n_periods);
        if (q.contains("duration")) {
            if (q.contains("n_periods"))
                throw ConfigError("sequence: give either duration or n_periods, not both");
            const double duration = get_num(q, "sequence", "duration", 0.0);
            if (!(duration > 0.0)) throw ConfigError("sequence.duration must be > 0");
            s.sequence.n_periods = static_cast<std::int64_t>(
                std::llround(duration / s.sequence.rep_period));
            if (s.sequence.n_periods < 1) throw ConfigError("sequence.duration below one period");
        }
        s.sequence.stim_enabled_h = get_bool(q, "sequence", "stim_enabled_h", s.sequence.stim_enabled_h);
        s.sequence.stim_enabled_v = get_bool(q, "sequence", "stim_enabled_v", s.sequence.stim_enabled_v);
        s.sequence.v_branch_first = get_bool(q, "sequence", "v_branch_first", s.sequence.v_branch_first);
    }
    if (j.contains("detectors")) {
        const auto& d = j.at("detectors");
        if (d.contains("d1")) s.det1 = parse_detector(d.at("d1"), "detectors.d1", s.det1);
        if (d.contains("d2")) s.det2 = parse_detector(d.at("d2"), "detectors.d2", s.det2);
    }
    if (j.contains("beamsplitter")) {
        const auto& b = j.at("beamsplitter");
        s.beamsplitter.r = get_num(b, "beamsplitter", "r", s.beamsplitter.r);
        s.beamsplitter.t = get_num(b, "beamsplitter", "t", s.beamsplitter.t);
    }
    if (j.contains("experiment")) {
        if (!j.at("experiment").is_string())
            throw ConfigError("experiment: expected a string");
        s.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    }
    s.seed = static_cast<std::uint64_t>(get_int(j, "", "seed", static_cast<std::int64_t>(s.seed)));
    if (j.contains("scan")) {
        const auto& sc = j.at("scan");
        s.scan.min = get_num(sc, "scan", "min", s.scan.min);
        s.scan.max = get_num(sc, "scan", "max", s.scan.max);
        s.scan.step = get_num(sc, "scan", "step", s.scan.step);
    }
    if (j.contains("rabi")) {
        const auto& rb = j.at("rabi");
        s.rabi.detuning_min = get_num(rb, "rabi", "detuning_min", s.rabi.detuning_min);
        s.rabi.detuning_max = get_num(rb, "rabi", "detuning_max", s.rabi.detuning_max);
        s.rabi.detuning_points =
            static_cast<int>(get_int(rb, "rabi", "detuning_points", s.rabi.detuning_points));
        s.rabi.area_min = get_num(rb, "rabi", "area_min", s.rabi.area_min);
        s.rabi.area_max = get_num(rb, "rabi", "area_max", s.rabi.area_max);
        s.rabi.area_points = static_cast<int>(get_int(rb, "rabi", "area_points", s.rabi.area_points));
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return scenario_from_json(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["qd"] = {{"t1_x", s.qd.t1_x},
               {"t1_xx", s.qd.t1_xx},
               {"fss", s.qd.fss},
               {"sigma", s.qd.sigma},
               {"gamma", s.qd.gamma},
               {"prep_fidelity", s.qd.prep_fidelity},
               {"stim_fidelity", s.qd.stim_fidelity},
               {"reexcitation_prob", s.qd.reexcitation_prob}};
    j["pulses"] = {{"tpe",
                    {{"area", s.pulses.tpe.area},
                     {"detuning", s.pulses.tpe.detuning},
                     {"duration", s.pulses.tpe.duration}}},
                   {"stim",
                    {{"area", s.pulses.stim.area},
                     {"detuning", s.pulses.stim.detuning},
                     {"duration", s.pulses.stim.duration}}}};
    j["sequence"] = {{"rep_period", s.sequence.rep_period},
                     {"pair_delay", s.sequence.pair_delay},
                     {"stim_delay", s.sequence.stim_delay},
                     {"n_periods", s.sequence.n_periods},
                     {"stim_enabled_h", s.sequence.stim_enabled_h},
                     {"stim_enabled_v", s.sequence.stim_enabled_v},
                     {"v_branch_first", s.sequence.v_branch_first}};
    auto det_json = [](const DetectorModel& d) {
        return json{{"efficiency", d.efficiency},
                    {"jitter_sigma", d.jitter_sigma},
                    {"dark_rate", d.dark_rate},
                    {"dead_time", d.dead_time}};
    };
    j["detectors"] = {{"d1", det_json(s.det1)}, {"d2", det_json(s.det2)}};
    j["beamsplitter"] = {{"r", s.beamsplitter.r}, {"t", s.beamsplitter.t}};
    j["experiment"] = to_string(s.experiment);
    j["seed"] = s.seed;
    j["scan"] = {{"min", s.scan.min}, {"max", s.scan.max}, {"step", s.scan.step}};
    j["rabi"] = {{"detuning_min", s.rabi.detuning_min}, {"detuning_max", s.rabi.detuning_max},
                 {"detuning_points", s.rabi.detuning_points}, {"area_min", s.rabi.area_min},
                 {"area_max", s.rabi.area_max}, {"area_points", s.rabi.area_points}};
    return j.dump(2);
}

namespace {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::string Scenario::hash() const {
    const std::uint64_t h = fnv1a64(scenario_to_json(*this));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qdmux
