#include <doctest.h>

#include <cstdio>
#include <string>

#include "qdmux/errors.hpp"
#include "qdmux/scenario.hpp"

using namespace qdmux;

TEST_CASE("an empty JSON object parses to the defaults") {
    const auto s = scenario_from_json("{}");
    CHECK(s.qd.t1_x == doctest::Approx(175e-12));
    CHECK(s.sequence.rep_period == doctest::Approx(12.5e-9));
    CHECK(s.experiment == Experiment::HbtH);
    CHECK(s.seed == 1);
}

TEST_CASE("a full scenario round-trips through its JSON form") {
    Scenario s;
    s.qd.fss = 9.5e-6;
    s.qd.sigma = 0.4e9;
    s.qd.reexcitation_prob = 0.05;
    s.pulses.stim.duration = 2e-12;
    s.sequence.n_periods = 777;
    s.sequence.stim_enabled_h = false;
    s.det1.efficiency = 0.55;
    s.det2.dead_time = 30e-9;
    s.beamsplitter = BeamsplitterParams{0.47, 0.53};
    s.experiment = Experiment::HomHV;
    s.seed = 123456789;
    const auto text = scenario_to_json(s);
    const auto back = scenario_from_json(text);
    CHECK(back.qd.fss == doctest::Approx(s.qd.fss));
    CHECK(back.qd.sigma == doctest::Approx(s.qd.sigma));
    CHECK(back.pulses.stim.duration == doctest::Approx(2e-12));
    CHECK(back.sequence.n_periods == 777);
    CHECK(back.sequence.stim_enabled_h == false);
    CHECK(back.det1.efficiency == doctest::Approx(0.55));
    CHECK(back.det2.dead_time == doctest::Approx(30e-9));
    CHECK(back.experiment == Experiment::HomHV);
    CHECK(back.seed == 123456789);
    CHECK(back.hash() == s.hash());
}

TEST_CASE("the scenario hash is stable and sensitive") {
    Scenario a;
    Scenario b;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.seed = 2;
    CHECK(a.hash() != b.hash());
    b = Scenario{};
    b.qd.fss = 7.1e-6;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("config errors carry the offending field") {
    CHECK_THROWS_AS(scenario_from_json("not json"), ConfigError);
    CHECK_THROWS_AS(scenario_from_json("[1,2]"), ConfigError);

    try {
        scenario_from_json(R"({"qd": {"t1_x": -1.0}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("t1_x") != std::string::npos);
    }
    try {
        scenario_from_json(R"({"experiment": "warp_drive"})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("warp_drive") != std::string::npos);
    }
    try {
        scenario_from_json(R"({"sequence": {"rep_period": "fast"}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("rep_period") != std::string::npos);
    }
    CHECK_THROWS_AS(scenario_from_json(R"({"beamsplitter": {"r": 0.4, "t": 0.5}})"), ConfigError);
}

TEST_CASE("duration is an accepted alternative to n_periods") {
    const auto s = scenario_from_json(R"({"sequence": {"duration": 2.5e-4}})");
    CHECK(s.sequence.n_periods == 20000);  // 250 us / 12.5 ns
    CHECK_THROWS_AS(scenario_from_json(R"({"sequence": {"duration": 1e-3, "n_periods": 5}})"),
                    ConfigError);
    CHECK_THROWS_AS(scenario_from_json(R"({"sequence": {"duration": 1e-12}})"), ConfigError);
}

TEST_CASE("experiment names round-trip") {
    for (const auto e : {Experiment::HbtH, Experiment::HbtCombined, Experiment::HomCoV,
                         Experiment::HomHV, Experiment::DelayScan, Experiment::RabiMap,
                         Experiment::Lifetime})
        CHECK(experiment_from_string(to_string(e)) == e);
}

TEST_CASE("tag streams round-trip through the text format") {
    TimeTagStream s1{1, "d1", {5, 10, 10, 250}, 1e-6};
    TimeTagStream s2{2, "d2", {1, 7, 300}, 1e-6};
    Provenance prov;
    prov.scenario_hash = "0123456789abcdef";
    prov.seed = 4242;
    const std::string path = "test_tags_roundtrip.txt";
    const TimeTagStream streams[] = {s1, s2};
    write_tag_streams(path, prov, streams);

    Provenance back;
    const auto read = read_tag_streams(path, &back);
    REQUIRE(read.size() == 2);
    CHECK(read[0].channel == 1);
    CHECK(read[0].tags == s1.tags);
    CHECK(read[0].label == "d1");
    CHECK(read[1].tags == s2.tags);
    CHECK(back.seed == 4242);
    CHECK(back.scenario_hash == "0123456789abcdef");
    CHECK(read[0].duration == doctest::Approx(1e-6));
    std::remove(path.c_str());
}

TEST_CASE("malformed tag rows are data errors") {
    const std::string path = "test_tags_bad.txt";
    {
        FILE* f = fopen(path.c_str(), "w");
        fputs("# qdmux tags v1\n1\tnot_a_number\n", f);
        fclose(f);
    }
    CHECK_THROWS_AS(read_tag_streams(path), DataError);
    std::remove(path.c_str());
}
