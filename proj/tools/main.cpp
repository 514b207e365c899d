// qdmux: scenario-driven simulation of passively demultiplexed two-photon
// generation, tag-stream analysis, closed-form visibility models, and the
// demultiplexing rate budget.

#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qdmux/constants.hpp"
#include "qdmux/demux.hpp"
#include "qdmux/errors.hpp"
#include "qdmux/faddeeva.hpp"
#include "qdmux/fits.hpp"
#include "qdmux/parallel.hpp"
#include "qdmux/pipeline.hpp"
#include "qdmux/scenario.hpp"
#include "qdmux/visibility.hpp"

namespace {

using nlohmann::json;

void write_json_file(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw qdmux::DataError("cannot open " + path + " for writing");
    os << j.dump(2) << "\n";
}

const qdmux::TimeTagStream& channel_of(const std::vector<qdmux::TimeTagStream>& streams, int ch) {
    for (const auto& s : streams)
        if (s.channel == ch) return s;
    throw qdmux::DataError("channel " + std::to_string(ch) + " not present in tag file");
}

struct AnalyzeCommon {
    std::string out_dir;
    double bin = 50e-12;
    double span = 40e-9;
    double rep = 12.5e-9;
    double window = 1e-9;
    int ch_a = 1;
    int ch_b = 2;
};

void add_common(CLI::App* cmd, AnalyzeCommon& c) {
    cmd->add_option("--out", c.out_dir, "Directory for histogram/result artifacts");
    cmd->add_option("--bin", c.bin, "Histogram bin width, s");
    cmd->add_option("--span", c.span, "Correlation half-span, s");
    cmd->add_option("--rep", c.rep, "Repetition period, s");
    cmd->add_option("--window", c.window, "Peak integration window, s");
    cmd->add_option("--a", c.ch_a, "First channel id");
    cmd->add_option("--b", c.ch_b, "Second channel id");
}

json provenance_json(const qdmux::Provenance& prov) {
    return json{{"scenario_hash", prov.scenario_hash}, {"seed", prov.seed}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"passively demultiplexed two-photon source: simulation and analysis"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker count (default: QDMUX_THREADS or hardware)");

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "Run a scenario and write tag/table artifacts");
    std::string config_path, sim_out = ".";
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    sim->add_option("--config", config_path, "Scenario JSON")->required();
    sim->add_option("--out", sim_out, "Output directory");
    sim->add_option("--seed", seed_override, "Override the scenario seed")
        ->each([&has_seed](const std::string&) { has_seed = true; });

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "Extract metrics from tag files");
    analyze->require_subcommand(1);

    auto* g2cmd = analyze->add_subcommand("g2", "Second-order correlation from an HBT tag file");
    std::string g2_tags;
    AnalyzeCommon g2c;
    g2cmd->add_option("--tags", g2_tags, "Tag file")->required();
    add_common(g2cmd, g2c);

    auto* homcmd = analyze->add_subcommand("hom", "HOM visibility from co/cross tag files");
    std::string hom_co, hom_cross;
    AnalyzeCommon homc;
    double hom_g2 = -1.0, hom_r = 0.5, hom_t = 0.5;
    homcmd->add_option("--co", hom_co, "Co-polarized tag file")->required();
    homcmd->add_option("--cross", hom_cross, "Cross-polarized tag file")->required();
    homcmd->add_option("--g2", hom_g2, "g2(0) for the corrected value");
    homcmd->add_option("--r", hom_r, "Beamsplitter reflectance");
    homcmd->add_option("--t", hom_t, "Beamsplitter transmittance");
    add_common(homcmd, homc);

    auto* lifecmd =
        analyze->add_subcommand("lifetime", "Exponential lifetime from sync/click channels");
    std::string life_tags;
    AnalyzeCommon lifec;
    lifec.bin = 10e-12;
    lifec.span = 1.9e-9;
    lifec.ch_a = 0;
    lifec.ch_b = 1;
    lifecmd->add_option("--tags", life_tags, "Tag file with a sync channel")->required();
    add_common(lifecmd, lifec);

    auto* corrcmd = analyze->add_subcommand("correlate", "Raw coincidence histogram");
    std::string corr_a_file, corr_b_file, corr_out = "histogram.txt";
    AnalyzeCommon corrc;
    corrcmd->add_option("--a-file", corr_a_file, "Tag file for stream a")->required();
    corrcmd->add_option("--b-file", corr_b_file, "Tag file for stream b (defaults to a)");
    corrcmd->add_option("--hist", corr_out, "Histogram output path");
    add_common(corrcmd, corrc);

    auto* fsscmd = analyze->add_subcommand("fss", "Fine-structure splitting from analyzer samples");
    std::string fss_samples;
    fsscmd->add_option("--samples", fss_samples, "Two-column table: angle_rad energy_eV")
        ->required();

    // ---- model ----
    auto* model = app.add_subcommand("model", "Closed-form figures of merit");
    std::vector<double> eq1_args;
    model->add_option("--correct,--eq1", eq1_args, "v_raw g2 R T -> corrected visibility")->expected(4);
    bool want_eq2 = false, want_limit = false, want_map = false, want_linecut = false;
    model->add_flag("--visibility,--eq2", want_eq2, "Wandering-averaged visibility");
    model->add_flag("--limit", want_limit, "Vanishing-wandering visibility limit");
    model->add_flag("--map", want_map, "Visibility map table");
    model->add_flag("--linecut", want_linecut, "Fixed-lifetime line cut of the map");
    double m_t1 = 170e-12, m_fss = 7.0e-6, m_sigma = 0.0, m_gamma_pd = 0.0;
    model->add_option("--t1", m_t1, "Lifetime, s");
    model->add_option("--fss", m_fss, "Fine-structure splitting, eV");
    model->add_option("--sigma", m_sigma, "Pairwise wandering std, Hz");
    model->add_option("--gamma-pd", m_gamma_pd, "Extra pure dephasing, Hz");
    std::vector<double> fad_args;
    model->add_option("--faddeeva", fad_args, "re im -> w(z)")->expected(2);
    std::string model_out = ".";
    model->add_option("--out", model_out, "Output directory for map tables");
    qdmux::MapSpec map_spec;
    model->add_option("--t1-min", map_spec.t1_min, "Map: min lifetime, s");
    model->add_option("--t1-max", map_spec.t1_max, "Map: max lifetime, s");
    model->add_option("--t1-points", map_spec.t1_points, "Map: lifetime points");
    model->add_option("--fss-min", map_spec.fss_min, "Map: min splitting, eV");
    model->add_option("--fss-max", map_spec.fss_max, "Map: max splitting, eV");
    model->add_option("--fss-points", map_spec.fss_points, "Map: splitting points");

    // ---- budget ----
    auto* budget = app.add_subcommand("budget", "Demultiplexing rate/loss report");
    qdmux::DemuxScheme scheme;
    budget->add_option("--n", scheme.n_modes, "Number of spatial modes")->required();
    bool passive = false;
    budget->add_flag("--passive", passive, "Passive polarization doubling feeds the tree");
    budget->add_option("--rep-rate", scheme.rep_rate, "Source clock, Hz");
    budget->add_option("--efficiency", scheme.source_efficiency, "Per-shot source efficiency");
    budget->add_option("--eom-loss-db", scheme.eom_loss_db, "Loss per EOM traversal, dB");
    budget->add_option("--eom-max-rate", scheme.eom_max_rate, "Fastest available EOM, Hz");
    budget->add_option("--t1", scheme.t1_x, "Exciton lifetime for the clock bound, s");
    int sweep_max = 0;
    std::string sweep_out = "budget_sweep.txt";
    budget->add_option("--sweep", sweep_max, "Also emit a 1..N mode sweep table");
    budget->add_option("--sweep-out", sweep_out, "Sweep table path");

    // ---- reproduce ----
    auto* repro = app.add_subcommand("reproduce", "Full pipeline with a summary against targets");
    qdmux::ReproduceOptions ropts;
    repro->add_option("--out", ropts.out_dir, "Output directory");
    repro->add_option("--seed", ropts.seed, "Master seed");
    repro->add_option("--scale", ropts.scale, "Monte Carlo size multiplier");

    CLI11_PARSE(app, argc, argv);

    try {
        threads = qdmux::resolve_thread_count(threads);

        if (*sim) {
            qdmux::Scenario s = qdmux::load_scenario(config_path);
            if (has_seed) s.seed = seed_override;
            const auto files = qdmux::run_simulate(s, sim_out, threads);
            for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
            return 0;
        }

        if (*g2cmd) {
            qdmux::Provenance prov;
            const auto streams = qdmux::read_tag_streams(g2_tags, &prov);
            const auto res = qdmux::analyze_g2(channel_of(streams, g2c.ch_a),
                                               channel_of(streams, g2c.ch_b), g2c.bin, g2c.span,
                                               g2c.rep, g2c.window, threads);
            std::printf("g2(0) = %.6f +- %.6f\n", res.g2.value, res.g2.uncertainty);
            if (!g2c.out_dir.empty()) {
                std::filesystem::create_directories(g2c.out_dir);
                qdmux::write_histogram(g2c.out_dir + "/hist_g2.txt", res.histogram, prov);
                json out{{"metric", "g2"},
                         {"value", res.g2.value},
                         {"uncertainty", res.g2.uncertainty},
                         {"window_s", res.g2.window},
                         {"peak_areas", res.g2.peak_areas},
                         {"provenance", provenance_json(prov)}};
                write_json_file(g2c.out_dir + "/result_g2.json", out);
            }
            return 0;
        }

        if (*homcmd) {
            qdmux::Provenance prov_co, prov_cross;
            const auto co = qdmux::read_tag_streams(hom_co, &prov_co);
            const auto cross = qdmux::read_tag_streams(hom_cross, &prov_cross);
            const auto res = qdmux::analyze_hom(
                channel_of(co, homc.ch_a), channel_of(co, homc.ch_b), channel_of(cross, homc.ch_a),
                channel_of(cross, homc.ch_b), homc.bin, homc.span, homc.rep, homc.window, threads);
            std::printf("V_raw = %.6f +- %.6f\n", res.raw.value, res.raw.uncertainty);
            double corrected = 0.0;
            if (hom_g2 >= 0.0) {
                corrected = qdmux::correct_hom(res.raw.value, hom_g2, hom_r, hom_t);
                std::printf("V_corrected = %.6f\n", corrected);
            }
            if (!homc.out_dir.empty()) {
                std::filesystem::create_directories(homc.out_dir);
                qdmux::write_histogram(homc.out_dir + "/hist_hom_co.txt", res.co_histogram,
                                       prov_co);
                qdmux::write_histogram(homc.out_dir + "/hist_hom_cross.txt", res.cross_histogram,
                                       prov_cross);
                json out{{"metric", "hom_visibility"},
                         {"raw", res.raw.value},
                         {"uncertainty", res.raw.uncertainty},
                         {"window_s", res.raw.window},
                         {"peak_areas", res.raw.peak_areas},
                         {"provenance",
                          {{"co", provenance_json(prov_co)}, {"cross", provenance_json(prov_cross)}}}};
                if (hom_g2 >= 0.0) out["corrected"] = corrected;
                write_json_file(homc.out_dir + "/result_hom.json", out);
            }
            return 0;
        }

        if (*lifecmd) {
            qdmux::Provenance prov;
            const auto streams = qdmux::read_tag_streams(life_tags, &prov);
            const auto res = qdmux::analyze_lifetime(channel_of(streams, lifec.ch_a),
                                                     channel_of(streams, lifec.ch_b), lifec.bin,
                                                     lifec.span, threads);
            std::printf("T1 = %.2f ps +- %.2f ps\n", res.fit.t1 * 1e12, res.fit.uncertainty * 1e12);
            if (!lifec.out_dir.empty()) {
                std::filesystem::create_directories(lifec.out_dir);
                qdmux::write_histogram(lifec.out_dir + "/hist_lifetime.txt", res.histogram, prov);
                json out{{"metric", "lifetime"},
                         {"t1_s", res.fit.t1},
                         {"uncertainty_s", res.fit.uncertainty},
                         {"amplitude", res.fit.amplitude},
                         {"background", res.fit.background},
                         {"provenance", provenance_json(prov)}};
                write_json_file(lifec.out_dir + "/result_lifetime.json", out);
            }
            return 0;
        }

        if (*corrcmd) {
            qdmux::Provenance prov;
            const auto a_streams = qdmux::read_tag_streams(corr_a_file, &prov);
            const auto& a = channel_of(a_streams, corrc.ch_a);
            std::vector<qdmux::TimeTagStream> b_streams;
            const qdmux::TimeTagStream* b = nullptr;
            if (corr_b_file.empty() || corr_b_file == corr_a_file) {
                b = &channel_of(a_streams, corrc.ch_b);
            } else {
                b_streams = qdmux::read_tag_streams(corr_b_file);
                b = &channel_of(b_streams, corrc.ch_b);
            }
            const auto h = qdmux::cross_correlate(a, *b, qdmux::to_ps(corrc.bin),
                                                  qdmux::to_ps(corrc.span), threads);
            qdmux::write_histogram(corr_out, h, prov);
            std::printf("wrote %s (%llu pairs)\n", corr_out.c_str(),
                        static_cast<unsigned long long>(h.total_pairs));
            return 0;
        }

        if (*fsscmd) {
            std::ifstream is(fss_samples);
            if (!is) throw qdmux::DataError("cannot open " + fss_samples);
            std::vector<std::pair<double, double>> samples;
            std::string line;
            while (std::getline(is, line)) {
                if (line.empty() || line[0] == '#') continue;
                double angle = 0.0, energy = 0.0;
                if (std::sscanf(line.c_str(), "%lf %lf", &angle, &energy) == 2)
                    samples.emplace_back(angle, energy);
            }
            const auto fit = qdmux::fit_fss(samples);
            std::printf("FSS = %.4f ueV +- %.4f ueV\n", fit.fss * 1e6, fit.uncertainty * 1e6);
            return 0;
        }

        if (*model) {
            if (!eq1_args.empty()) {
                std::printf("%.3f\n",
                            qdmux::correct_hom(eq1_args[0], eq1_args[1], eq1_args[2], eq1_args[3]));
                return 0;
            }
            if (!fad_args.empty()) {
                const auto w = qdmux::faddeeva({fad_args[0], fad_args[1]});
                std::printf("%.12e %.12e\n", w.real(), w.imag());
                return 0;
            }
            if (want_eq2) {
                qdmux::VisibilityInputs in{m_t1, m_fss / qdmux::kPlanckEvS, m_sigma,
                                    m_gamma_pd > 0.0 ? 1.0 / m_t1 + m_gamma_pd : 0.0};
                std::printf("%.6f\n", qdmux::visibility_wandering(in));
                return 0;
            }
            if (want_limit) {
                const double gamma = 1.0 / m_t1 + m_gamma_pd;
                std::printf("%.6f\n",
                            qdmux::visibility_limit(m_t1, m_fss / qdmux::kPlanckEvS, gamma));
                return 0;
            }
            if (want_map || want_linecut) {
                map_spec.sigma = m_sigma;
                map_spec.gamma_pd = m_gamma_pd;
                const auto map = qdmux::visibility_map(map_spec, threads);
                std::filesystem::create_directories(model_out);
                qdmux::Provenance prov;
                prov.scenario_hash = "model";
                if (want_map) {
                    const auto path = model_out + "/visibility_map.txt";
                    qdmux::write_visibility_map(path, map, prov);
                    std::printf("wrote %s\n", path.c_str());
                }
                if (want_linecut) {
                    const auto cut = qdmux::map_line_cut(map, m_t1);
                    char name[64];
                    std::snprintf(name, sizeof name, "/visibility_linecut_%.0fps.txt",
                                  m_t1 * 1e12);
                    const auto path = model_out + name;
                    qdmux::write_line_cut(path, cut, m_t1, prov);
                    std::printf("wrote %s\n", path.c_str());
                }
                return 0;
            }
            throw qdmux::ConfigError(
                "model: pick one of --correct/--visibility/--limit/--faddeeva/--map/--linecut");
        }

        if (*budget) {
            scheme.passive_doubling = passive;
            std::printf("%s", qdmux::budget_report_json(scheme).c_str());
            if (sweep_max > 0) {
                std::ofstream os(sweep_out);
                if (!os) throw qdmux::DataError("cannot open " + sweep_out);
                os << "# qdmux budget-sweep v1\n# columns n_modes rate_active_hz rate_passive_hz\n";
                char line[96];
                for (int n = 1; n <= sweep_max; ++n) {
                    qdmux::DemuxScheme a = scheme, p = scheme;
                    a.n_modes = n;
                    a.passive_doubling = false;
                    p.n_modes = n;
                    p.passive_doubling = true;
                    std::snprintf(line, sizeof line, "%d\t%.6e\t%.6e\n", n,
                                  qdmux::multiphoton_rate(a).rate, qdmux::multiphoton_rate(p).rate);
                    os << line;
                }
                std::printf("wrote %s\n", sweep_out.c_str());
            }
            return 0;
        }

        if (*repro) {
            ropts.threads = threads;
            qdmux::run_reproduce(ropts);
            std::printf("wrote %s/summary.txt\n", ropts.out_dir.c_str());
            return 0;
        }
    } catch (const qdmux::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const qdmux::ParameterError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
