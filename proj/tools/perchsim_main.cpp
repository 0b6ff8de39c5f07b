// perchsim command-line front end: simulate / sweep / statics / analyze.
// Standard output carries machine-parsable JSON or CSV only; progress and
// warnings go to standard error.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "perchsim/cycle.hpp"
#include "perchsim/impact.hpp"
#include "perchsim/scenario.hpp"
#include "perchsim/statics.hpp"
#include "perchsim/system.hpp"
#include "perchsim/telemetry.hpp"
#include "perchsim/util.hpp"
#include "perchsim/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace perchsim;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::string calibration_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

fs::path resolve_out_dir(const GlobalOpts& g) {
    if (!g.out_dir.empty()) return g.out_dir;
    if (const char* env = std::getenv("PERCHSIM_OUT")) return env;
    return "perchsim-out";
}

// Append-only run manifest; every output file is listed in exactly one entry.
void append_manifest(const fs::path& out_dir, const std::string& command,
                     const std::string& scenario_path, std::uint64_t seed,
                     const std::string& calibration_id,
                     const std::vector<std::string>& outputs, double duration_s,
                     const std::string& status) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream mf(out_dir / "manifest.jsonl", std::ios::app);
    mf << json{{"command", command},
               {"scenario", scenario_path},
               {"seed", seed},
               {"out_dir", out_dir.string()},
               {"tool_version", kVersion},
               {"calibration_id", calibration_id},
               {"duration_s", duration_s},
               {"outputs", outputs},
               {"status", status}}
              .dump()
       << '\n';
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// Resolves the run configuration: scenario file if given, defaults otherwise,
// then the calibration file and seed overrides on top.
scenario::ScenarioConfig resolve_config(const GlobalOpts& g) {
    scenario::ScenarioConfig cfg;
    if (!g.config_path.empty()) {
        auto result = scenario::load_scenario_file(g.config_path);
        if (!result.ok()) {
            std::string msg = "invalid scenario '" + g.config_path + "':";
            for (const auto& e : result.errors) msg += "\n  " + e.path + ": " + e.message;
            throw std::runtime_error(msg);
        }
        for (const auto& note : result.notes) std::cerr << "note: " << note << "\n";
        cfg = *result.config;
    } else {
        cfg.system = default_system();
        cfg.perch = core::catalog_perch("wood-d40").value();
        cfg.approach.perch = cfg.perch;
        cfg.approach.impact_velocity_mps = 0.82;
        cfg.approach.seed = 42;   // default master seed
    }
    if (!g.calibration_path.empty()) {
        std::ifstream in(g.calibration_path);
        if (!in) throw std::runtime_error("cannot open calibration " + g.calibration_path);
        cfg.system.calibration = CalibrationSet::from_json(json::parse(in));
    }
    if (g.seed_set) cfg.approach.seed = g.seed;
    return cfg;
}

int cmd_simulate(const GlobalOpts& g, bool full_cycle, double release_delay,
                 bool with_noise) {
    const auto t0 = std::chrono::steady_clock::now();
    auto cfg = resolve_config(g);
    const fs::path out_dir = resolve_out_dir(g);
    impact::TraceOptions opts;
    opts.with_noise = with_noise;

    json report;
    std::vector<std::string> outputs;
    int exit_code = 0;

    if (full_cycle) {
        auto run = cycle::run_full_cycle(cfg.approach, cfg.system, release_delay, opts);
        report = {{"full_cycle", true},
                  {"success", run.success},
                  {"attempt", impact::outcome_to_json(run.attempt)},
                  {"servo_energy_perched_j", run.servo_energy_perched_j},
                  {"ground_truth", telem::segmentation_to_json(run.ground_truth)}};
        write_file(out_dir / "outcome.json", report.dump(2) + "\n");
        write_file(out_dir / "trace.csv", telem::trace_to_csv(run.trace));
        write_file(out_dir / "events.jsonl", cycle::event_log_to_jsonl(run.event_log));
        outputs = {"outcome.json", "trace.csv", "events.jsonl"};
        exit_code = run.success ? 0 : 2;
    } else {
        impact::ImpactModel model(cfg.system);
        auto outcome = model.simulate_attempt(cfg.approach, opts);
        report = impact::outcome_to_json(outcome);
        write_file(out_dir / "outcome.json", report.dump(2) + "\n");
        write_file(out_dir / "trace.csv", telem::trace_to_csv(outcome.trace));
        outputs = {"outcome.json", "trace.csv"};
        if (!outcome.grip_log.empty()) {
            write_file(out_dir / "grip.csv", impact::grip_log_to_csv(outcome.grip_log));
            outputs.push_back("grip.csv");
        }
        exit_code = outcome.classification == impact::Outcome::Success ? 0 : 2;
    }
    const double dur =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    append_manifest(out_dir, full_cycle ? "simulate --full-cycle" : "simulate",
                    g.config_path, cfg.approach.seed, cfg.system.calibration.id(),
                    outputs, dur, "complete");
    std::cout << report.dump(2) << "\n";
    return exit_code;
}

int cmd_sweep(const GlobalOpts& g, double v_min, double v_max, int v_steps,
              double i_min, double i_max, int i_steps, int trials) {
    const auto t0 = std::chrono::steady_clock::now();
    if (v_steps < 1 || i_steps < 1 || !(v_max >= v_min) || !(i_max >= i_min)) {
        throw std::runtime_error("invalid grid bounds");
    }
    auto cfg = resolve_config(g);
    impact::ImpactModel model(cfg.system);
    std::vector<double> vs, incls;
    for (int i = 0; i < v_steps; ++i) {
        vs.push_back(v_steps == 1 ? v_min : v_min + (v_max - v_min) * i / (v_steps - 1));
    }
    for (int i = 0; i < i_steps; ++i) {
        incls.push_back(i_steps == 1 ? i_min : i_min + (i_max - i_min) * i / (i_steps - 1));
    }
    std::cerr << "sweep: " << vs.size() * incls.size() << " cells x " << trials
              << " trials\n";
    auto grid = model.sweep_envelope(vs, incls, trials, cfg.approach.seed);
    const fs::path out_dir = resolve_out_dir(g);
    write_file(out_dir / "envelope.csv", grid.to_csv());
    write_file(out_dir / "envelope.json", grid.to_json().dump(2) + "\n");
    const double dur =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    append_manifest(out_dir, "sweep", g.config_path, cfg.approach.seed,
                    cfg.system.calibration.id(), {"envelope.csv", "envelope.json"}, dur,
                    "complete");
    std::cout << grid.to_csv();
    return 0;
}

int cmd_statics(const GlobalOpts& g, const std::string& perch_filter,
                bool inclination_sweep) {
    const auto t0 = std::chrono::steady_clock::now();
    auto cfg = resolve_config(g);
    statics::StaticsModel model(cfg.system.mechanism, cfg.system.masses,
                                cfg.system.calibration);
    std::string csv;
    if (inclination_sweep) {
        const auto perch = perch_filter.empty()
                               ? core::catalog_perch("wood-d40").value()
                               : core::catalog_perch(perch_filter).value_or(cfg.perch);
        const double incl[] = {0.0, 5.0, 10.0, 12.5};
        csv = statics::fig7_csv(model, perch, incl);
    } else if (!perch_filter.empty()) {
        auto perch = core::catalog_perch(perch_filter);
        if (!perch) throw std::runtime_error("unknown catalog perch '" + perch_filter + "'");
        const auto env = model.envelope(*perch, 0.0);
        std::ostringstream os;
        os << "perch,pull_off_n,rotational_nm,axial_nm\n"
           << env.perch.label << ',' << format_double(env.pull_off_up_n) << ','
           << format_double(env.rotational_moment_nm) << ','
           << format_double(env.axial_moment_nm) << '\n';
        csv = os.str();
    } else {
        csv = statics::fig6_csv(model);
    }
    std::vector<std::string> outputs;
    const fs::path out_dir = resolve_out_dir(g);
    if (!g.out_dir.empty() || std::getenv("PERCHSIM_OUT") != nullptr) {
        const std::string name = inclination_sweep ? "statics_inclination.csv"
                                                   : "statics_catalog.csv";
        write_file(out_dir / name, csv);
        outputs.push_back(name);
        const double dur =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        append_manifest(out_dir, "statics", g.config_path, 0,
                        cfg.system.calibration.id(), outputs, dur, "complete");
    }
    std::cout << csv;
    return 0;
}

int cmd_analyze(const GlobalOpts& g, const std::vector<std::string>& files,
                double cutoff, const std::string& source, bool paired) {
    const auto t0 = std::chrono::steady_clock::now();
    auto cfg = resolve_config(g);
    json reports = json::array();
    std::size_t failures = 0;

    const auto source_matches = [&](const telem::TelemetryTrace& t) {
        if (source == "auto" || source.empty()) return true;
        if (source == "imu") return t.has_accel();
        if (source == "mocap") return t.has_position();
        throw std::runtime_error("unknown --source '" + source + "'");
    };

    if (paired) {
        if (files.size() % 2 != 0) {
            throw std::runtime_error("--paired expects mocap/imu file pairs");
        }
        std::vector<telem::PairDiscrepancy> pairs;
        json rows = json::array();
        for (std::size_t i = 0; i + 1 < files.size(); i += 2) {
            try {
                auto mocap = telem::load_trace_file(files[i]);
                auto imu = telem::load_trace_file(files[i + 1]);
                if (!mocap.has_position()) std::swap(mocap, imu);
                auto pd = telem::cross_validate_pair(mocap, imu);
                pairs.push_back(pd);
                rows.push_back({{"mocap_file", files[i]},
                                {"imu_file", files[i + 1]},
                                {"mocap_mps", pd.mocap_mps},
                                {"imu_mps", pd.imu_mps},
                                {"discrepancy_pct", pd.discrepancy_pct}});
            } catch (const std::exception& e) {
                std::cerr << "warning: skipping pair " << files[i] << ": " << e.what()
                          << "\n";
                ++failures;
            }
        }
        const auto stats = telem::discrepancy_stats(pairs);
        reports = {{"pairs", rows},
                   {"mean_discrepancy_pct", stats.mean_pct},
                   {"std_discrepancy_pct", stats.std_pct},
                   {"count", stats.count}};
    } else {
        const bool writing = !g.out_dir.empty() || std::getenv("PERCHSIM_OUT") != nullptr;
        const fs::path out_dir = resolve_out_dir(g);

        // Files are processed in parallel; entries land by index so the
        // report (and any warnings) come out in input order.
        struct FileResult {
            json entry;
            bool ok = false;
            bool skipped = false;
            std::string warning;
            std::string filtered_name;
            std::string filtered_csv;
        };
        std::vector<FileResult> results(files.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= files.size()) break;
                const auto& file = files[idx];
                FileResult& res = results[idx];
                try {
                    auto trace = telem::load_trace_file(file);
                    if (!source_matches(trace)) {
                        res.skipped = true;
                        res.warning = "skipping " + file + ": not a " + source + " trace";
                        continue;
                    }
                    json entry = {{"file", file}};
                    if (cutoff > 0.0 && trace.has_accel()) {
                        trace = telem::butterworth_lowpass(trace, cutoff);
                        entry["cutoff_hz"] = cutoff;
                        if (writing) {
                            res.filtered_name = fs::path(file).stem().string() + "_filtered.csv";
                            res.filtered_csv = telem::trace_to_csv(trace);
                            entry["filtered_csv"] = res.filtered_name;
                        }
                    }
                    if (trace.has_accel()) {
                        entry["segmentation"] =
                            telem::segmentation_to_json(telem::segment_cycle(trace));
                        try {
                            entry["impact_velocity_mps"] =
                                telem::velocity_from_accel(trace).impact_velocity_mps;
                        } catch (const std::exception& e) {
                            entry["impact_velocity_mps"] = nullptr;
                            entry["impact_velocity_error"] = e.what();
                        }
                    } else {
                        auto vp = telem::velocity_from_position(trace);
                        entry["impact_velocity_mps"] = vp.impact.impact_velocity_mps;
                    }
                    res.entry = std::move(entry);
                    res.ok = true;
                } catch (const std::exception& e) {
                    res.warning = "skipping " + file + ": " + e.what();
                }
            }
        };
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        hw = std::min<unsigned>(hw, static_cast<unsigned>(files.size()));
        if (hw <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned i = 0; i < hw; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        for (auto& res : results) {
            if (!res.warning.empty()) std::cerr << "warning: " << res.warning << "\n";
            if (res.ok) {
                if (!res.filtered_name.empty()) {
                    write_file(out_dir / res.filtered_name, res.filtered_csv);
                }
                reports.push_back(std::move(res.entry));
            } else if (!res.skipped) {
                ++failures;
            }
        }
    }

    const fs::path out_dir = resolve_out_dir(g);
    if (!g.out_dir.empty() || std::getenv("PERCHSIM_OUT") != nullptr) {
        write_file(out_dir / "analysis.json", reports.dump(2) + "\n");
        const double dur =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        append_manifest(out_dir, "analyze", g.config_path, 0,
                        cfg.system.calibration.id(), {"analysis.json"}, dur, "complete");
    }
    std::cout << reports.dump(2) << "\n";
    if (failures > 0 && failures == (paired ? files.size() / 2 : files.size())) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"perch-cycle simulator and telemetry toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "scenario file")->configurable(false);
    app.add_option("--out", g.out_dir, "output directory (or PERCHSIM_OUT)");
    app.add_option("--calibration", g.calibration_path, "calibration JSON override");
    auto* seed_opt = app.add_option("--seed", g.seed, "master seed override");

    auto* sim = app.add_subcommand("simulate", "simulate one perching attempt");
    bool full_cycle = false;
    bool with_noise = false;
    double release_delay = 10.0;
    sim->add_flag("--full-cycle", full_cycle, "run the landing/perch/take-off cycle");
    sim->add_option("--release-delay", release_delay, "perched hold before release (s)");
    sim->add_flag("--noise", with_noise, "add the calibrated sensor noise to traces");

    auto* sweep = app.add_subcommand("sweep", "regenerate the sufficiency envelope");
    double v_min = 0.2, v_max = 1.6, i_min = 0.0, i_max = 12.0;
    int v_steps = 15, i_steps = 7, trials = 50;
    sweep->add_option("--v-min", v_min, "lowest impact velocity (m/s)");
    sweep->add_option("--v-max", v_max, "highest impact velocity (m/s)");
    sweep->add_option("--v-steps", v_steps, "velocity grid points");
    sweep->add_option("--incl-min", i_min, "lowest inclination (deg)");
    sweep->add_option("--incl-max", i_max, "highest inclination (deg)");
    sweep->add_option("--incl-steps", i_steps, "inclination grid points");
    sweep->add_option("--trials", trials, "attempts per cell");

    auto* statics_cmd = app.add_subcommand("statics", "static hold envelope tables");
    std::string perch_filter;
    bool incl_sweep = false;
    statics_cmd->add_option("--perch", perch_filter, "single catalog perch");
    statics_cmd->add_flag("--inclination-sweep", incl_sweep,
                          "inclination table (0/5/10/12.5 deg)");

    auto* analyze = app.add_subcommand("analyze", "analyze telemetry CSV traces");
    std::vector<std::string> files;
    double cutoff = 0.0;
    std::string source = "auto";
    bool paired = false;
    analyze->add_option("files", files, "trace CSV files")->required();
    analyze->add_option("--cutoff", cutoff, "low-pass cutoff before analysis (Hz)");
    analyze->add_option("--source", source, "imu|mocap|auto");
    analyze->add_flag("--paired", paired, "cross-validate mocap/imu pairs");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (*sim) return cmd_simulate(g, full_cycle, release_delay, with_noise);
        if (*sweep) {
            return cmd_sweep(g, v_min, v_max, v_steps, i_min, i_max, i_steps, trials);
        }
        if (*statics_cmd) return cmd_statics(g, perch_filter, incl_sweep);
        if (*analyze) return cmd_analyze(g, files, cutoff, source, paired);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
