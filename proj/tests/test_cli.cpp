#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <json.hpp>

#include "perchsim/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const char* bin = std::getenv("PERCHSIM_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "PERCHSIM_BIN must point at the CLI binary");
    const std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult res;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string src_dir() { return PERCHSIM_SOURCE_DIR; }

fs::path fresh_out_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("perchsim_cli_" + tag);
    fs::remove_all(dir);
    return dir;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        for (auto f : perchsim::split(line, ',')) row.emplace_back(f);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("simulate: exit codes follow the outcome") {
    const auto out = fresh_out_dir("sim");
    const auto ok = run_cli("--config " + src_dir() + "/data/scenarios/drop_mid.scn --out " +
                            out.string() + " simulate");
    CHECK(ok.exit_code == 0);
    const auto report = json::parse(ok.out);
    CHECK(report.at("classification") == "success");
    CHECK(fs::exists(out / "outcome.json"));
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "manifest.jsonl"));

    const auto fail = run_cli("--config " + src_dir() +
                              "/data/scenarios/drop_high.scn --out " + out.string() +
                              " simulate");
    CHECK(fail.exit_code == 2);
    CHECK(json::parse(fail.out).at("classification") == "bounce-out");

    const auto missing = run_cli("--config /no/such/file.scn simulate");
    CHECK(missing.exit_code == 1);
}

TEST_CASE("simulate: gentle placement never triggers") {
    const auto out = fresh_out_dir("gentle");
    const auto res = run_cli("--config " + src_dir() +
                             "/data/scenarios/gentle_place.scn --out " + out.string() +
                             " simulate");
    CHECK(res.exit_code == 2);
    CHECK(json::parse(res.out).at("classification") == "no-trigger");
}

TEST_CASE("sweep: deterministic, machine-parsable, bounded") {
    const auto out = fresh_out_dir("sweep");
    const std::string args = "--seed 42 --out " + out.string() +
                             " sweep --v-steps 4 --incl-steps 2 --trials 5";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);   // byte-identical rerun
    const auto rows = parse_csv(a.out);
    REQUIRE(rows.size() == 1 + 4 * 2);
    CHECK(rows[0][0] == "velocity_mps");
    CHECK(fs::exists(out / "envelope.csv"));
    CHECK(fs::exists(out / "envelope.json"));

    const auto bad = run_cli("sweep --v-steps 0");
    CHECK(bad.exit_code == 1);
}

TEST_CASE("sweep: the default grid marks 1.0 m/s level as success") {
    const auto out = fresh_out_dir("sweep_default");
    const auto res = run_cli("--seed 42 --out " + out.string() + " sweep");
    REQUIRE(res.exit_code == 0);
    bool found = false;
    for (const auto& row : parse_csv(res.out)) {
        if (row.size() == 4 && row[0] == "1" && row[1] == "0") {
            CHECK(row[3] == "success");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("statics: catalog table with the diamond row on top") {
    const auto res = run_cli("statics");
    REQUIRE(res.exit_code == 0);
    const auto rows = parse_csv(res.out);
    REQUIRE(rows.size() == 7);   // header + six perches
    double best_pull = 0.0;
    double best_rot = 0.0;
    double best_axial = 0.0;
    std::string best_pull_label, best_rot_label, best_axial_label;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double pull = *perchsim::parse_double(rows[i][1]);
        const double rot = *perchsim::parse_double(rows[i][2]);
        const double axial = *perchsim::parse_double(rows[i][3]);
        if (pull > best_pull) { best_pull = pull; best_pull_label = rows[i][0]; }
        if (rot > best_rot) { best_rot = rot; best_rot_label = rows[i][0]; }
        if (axial > best_axial) { best_axial = axial; best_axial_label = rows[i][0]; }
    }
    CHECK(best_pull_label == "square-diamond");
    CHECK(best_rot_label == "square-diamond");
    CHECK(best_axial_label == "square-diamond");
}

TEST_CASE("statics: single perch filter and inclination sweep") {
    const auto one = run_cli("statics --perch wood-d40");
    REQUIRE(one.exit_code == 0);
    CHECK(parse_csv(one.out).size() == 2);

    const auto sweep = run_cli("statics --inclination-sweep");
    REQUIRE(sweep.exit_code == 0);
    const auto rows = parse_csv(sweep.out);
    REQUIRE(rows.size() == 5);   // header + 0/5/10/12.5
    double prev = 1e9;
    double final_axial = 1e9;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double axial = *perchsim::parse_double(rows[i][4]);
        CHECK(axial <= prev);
        prev = axial;
        final_axial = axial;
    }
    CHECK(final_axial <= 0.01);
}

TEST_CASE("analyze: paired corpus statistics") {
    std::string files;
    for (int i = 0; i < 26; ++i) {
        char m[64], im[64];
        std::snprintf(m, sizeof(m), "pair_%02d_mocap.csv", i);
        std::snprintf(im, sizeof(im), "pair_%02d_imu.csv", i);
        files += " " + src_dir() + "/data/corpus/" + m;
        files += " " + src_dir() + "/data/corpus/" + im;
    }
    const auto res = run_cli("analyze --paired" + files);
    REQUIRE(res.exit_code == 0);
    const auto report = json::parse(res.out);
    CHECK(report.at("count") == 26);
    CHECK(report.at("mean_discrepancy_pct").get<double>() <= 6.0);
    CHECK(report.at("std_discrepancy_pct").get<double>() <= 5.0);
}

TEST_CASE("analyze: bad files are skipped with a warning, all-bad fails") {
    const auto tmp = fs::temp_directory_path() / "perchsim_empty.csv";
    std::ofstream(tmp.string()).close();

    const auto mixed = run_cli("analyze " + tmp.string() + " " + src_dir() +
                               "/data/corpus/pair_00_imu.csv");
    CHECK(mixed.exit_code == 0);
    const auto report = json::parse(mixed.out);
    CHECK(report.size() == 1);   // the empty file was skipped

    const auto all_bad = run_cli("analyze " + tmp.string());
    CHECK(all_bad.exit_code == 1);
}

TEST_CASE("manifests append one entry per run, each listing its outputs") {
    const auto out = fresh_out_dir("manifest");
    const std::string cmd = "--config " + src_dir() +
                            "/data/scenarios/drop_mid.scn --out " + out.string() +
                            " simulate";
    run_cli(cmd);
    run_cli(cmd);
    std::ifstream mf((out / "manifest.jsonl").string());
    REQUIRE(mf.good());
    std::string line;
    std::size_t entries = 0;
    while (std::getline(mf, line)) {
        const auto j = json::parse(line);
        CHECK(j.at("command") == "simulate");
        CHECK(j.at("tool_version").is_string());
        CHECK(j.at("calibration_id").is_string());
        CHECK(j.at("duration_s").is_number());
        CHECK(j.at("outputs").size() >= 2);
        CHECK(j.at("status") == "complete");
        ++entries;
    }
    CHECK(entries == 2);
}

TEST_CASE("analyze: the full-cycle fixture reports all six phases") {
    const auto res = run_cli("analyze " + src_dir() + "/data/full_cycle_trace.csv");
    REQUIRE(res.exit_code == 0);
    const auto report = json::parse(res.out);
    REQUIRE(report.is_array());
    const auto& seg = report.at(0).at("segmentation");
    CHECK(seg.at("complete") == true);
    CHECK(seg.at("phases").size() == 6);
}

TEST_SUITE_END();
