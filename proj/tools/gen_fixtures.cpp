// Regenerates the bundled synthetic fixtures under data/: the 26-pair
// mocap/IMU free-fall corpus and the reference full-cycle trace. Output is
// deterministic; run from the repository root after model changes.

#include <cstdio>
#include <filesystem>
#include <string>

#include "perchsim/cycle.hpp"
#include "perchsim/impact.hpp"
#include "perchsim/system.hpp"
#include "perchsim/telemetry.hpp"

namespace fs = std::filesystem;
using namespace perchsim;

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? argv[1] : ".";
    const fs::path corpus = root / "data" / "corpus";
    fs::create_directories(corpus);

    auto sys = default_system();
    impact::ImpactModel model(sys);
    const auto w40 = core::catalog_perch("wood-d40").value();

    for (int i = 0; i < 26; ++i) {
        const double v = 0.3 + (1.0 / 25.0) * i;
        impact::ApproachScenario s;
        s.impact_velocity_mps = v;
        s.perch = w40;
        s.disturbance = 0.0;
        s.seed = 1000 + static_cast<std::uint64_t>(i);
        impact::TraceOptions opts;
        opts.with_noise = true;
        const auto outcome = model.simulate_attempt(s, opts);

        telem::TelemetryTrace mocap = outcome.trace;
        mocap.accel.clear();
        mocap.source = telem::TraceSource::MoCap;
        telem::TelemetryTrace imu = outcome.trace;
        imu.position.clear();
        imu.source = telem::TraceSource::Imu;

        char name[64];
        std::snprintf(name, sizeof(name), "pair_%02d_mocap.csv", i);
        telem::write_trace_file((corpus / name).string(), mocap);
        std::snprintf(name, sizeof(name), "pair_%02d_imu.csv", i);
        telem::write_trace_file((corpus / name).string(), imu);
    }
    std::fprintf(stderr, "wrote 26 trace pairs to %s\n", corpus.string().c_str());

    impact::ApproachScenario s;
    s.impact_velocity_mps = 0.82;
    s.perch = w40;
    s.seed = 11;
    const auto run = cycle::run_full_cycle(s, sys, 10.0);
    telem::write_trace_file((root / "data" / "full_cycle_trace.csv").string(), run.trace);
    std::fprintf(stderr, "wrote data/full_cycle_trace.csv\n");
    return 0;
}
