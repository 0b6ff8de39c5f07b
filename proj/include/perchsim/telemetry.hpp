#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "perchsim/calibration.hpp"

namespace perchsim::telem {

enum class TraceSource { Imu, MoCap, Synthetic };

std::string source_name(TraceSource s);

// Uniform-rate time series. Accel follows the flight-log convention of the
// recorded data: gravity excluded, so hover reads ~0 and free fall reads -g
// on the vertical axis.
struct TelemetryTrace {
    double sample_rate_hz = 250.0;
    double t0_s = 0.0;
    std::vector<std::array<double, 3>> accel;      // m/s^2 (x, y, z)
    std::vector<std::array<double, 3>> position;   // m; empty if absent
    TraceSource source = TraceSource::Synthetic;
    bool gravity_excluded = true;

    std::size_t size() const {
        return accel.empty() ? position.size() : accel.size();
    }
    double dt() const { return 1.0 / sample_rate_hz; }
    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) * dt(); }
    bool has_position() const { return !position.empty(); }
    bool has_accel() const { return !accel.empty(); }

    std::vector<double> accel_z() const;
    std::vector<double> position_z() const;
};

// CSV ingestion. IMU format: t,ax,ay,az. MoCap format: t,x,y,z. Optional
// '#'-comment header lines may carry source/rate/gravity metadata. Rejects
// non-finite values and timing gaps larger than one sample.
TelemetryTrace load_trace_csv(std::istream& in, const std::string& name = "<stream>");
TelemetryTrace load_trace_file(const std::string& path);
std::string trace_to_csv(const TelemetryTrace& trace);
void write_trace_file(const std::string& path, const TelemetryTrace& trace);

// --- filtering ---------------------------------------------------------

// Zero-phase (forward-backward) Butterworth low-pass. DC gain 1; each pass
// contributes -3 dB at the cutoff, so the two-pass response is the squared
// magnitude of the single-pass design. Throws if cutoff >= Nyquist.
std::vector<double> butterworth_filtfilt(std::span<const double> x,
                                         double cutoff_hz, double fs_hz,
                                         int order = 4);

TelemetryTrace butterworth_lowpass(const TelemetryTrace& trace, double cutoff_hz,
                                   int order = 4);

// Analytic |H(f)| of the analog Butterworth prototype, used as the test
// oracle for attenuation checks. One pass; square it for filtfilt.
double butterworth_magnitude(double f_hz, double cutoff_hz, int order);

// --- velocity estimation ------------------------------------------------

struct VelocityEstimate {
    double impact_velocity_mps = 0.0;
    double impact_time_s = 0.0;
};

struct VelocityProfile {
    std::vector<double> velocity_mps;   // vertical, per sample
    VelocityEstimate impact;
};

// Derivative of the Z-position channel (central differences, light
// smoothing); impact velocity is the steepest descending chord so the value
// is not biased by the contact kink. Throws if position is absent.
VelocityProfile velocity_from_position(const TelemetryTrace& trace);

// IMU route: global acceleration peak, the two zero-crossings preceding it,
// trapezoidal integration between them. Throws "no impact peak" on traces
// without a clear impact and when fewer than two crossings precede the peak.
VelocityEstimate velocity_from_accel(const TelemetryTrace& trace);

struct PairDiscrepancy {
    double mocap_mps = 0.0;
    double imu_mps = 0.0;
    double discrepancy_pct = 0.0;   // |v_mocap - v_imu| / mean * 100
    double lag_s = 0.0;             // impact-time offset used to synchronize
};

struct DiscrepancyStats {
    double mean_pct = 0.0;
    double std_pct = 0.0;
    std::size_t count = 0;
};

// Velocities of a paired recording of the same attempt, synchronized at the
// impact instant (max descending gradient for MoCap, acceleration peak for
// the IMU).
PairDiscrepancy cross_validate_pair(const TelemetryTrace& mocap,
                                    const TelemetryTrace& imu);
DiscrepancyStats discrepancy_stats(std::span<const PairDiscrepancy> pairs);

// --- perch-cycle segmentation -------------------------------------------

enum class Phase { Approach, Impact, Perched, SpinUp, Release, Takeoff };

std::string phase_name(Phase p);

struct PhaseInterval {
    Phase phase;
    double start_s = 0.0;
    double end_s = 0.0;
};

struct CycleSegmentation {
    std::vector<PhaseInterval> phases;   // contiguous, ordered
    double impact_time_s = 0.0;
    double impact_velocity_mps = 0.0;
    double servo_cutoff_time_s = 0.0;
    double release_time_s = 0.0;
    double takeoff_end_velocity_mps = 0.0;
    bool complete = false;
    std::vector<std::string> notes;
};

struct SegmentParams {
    double servo_cutoff_delay_s = 0.5;   // system constant, anchored at impact
    double smooth_cutoff_hz = 7.0;
    double quiet_threshold_mps2 = 0.35;
    double quiet_hold_s = 0.2;
    double spinup_min_amp_mps2 = 0.4;
    double thrust_threshold_mps2 = 0.5;
    double peak_floor_mps2 = 3.0;
};

// Best effort on partial traces: missing phases are noted and `complete`
// stays false instead of failing.
CycleSegmentation segment_cycle(const TelemetryTrace& trace,
                                const SegmentParams& params = {});

// Onset of sustained high-frequency oscillation (flapping spin-up) after
// search_from_s: first sample whose high-pass residual clears the threshold.
std::optional<double> detect_spinup_onset(const TelemetryTrace& trace,
                                          double search_from_s,
                                          const SegmentParams& params = {});

nlohmann::json segmentation_to_json(const CycleSegmentation& seg);

// --- synthetic sensor noise ----------------------------------------------

// White noise plus the flapping harmonic, calibrated so that the paired
// corpus reproduces the published cross-validation statistics.
struct NoiseModel {
    bool enabled = false;
    double accel_white_sd = 0.25;    // m/s^2
    double flap_amp = 0.8;           // m/s^2, applied while motors run
    double flap_hz = 19.0;
    double position_sd_m = 0.0004;
    std::uint64_t seed = 0;

    static NoiseModel from_calibration(const CalibrationSet& c, std::uint64_t seed);
};

std::vector<std::string> noise_required_params();

} // namespace perchsim::telem
