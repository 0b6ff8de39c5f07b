#include "perchsim/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "perchsim/units.hpp"
#include "perchsim/util.hpp"

namespace perchsim::telem {

std::string source_name(TraceSource s) {
    switch (s) {
        case TraceSource::Imu: return "imu";
        case TraceSource::MoCap: return "mocap";
        case TraceSource::Synthetic: return "synthetic";
    }
    return "synthetic";
}

std::vector<double> TelemetryTrace::accel_z() const {
    std::vector<double> out(accel.size());
    for (std::size_t i = 0; i < accel.size(); ++i) out[i] = accel[i][2];
    return out;
}

std::vector<double> TelemetryTrace::position_z() const {
    std::vector<double> out(position.size());
    for (std::size_t i = 0; i < position.size(); ++i) out[i] = position[i][2];
    return out;
}

// --- CSV ------------------------------------------------------------------

std::string trace_to_csv(const TelemetryTrace& trace) {
    std::ostringstream os;
    const bool position_file = !trace.has_accel();
    os << "# source: " << source_name(trace.source) << '\n';
    os << "# rate_hz: " << format_double(trace.sample_rate_hz) << '\n';
    if (!position_file) {
        os << "# gravity: " << (trace.gravity_excluded ? "excluded" : "included") << '\n';
    }
    os << (position_file ? "t,x,y,z" : "t,ax,ay,az") << '\n';
    const auto& rows = position_file ? trace.position : trace.accel;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << format_double(trace.time_at(i)) << ',' << format_double(rows[i][0]) << ','
           << format_double(rows[i][1]) << ',' << format_double(rows[i][2]) << '\n';
    }
    return os.str();
}

TelemetryTrace load_trace_csv(std::istream& in, const std::string& name) {
    TelemetryTrace trace;
    bool is_position = false;
    bool saw_header = false;
    double declared_rate = 0.0;
    std::vector<double> times;
    std::vector<std::array<double, 3>> rows;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const auto body = trim(text.substr(1));
            const auto colon = body.find(':');
            if (colon != std::string_view::npos) {
                const auto key = to_lower(trim(body.substr(0, colon)));
                const auto value = to_lower(trim(body.substr(colon + 1)));
                if (key == "source") {
                    if (value == "imu") trace.source = TraceSource::Imu;
                    else if (value == "mocap") trace.source = TraceSource::MoCap;
                    else trace.source = TraceSource::Synthetic;
                } else if (key == "rate_hz") {
                    declared_rate = parse_double(value).value_or(0.0);
                } else if (key == "gravity") {
                    trace.gravity_excluded = (value != "included");
                }
            }
            continue;
        }
        if (!saw_header) {
            const auto cols = to_lower(text);
            if (cols == "t,ax,ay,az") {
                is_position = false;
                saw_header = true;
                continue;
            }
            if (cols == "t,x,y,z") {
                is_position = true;
                saw_header = true;
                continue;
            }
            throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                     ": unrecognized header '" + std::string(text) + "'");
        }
        const auto fields = split(text, ',');
        if (fields.size() != 4) {
            throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                     ": expected 4 columns");
        }
        std::array<double, 4> vals{};
        for (std::size_t i = 0; i < 4; ++i) {
            const auto v = parse_double(fields[i]);
            if (!v || !std::isfinite(*v)) {
                throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                         ": malformed value '" + std::string(fields[i]) + "'");
            }
            vals[i] = *v;
        }
        times.push_back(vals[0]);
        rows.push_back({vals[1], vals[2], vals[3]});
    }
    if (!saw_header || rows.empty()) {
        throw std::runtime_error(name + ": no samples");
    }

    const double dt = times.size() > 1 ? times[1] - times[0]
                                       : (declared_rate > 0 ? 1.0 / declared_rate : 0.004);
    if (!(dt > 0.0)) throw std::runtime_error(name + ": non-increasing timestamps");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double delta = times[i] - times[i - 1];
        if (std::fabs(delta - dt) > 0.5 * dt) {
            throw std::runtime_error(name + ": sampling gap at row " + std::to_string(i) +
                                     " (dt " + format_double(delta) + " vs " +
                                     format_double(dt) + ")");
        }
    }
    trace.sample_rate_hz = declared_rate > 0 ? declared_rate : 1.0 / dt;
    trace.t0_s = times.front();
    if (is_position) {
        trace.position = std::move(rows);
        if (trace.source == TraceSource::Imu) trace.source = TraceSource::MoCap;
        if (trace.source == TraceSource::Synthetic) trace.source = TraceSource::MoCap;
    } else {
        trace.accel = std::move(rows);
        if (trace.source == TraceSource::MoCap) trace.source = TraceSource::Imu;
        if (trace.source == TraceSource::Synthetic) trace.source = TraceSource::Imu;
    }
    return trace;
}

TelemetryTrace load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_trace_csv(in, path);
}

void write_trace_file(const std::string& path, const TelemetryTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << trace_to_csv(trace);
}

// --- Butterworth ------------------------------------------------------------

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;
};

// RBJ low-pass biquads for the Butterworth pole pairs; exact DC gain 1.
std::vector<Biquad> design_lowpass(double cutoff_hz, double fs_hz, int order) {
    std::vector<Biquad> sections;
    const double w0 = 2.0 * kPi * cutoff_hz / fs_hz;
    const double cw = std::cos(w0);
    const double sw = std::sin(w0);
    for (int k = 0; k < order / 2; ++k) {
        const double q = 1.0 / (2.0 * std::cos(kPi * (2.0 * k + 1.0) / (2.0 * order)));
        const double alpha = sw / (2.0 * q);
        const double a0 = 1.0 + alpha;
        sections.push_back({(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0,
                            -2.0 * cw / a0, (1.0 - alpha) / a0});
    }
    if (order % 2 == 1) {
        const double K = std::tan(w0 / 2.0);
        const double a0 = K + 1.0;
        sections.push_back({K / a0, K / a0, 0.0, (K - 1.0) / a0, 0.0});
    }
    return sections;
}

// Single pass through one section (transposed direct form II) with the state
// primed for steady state at x[0], so constants pass through untouched.
void filter_inplace(std::vector<double>& x, const Biquad& s) {
    const double h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z1 = (h1 - s.b0) * x[0];
    double z2 = (z1 - s.b1 * x[0] + s.a1 * h1 * x[0]);
    for (double& v : x) {
        const double in = v;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
    }
}

} // namespace

std::vector<double> butterworth_filtfilt(std::span<const double> x, double cutoff_hz,
                                         double fs_hz, int order) {
    if (!(cutoff_hz > 0.0) || cutoff_hz >= fs_hz / 2.0) {
        throw std::domain_error("butterworth: cutoff " + format_double(cutoff_hz) +
                                " Hz must lie in (0, Nyquist) for fs " +
                                format_double(fs_hz) + " Hz");
    }
    if (order < 1 || order > 12) throw std::domain_error("butterworth: order out of range");
    if (x.empty()) return {};
    const std::size_t n = x.size();
    if (n < 2) return std::vector<double>(x.begin(), x.end());

    const std::size_t pad = std::min(n - 1, static_cast<std::size_t>(6 * order));
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    const auto sections = design_lowpass(cutoff_hz, fs_hz, order);
    for (const auto& s : sections) filter_inplace(ext, s);
    std::reverse(ext.begin(), ext.end());
    for (const auto& s : sections) filter_inplace(ext, s);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

TelemetryTrace butterworth_lowpass(const TelemetryTrace& trace, double cutoff_hz,
                                   int order) {
    TelemetryTrace out = trace;
    for (int axis = 0; axis < 3; ++axis) {
        if (trace.has_accel()) {
            std::vector<double> ch(trace.accel.size());
            for (std::size_t i = 0; i < ch.size(); ++i) ch[i] = trace.accel[i][axis];
            const auto f = butterworth_filtfilt(ch, cutoff_hz, trace.sample_rate_hz, order);
            for (std::size_t i = 0; i < ch.size(); ++i) out.accel[i][axis] = f[i];
        }
        if (trace.has_position()) {
            std::vector<double> ch(trace.position.size());
            for (std::size_t i = 0; i < ch.size(); ++i) ch[i] = trace.position[i][axis];
            const auto f = butterworth_filtfilt(ch, cutoff_hz, trace.sample_rate_hz, order);
            for (std::size_t i = 0; i < ch.size(); ++i) out.position[i][axis] = f[i];
        }
    }
    return out;
}

double butterworth_magnitude(double f_hz, double cutoff_hz, int order) {
    return 1.0 / std::sqrt(1.0 + std::pow(f_hz / cutoff_hz, 2.0 * order));
}

// --- velocity estimation ----------------------------------------------------

namespace {

std::vector<double> kinematic_accel_z(const TelemetryTrace& trace) {
    std::vector<double> az = trace.accel_z();
    if (!trace.gravity_excluded) {
        for (double& v : az) v -= kGravity;
    }
    return az;
}

std::vector<double> moving_average3(std::span<const double> x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = i > 0 ? i - 1 : 0;
        const std::size_t hi = i + 1 < x.size() ? i + 1 : x.size() - 1;
        out[i] = (x[lo] + x[i] + x[hi]) / 3.0;
    }
    return out;
}

// Trapezoidal integral of a sampled signal between two (fractional) sample
// positions.
double integrate_between(std::span<const double> f, double dt, double a_idx,
                         double b_idx) {
    if (b_idx <= a_idx) return 0.0;
    auto value_at = [&](double idx) {
        const auto i0 = static_cast<std::size_t>(idx);
        const double frac = idx - static_cast<double>(i0);
        if (i0 + 1 >= f.size()) return f[f.size() - 1];
        return f[i0] * (1.0 - frac) + f[i0 + 1] * frac;
    };
    const auto first_full = static_cast<std::size_t>(std::ceil(a_idx));
    const auto last_full = static_cast<std::size_t>(std::floor(b_idx));
    double integral = 0.0;
    if (first_full > last_full) {
        return 0.5 * (value_at(a_idx) + value_at(b_idx)) * (b_idx - a_idx) * dt;
    }
    integral += 0.5 * (value_at(a_idx) + f[first_full]) *
                (static_cast<double>(first_full) - a_idx) * dt;
    for (std::size_t i = first_full; i + 1 <= last_full; ++i) {
        integral += 0.5 * (f[i] + f[i + 1]) * dt;
    }
    integral += 0.5 * (f[last_full] + value_at(b_idx)) *
                (b_idx - static_cast<double>(last_full)) * dt;
    return integral;
}

} // namespace

namespace {

// Marker-noise scale from the median absolute second difference; smooth
// trajectories leave it near zero, mocap jitter does not.
double position_noise_scale(std::span<const double> z) {
    if (z.size() < 8) return 0.0;
    std::vector<double> dd(z.size() - 2);
    for (std::size_t i = 1; i + 1 < z.size(); ++i) {
        dd[i - 1] = std::fabs(z[i + 1] - 2.0 * z[i] + z[i - 1]);
    }
    std::nth_element(dd.begin(), dd.begin() + dd.size() / 2, dd.end());
    return dd[dd.size() / 2] / (0.6745 * std::sqrt(6.0));
}

} // namespace

VelocityProfile velocity_from_position(const TelemetryTrace& trace) {
    if (!trace.has_position()) {
        throw std::invalid_argument("velocity_from_position: trace has no position channel");
    }
    auto z = trace.position_z();
    const double dt = trace.dt();
    const std::size_t n = z.size();
    VelocityProfile out;
    out.velocity_mps.assign(n, 0.0);
    if (n < 2) return out;

    // Noisy recordings get a zero-phase 25 Hz low-pass before
    // differentiation; clean synthetic trajectories keep their sharp
    // contact kink.
    if (position_noise_scale(z) > 1e-5 && trace.sample_rate_hz > 60.0) {
        z = butterworth_filtfilt(z, 25.0, trace.sample_rate_hz, 4);
    }

    std::vector<double> central(n, 0.0);
    central[0] = (z[1] - z[0]) / dt;
    central[n - 1] = (z[n - 1] - z[n - 2]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        central[i] = (z[i + 1] - z[i - 1]) / (2.0 * dt);
    }
    out.velocity_mps = moving_average3(central);

    // Impact speed from the steepest descending chord: single-interval slopes
    // are exact mid-interval derivatives of the parabolic fall and are not
    // diluted by the contact kink the way a wide central window is.
    double best = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double down = (z[i] - z[i + 1]) / dt;
        if (down > best) {
            best = down;
            best_i = i;
        }
    }
    out.impact.impact_velocity_mps = best;
    out.impact.impact_time_s = trace.time_at(best_i) + 0.5 * dt;
    return out;
}

VelocityEstimate velocity_from_accel(const TelemetryTrace& trace) {
    if (!trace.has_accel()) {
        throw std::invalid_argument("velocity_from_accel: trace has no accel channel");
    }
    const auto az = kinematic_accel_z(trace);
    const double dt = trace.dt();
    const std::size_t n = az.size();
    if (n < 8) throw std::runtime_error("velocity_from_accel: trace too short");

    const auto smooth = moving_average3(az);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (smooth[i] > smooth[peak]) peak = i;
    }
    if (smooth[peak] < 3.0) {
        throw std::runtime_error("velocity_from_accel: no impact peak");
    }

    // Crossing position between samples i and i+1, refined on the raw signal
    // when it also changes sign in the neighbourhood (the smoothed copy only
    // locates the crossing; the raw one bounds the integral).
    auto crossing_at = [&](std::ptrdiff_t i, bool upward) {
        auto interp = [&](std::span<const double> f, std::ptrdiff_t j) {
            const double f0 = f[static_cast<std::size_t>(j)];
            const double f1 = f[static_cast<std::size_t>(j) + 1];
            if (f1 == f0) return static_cast<double>(j);
            return static_cast<double>(j) + (0.0 - f0) / (f1 - f0);
        };
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - 2);
        const std::ptrdiff_t hi =
            std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 2, i + 2);
        for (std::ptrdiff_t j = hi; j >= lo; --j) {
            const double r0 = az[static_cast<std::size_t>(j)];
            const double r1 = az[static_cast<std::size_t>(j) + 1];
            if (upward ? (r0 <= 0.0 && r1 > 0.0) : (r0 >= 0.0 && r1 < 0.0)) {
                return interp(az, j);
            }
        }
        return interp(smooth, i);
    };

    // Walk back from the peak: contact-onset crossing first, then the
    // crossing that ends the powered phase before the free fall.
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(peak);
    while (i > 0 && smooth[static_cast<std::size_t>(i)] > 0.0) --i;
    if (i <= 0) throw std::runtime_error("velocity_from_accel: fewer than two zero-crossings precede the peak");
    const double zc2 = crossing_at(i, true);

    while (i > 0 && smooth[static_cast<std::size_t>(i)] < 0.0) --i;
    if (smooth[static_cast<std::size_t>(i)] < 0.0) {
        throw std::runtime_error("velocity_from_accel: fewer than two zero-crossings precede the peak");
    }
    const double zc1 = crossing_at(i, false);

    const double dv = integrate_between(az, dt, zc1, zc2);
    VelocityEstimate est;
    est.impact_velocity_mps = std::fabs(dv);
    est.impact_time_s = trace.t0_s + zc2 * dt;
    return est;
}

PairDiscrepancy cross_validate_pair(const TelemetryTrace& mocap,
                                    const TelemetryTrace& imu) {
    PairDiscrepancy out;
    try {
        const auto vp = velocity_from_position(mocap);
        const auto va = velocity_from_accel(imu);
        out.mocap_mps = vp.impact.impact_velocity_mps;
        out.imu_mps = va.impact_velocity_mps;
        out.lag_s = va.impact_time_s - vp.impact.impact_time_s;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("cross_validate: unsynchronizable pair: ") +
                                 e.what());
    }
    const double mean_v = 0.5 * (out.mocap_mps + out.imu_mps);
    if (!(mean_v > 0.0)) {
        throw std::runtime_error("cross_validate: unsynchronizable pair: zero velocity");
    }
    out.discrepancy_pct = std::fabs(out.mocap_mps - out.imu_mps) / mean_v * 100.0;
    return out;
}

DiscrepancyStats discrepancy_stats(std::span<const PairDiscrepancy> pairs) {
    DiscrepancyStats s;
    s.count = pairs.size();
    if (pairs.empty()) return s;
    for (const auto& p : pairs) s.mean_pct += p.discrepancy_pct;
    s.mean_pct /= static_cast<double>(pairs.size());
    if (pairs.size() > 1) {
        double ss = 0.0;
        for (const auto& p : pairs) {
            const double d = p.discrepancy_pct - s.mean_pct;
            ss += d * d;
        }
        s.std_pct = std::sqrt(ss / static_cast<double>(pairs.size() - 1));
    }
    return s;
}

// --- segmentation -----------------------------------------------------------

std::string phase_name(Phase p) {
    switch (p) {
        case Phase::Approach: return "approach";
        case Phase::Impact: return "impact";
        case Phase::Perched: return "perched";
        case Phase::SpinUp: return "spinup";
        case Phase::Release: return "release";
        case Phase::Takeoff: return "takeoff";
    }
    return "?";
}

std::optional<double> detect_spinup_onset(const TelemetryTrace& trace,
                                          double search_from_s,
                                          const SegmentParams& params) {
    if (!trace.has_accel()) return std::nullopt;
    const auto az = kinematic_accel_z(trace);
    const auto smooth = butterworth_filtfilt(az, params.smooth_cutoff_hz,
                                             trace.sample_rate_hz, 4);
    const std::size_t n = az.size();
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = std::fabs(az[i] - smooth[i]);

    std::size_t start = 0;
    while (start < n && trace.time_at(start) < search_from_s) ++start;
    if (start >= n) return std::nullopt;

    double peak_res = 0.0;
    for (std::size_t i = start; i < n; ++i) peak_res = std::max(peak_res, residual[i]);
    const double th = std::max(params.spinup_min_amp_mps2, 0.25 * peak_res);

    for (std::size_t i = start; i + 5 <= n; ++i) {
        int hits = 0;
        for (std::size_t j = i; j < i + 5; ++j) {
            if (residual[j] > th) ++hits;
        }
        if (residual[i] > th && hits >= 3) {
            // Back off toward the true rise, but never past the zero-phase
            // filter's pre-ring (two samples at most).
            std::size_t onset = i;
            while (onset > start && onset + 2 > i && residual[onset - 1] > 0.25 * th) {
                --onset;
            }
            return trace.time_at(onset);
        }
    }
    return std::nullopt;
}

CycleSegmentation segment_cycle(const TelemetryTrace& trace, const SegmentParams& params) {
    CycleSegmentation seg;
    if (!trace.has_accel() || trace.size() < 16) {
        seg.notes.push_back("trace too short for segmentation");
        return seg;
    }
    const auto az = kinematic_accel_z(trace);
    const double dt = trace.dt();
    const std::size_t n = az.size();
    const auto smooth = butterworth_filtfilt(az, params.smooth_cutoff_hz,
                                             trace.sample_rate_hz, 4);

    std::size_t peak = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (smooth[i] > smooth[peak]) peak = i;
    }
    if (smooth[peak] < params.peak_floor_mps2) {
        // Quiescent recording: a single perched interval, flagged partial.
        seg.phases.push_back({Phase::Perched, trace.time_at(0), trace.time_at(n - 1)});
        seg.notes.push_back("no impact detected; quiescent trace");
        return seg;
    }

    try {
        const auto est = velocity_from_accel(trace);
        seg.impact_velocity_mps = est.impact_velocity_mps;
        seg.impact_time_s = est.impact_time_s;
    } catch (const std::exception& e) {
        seg.impact_time_s = trace.time_at(peak);
        seg.notes.push_back(std::string("impact velocity unavailable: ") + e.what());
    }
    // The 500 ms power cut is a system constant; the trace anchors it at the
    // detected contact instant.
    seg.servo_cutoff_time_s = seg.impact_time_s + params.servo_cutoff_delay_s;

    // Settle into the perched state: |filtered accel| quiet for a hold window.
    const auto hold = static_cast<std::size_t>(params.quiet_hold_s / dt);
    std::size_t perched_start = n - 1;
    for (std::size_t i = peak; i + hold < n; ++i) {
        bool quiet = true;
        for (std::size_t j = i; j < i + hold; ++j) {
            if (std::fabs(smooth[j]) > params.quiet_threshold_mps2) {
                quiet = false;
                break;
            }
        }
        if (quiet) {
            perched_start = i;
            break;
        }
    }
    if (perched_start >= n - 1) {
        seg.phases.push_back({Phase::Approach, trace.time_at(0), seg.impact_time_s});
        seg.phases.push_back({Phase::Impact, seg.impact_time_s, trace.time_at(n - 1)});
        seg.notes.push_back("no perched interval detected");
        return seg;
    }
    const double t_perched = trace.time_at(perched_start);

    const auto spinup = detect_spinup_onset(trace, t_perched + 0.3, params);
    if (!spinup) {
        seg.phases.push_back({Phase::Approach, trace.time_at(0), seg.impact_time_s});
        seg.phases.push_back({Phase::Impact, seg.impact_time_s, t_perched});
        seg.phases.push_back({Phase::Perched, t_perched, trace.time_at(n - 1)});
        seg.notes.push_back("no spin-up detected");
        return seg;
    }

    // Thrust onset after spin-up, from the smoothed signal; the release
    // boundary backtracks to where thrust departs from zero.
    auto spin_idx = static_cast<std::size_t>((*spinup - trace.t0_s) / dt);
    std::size_t thrust_idx = 0;
    for (std::size_t i = spin_idx; i < n; ++i) {
        if (smooth[i] > params.thrust_threshold_mps2) {
            thrust_idx = i;
            break;
        }
    }
    if (thrust_idx == 0) {
        seg.phases.push_back({Phase::Approach, trace.time_at(0), seg.impact_time_s});
        seg.phases.push_back({Phase::Impact, seg.impact_time_s, t_perched});
        seg.phases.push_back({Phase::Perched, t_perched, *spinup});
        seg.phases.push_back({Phase::SpinUp, *spinup, trace.time_at(n - 1)});
        seg.notes.push_back("no take-off thrust detected");
        return seg;
    }
    std::size_t release_idx = thrust_idx;
    while (release_idx > spin_idx && smooth[release_idx - 1] > 0.05) --release_idx;
    const double t_release = trace.time_at(release_idx);

    // End of the thrust ramp: first quiet sample after the thrust apex.
    std::size_t apex = thrust_idx;
    for (std::size_t i = thrust_idx; i < n && smooth[i] > params.thrust_threshold_mps2 / 2.0; ++i) {
        if (smooth[i] > smooth[apex]) apex = i;
    }
    std::size_t end_idx = n - 1;
    for (std::size_t i = apex; i < n; ++i) {
        if (smooth[i] < 0.1) {
            end_idx = i;
            break;
        }
    }

    // Take-off end velocity: vector integral of the raw X/Z acceleration from
    // release to the end of the ramp (the spin-up ripple averages out).
    double vx = 0.0;
    double vz = 0.0;
    for (std::size_t i = release_idx; i < end_idx; ++i) {
        vx += 0.5 * (trace.accel[i][0] + trace.accel[i + 1][0]) * dt;
        vz += 0.5 * (az[i] + az[i + 1]) * dt;
    }
    seg.takeoff_end_velocity_mps = std::hypot(vx, vz);
    seg.release_time_s = t_release;

    seg.phases.push_back({Phase::Approach, trace.time_at(0), seg.impact_time_s});
    seg.phases.push_back({Phase::Impact, seg.impact_time_s, t_perched});
    seg.phases.push_back({Phase::Perched, t_perched, *spinup});
    seg.phases.push_back({Phase::SpinUp, *spinup, t_release});
    seg.phases.push_back({Phase::Release, t_release, trace.time_at(thrust_idx)});
    seg.phases.push_back({Phase::Takeoff, trace.time_at(thrust_idx), trace.time_at(n - 1)});
    seg.complete = true;
    return seg;
}

nlohmann::json segmentation_to_json(const CycleSegmentation& seg) {
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& p : seg.phases) {
        phases.push_back({{"phase", phase_name(p.phase)},
                          {"start_s", p.start_s},
                          {"end_s", p.end_s}});
    }
    return {
        {"phases", phases},
        {"impact_time_s", seg.impact_time_s},
        {"impact_velocity_mps", seg.impact_velocity_mps},
        {"servo_cutoff_time_s", seg.servo_cutoff_time_s},
        {"release_time_s", seg.release_time_s},
        {"takeoff_end_velocity_mps", seg.takeoff_end_velocity_mps},
        {"complete", seg.complete},
        {"notes", seg.notes},
    };
}

NoiseModel NoiseModel::from_calibration(const CalibrationSet& c, std::uint64_t seed) {
    NoiseModel nm;
    nm.enabled = true;
    nm.accel_white_sd = c.value("telem.noise.accel_white_sd");
    nm.flap_amp = c.value("telem.noise.flap_amp");
    nm.flap_hz = c.value("telem.noise.flap_hz");
    nm.position_sd_m = c.value("telem.noise.pos_sd_m");
    nm.seed = seed;
    return nm;
}

std::vector<std::string> noise_required_params() {
    return {"telem.noise.accel_white_sd", "telem.noise.flap_amp", "telem.noise.flap_hz",
            "telem.noise.pos_sd_m"};
}

} // namespace perchsim::telem
