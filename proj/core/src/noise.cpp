#include "pnsim/noise.hpp"

#include "pnsim/errors.hpp"
#include "pnsim/fft.hpp"
#include "pnsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pnsim {

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

void NoiseModelParams::validate() const {
    if (!(h0 >= 0.0) || !std::isfinite(h0))
        throw ParamError("noise.h0 must be finite and >= 0");
    if (!(leak >= 0.0 && leak < 1.0))
        throw ParamError("noise.leak must be in [0, 1)");
    if (!(sample_rate > 0.0))
        throw ParamError("noise.sample_rate must be > 0");
    if (n_samples < 2)
        throw ParamError("noise.n_samples must be >= 2");
    if (rms_target != 0.0 && !(rms_target > 0.0))
        throw ParamError("noise.rms_target must be > 0 when present");
}

void ServoShape::validate(double sample_rate) const {
    if (!enabled) return;
    if (!(unity_gain_freq > 0.0))
        throw ParamError("servo.unity_gain_freq must be > 0");
    if (sample_rate > 0.0 && unity_gain_freq >= 0.5 * sample_rate)
        throw ParamError("servo.unity_gain_freq must be below the Nyquist frequency");
    for (double p : poles)
        if (!(p > 0.0)) throw ParamError("servo.poles must all be > 0");
    for (double z : zeros)
        if (!(z > 0.0)) throw ParamError("servo.zeros must all be > 0");
    if (!(bump_quality >= 0.0))
        throw ParamError("servo.bump_quality must be >= 0");
}

ServoShape ServoShape::defaults(double unity_gain_freq) {
    ServoShape s;
    s.enabled = true;
    s.unity_gain_freq = unity_gain_freq;
    s.gain_db = 60.0;
    s.poles = {unity_gain_freq / 10.0};
    s.zeros = {unity_gain_freq / 3.0};
    s.bump_quality = 2.0;
    return s;
}

namespace {

// Open-loop response without the overall gain and the bump delay:
// integrator crossing at f_ug, times the extra pole/zero factors.
std::complex<double> loop_base(const ServoShape& s, double f) {
    const std::complex<double> jf(0.0, f);
    std::complex<double> num(1.0, 0.0);
    for (double z : s.zeros) num *= 1.0 + jf / z;
    std::complex<double> den = jf / s.unity_gain_freq;
    for (double p : s.poles) den *= 1.0 + jf / p;
    return num / den;
}

struct LoopCal {
    double gain;  // scales |L(f_ug)| to 1
    double delay; // s, sets the phase margin from bump_quality
};

LoopCal calibrate(const ServoShape& s) {
    const auto base_ug = loop_base(s, s.unity_gain_freq);
    LoopCal cal{1.0 / std::abs(base_ug), 0.0};
    if (s.bump_quality > 0.5) {
        // |H_err(f_ug)| = 1 / (2 sin(phi_m / 2)); a pure delay dials the
        // phase margin phi_m to produce a bump of height bump_quality.
        const double target_phase = -kPi + 2.0 * std::asin(1.0 / (2.0 * s.bump_quality));
        const double phase_ug = std::arg(base_ug);
        cal.delay = std::max(0.0, (phase_ug - target_phase) /
                                      (2.0 * kPi * s.unity_gain_freq));
    }
    return cal;
}

std::complex<double> error_response_impl(const ServoShape& s, const LoopCal& cal, double f) {
    const double dc_gain = std::pow(10.0, s.gain_db / 20.0);
    if (f == 0.0) {
        // L -> infinity at DC; the gain cap leaves L' = dc_gain.
        return 1.0 / (1.0 + dc_gain);
    }
    std::complex<double> loop = cal.gain * loop_base(s, f);
    loop *= std::exp(std::complex<double>(0.0, -2.0 * kPi * f * cal.delay));
    const std::complex<double> capped = loop / (1.0 + loop / dc_gain);
    return 1.0 / (1.0 + capped);
}

} // namespace

std::complex<double> ServoShape::error_response(double freq_hz) const {
    return error_response_impl(*this, calibrate(*this), freq_hz);
}

double PhaseTrace::mean() const {
    if (samples.empty()) return 0.0;
    return std::accumulate(samples.begin(), samples.end(), 0.0) /
           static_cast<double>(samples.size());
}

double PhaseTrace::variance() const {
    if (samples.size() < 2) return 0.0;
    const double m = mean();
    double acc = 0.0;
    for (double v : samples) acc += (v - m) * (v - m);
    return acc / static_cast<double>(samples.size());
}

PhaseTrace generate_base_trace(const NoiseModelParams& params, std::uint64_t seed) {
    params.validate();
    PhaseTrace trace;
    trace.dt = 1.0 / params.sample_rate;
    trace.seed = seed;
    trace.samples.assign(params.n_samples, 0.0);
    if (params.h0 == 0.0) return trace;

    // Increment variance giving one-sided phase PSD h0/f^2 below Nyquist:
    // sigma^2 = 2 pi^2 h0 / fs.
    const double sigma = kPi * std::sqrt(2.0 * params.h0 / params.sample_rate);
    const double keep = 1.0 - params.leak;
    GaussianStream gauss(seed);
    double phi = 0.0;
    for (std::size_t i = 0; i < params.n_samples; ++i) {
        phi = keep * phi + sigma * gauss.normal();
        trace.samples[i] = phi;
    }

    if (params.rms_target > 0.0) {
        const double rms = std::sqrt(trace.variance());
        if (rms > 0.0) {
            const double scale = params.rms_target / rms;
            const double m = trace.mean();
            for (auto& v : trace.samples) v = (v - m) * scale;
        }
    }
    return trace;
}

PhaseTrace apply_servo_shaping(const PhaseTrace& trace, const ServoShape& shape) {
    if (trace.samples.size() < 2 || !(trace.dt > 0.0))
        throw ParamError("trace must have dt > 0 and at least 2 samples");
    if (!shape.enabled) return trace;
    shape.validate(trace.sample_rate());

    const std::size_t n = trace.samples.size();
    const double df = trace.sample_rate() / static_cast<double>(n);
    const LoopCal cal = calibrate(shape);

    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = trace.samples[i];
    auto spec = fft_forward(buf);

    spec[0] *= error_response_impl(shape, cal, 0.0);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const auto h = error_response_impl(shape, cal, static_cast<double>(k) * df);
        spec[k] *= h;
        if (k != n - k) spec[n - k] *= std::conj(h); // keep the output real
    }

    auto shaped = fft_inverse(spec);
    PhaseTrace out;
    out.dt = trace.dt;
    out.seed = trace.seed;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = shaped[i].real();
    return out;
}

PhaseTrace synthesize(const NoiseModelParams& params, const ServoShape& shape,
                      std::uint64_t seed) {
    params.validate();
    if (shape.enabled) shape.validate(params.sample_rate);

    const std::size_t pad = (params.n_samples + 99) / 100; // 1% each side
    NoiseModelParams padded = params;
    padded.n_samples = params.n_samples + 2 * pad;

    PhaseTrace trace = generate_base_trace(padded, seed);
    if (shape.enabled) trace = apply_servo_shaping(trace, shape);

    PhaseTrace out;
    out.dt = trace.dt;
    out.seed = seed;
    out.samples.assign(trace.samples.begin() + static_cast<long>(pad),
                       trace.samples.begin() + static_cast<long>(pad + params.n_samples));
    return out;
}

} // namespace pnsim
