#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace pnsim {

/// Parameters of the Gauss-Markov base noise process.
///
/// The generated phase random walk has one-sided PSD h0/f^2 between the
/// mean-reversion corner frequency (leak * sample_rate / 2pi) and about a
/// quarter of the Nyquist frequency. If rms_target > 0 the trace is rescaled
/// so its sample standard deviation equals rms_target, overriding the h0
/// amplitude (h0 must still be positive to define the spectral shape).
struct NoiseModelParams {
    double h0 = 0.0;          ///< white frequency noise level, Hz^2/Hz
    double leak = 1e-4;       ///< mean-reversion factor per sample, [0, 1)
    double sample_rate = 0.0; ///< Hz
    std::size_t n_samples = 0;
    double rms_target = 0.0;  ///< rad; <= 0 means "use h0 scaling"

    void validate() const;
};

/// Closed-loop servo (PLL) shaping of the base noise.
///
/// The open loop is an integrator crossing unity gain at unity_gain_freq,
/// trimmed by optional extra poles/zeros, with its DC gain capped at gain_db.
/// bump_quality sets the height of the error-function resonance at the unity
/// gain frequency: |H_err(f_ug)| ~= bump_quality for bump_quality > 1/2.
struct ServoShape {
    bool enabled = false;
    double unity_gain_freq = 0.0; ///< Hz
    double gain_db = 60.0;        ///< open-loop DC gain cap, dB
    std::vector<double> poles;    ///< open-loop pole frequencies, Hz
    std::vector<double> zeros;    ///< open-loop zero frequencies, Hz
    double bump_quality = 2.0;    ///< >= 0

    void validate(double sample_rate) const;

    /// Closed-loop error transfer function H_err(f) = 1 / (1 + L(f)), f >= 0.
    std::complex<double> error_response(double freq_hz) const;

    static ServoShape defaults(double unity_gain_freq);
};

/// One realization of the stochastic phase phi(t), sampled at 1/dt.
struct PhaseTrace {
    std::vector<double> samples; ///< rad
    double dt = 0.0;             ///< s
    std::uint64_t seed = 0;

    double sample_rate() const { return 1.0 / dt; }
    double duration() const { return static_cast<double>(samples.size()) * dt; }
    /// Mean-removed variance of the samples.
    double variance() const;
    double mean() const;
};

/// Accumulate Gaussian frequency increments with per-sample mean reversion.
/// Identical (params, seed) give bit-identical traces.
PhaseTrace generate_base_trace(const NoiseModelParams& params, std::uint64_t seed);

/// Multiply the trace spectrum by the closed-loop error response.
/// Frequency-domain filtering; the trace is treated as periodic, so callers
/// that care about the impulse-response transient should trim the edges
/// (synthesize() does).
PhaseTrace apply_servo_shaping(const PhaseTrace& trace, const ServoShape& shape);

/// generate_base_trace + apply_servo_shaping with 1% padding trimmed from
/// each end to discard circular-convolution wraparound.
PhaseTrace synthesize(const NoiseModelParams& params, const ServoShape& shape,
                      std::uint64_t seed);

} // namespace pnsim
