#include "pnsim/spectral.hpp"

#include "pnsim/errors.hpp"
#include "pnsim/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace pnsim {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                     static_cast<double>(n)));
    return w;
}

std::size_t hop_length(std::size_t segment_len, double overlap_frac) {
    auto hop = static_cast<std::size_t>(
        std::lround(static_cast<double>(segment_len) * (1.0 - overlap_frac)));
    return std::max<std::size_t>(1, hop);
}

void check_welch_args(std::size_t trace_len, std::size_t segment_len, double overlap_frac) {
    if (segment_len < 8)
        throw ParamError("segment_len must be >= 8");
    if (segment_len > trace_len)
        throw ParamError("segment_len exceeds trace length");
    if (!(overlap_frac >= 0.0 && overlap_frac < 1.0))
        throw ParamError("overlap_frac must be in [0, 1)");
}

} // namespace

double RabiSpectrum::carrier_power() const {
    return kPi * kPi * carrier_rabi * carrier_rabi;
}

PowerSpectrum estimate_psd(const PhaseTrace& trace, std::size_t segment_len,
                           double overlap_frac) {
    check_welch_args(trace.samples.size(), segment_len, overlap_frac);

    const double fs = trace.sample_rate();
    const double mean = trace.mean();
    const auto w = hann_window(segment_len);
    double wpow = 0.0;
    for (double v : w) wpow += v * v;
    wpow /= static_cast<double>(segment_len);

    const std::size_t hop = hop_length(segment_len, overlap_frac);
    const std::size_t n_bins = segment_len / 2 + 1;
    std::vector<double> acc(n_bins, 0.0);
    std::size_t n_segments = 0;

    std::vector<std::complex<double>> buf(segment_len);
    for (std::size_t start = 0; start + segment_len <= trace.samples.size(); start += hop) {
        for (std::size_t i = 0; i < segment_len; ++i)
            buf[i] = (trace.samples[start + i] - mean) * w[i];
        auto spec = fft_forward(buf);
        for (std::size_t k = 0; k < n_bins; ++k) {
            double p = std::norm(spec[k]) /
                       (fs * static_cast<double>(segment_len) * wpow);
            // one-sided: double everything except DC and Nyquist
            if (k != 0 && !(segment_len % 2 == 0 && k == segment_len / 2)) p *= 2.0;
            acc[k] += p;
        }
        ++n_segments;
    }

    PowerSpectrum out;
    out.resolution_df = fs / static_cast<double>(segment_len);
    out.n_averages = n_segments;
    out.freqs.resize(n_bins);
    out.values.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        out.freqs[k] = static_cast<double>(k) * out.resolution_df;
        out.values[k] = acc[k] / static_cast<double>(n_segments);
    }
    return out;
}

namespace {

template <typename Spec>
Spec average_impl(const std::vector<Spec>& spectra) {
    if (spectra.empty()) throw ParamError("cannot average zero spectra");
    Spec out = spectra.front();
    for (std::size_t s = 1; s < spectra.size(); ++s) {
        if (spectra[s].values.size() != out.values.size())
            throw ContractError("spectra grids differ");
        for (std::size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += spectra[s].values[k];
        out.n_averages += spectra[s].n_averages;
    }
    const double inv = 1.0 / static_cast<double>(spectra.size());
    for (auto& v : out.values) v *= inv;
    return out;
}

} // namespace

PowerSpectrum average_spectra(const std::vector<PowerSpectrum>& spectra) {
    return average_impl(spectra);
}

RabiSpectrum average_spectra(const std::vector<RabiSpectrum>& spectra) {
    return average_impl(spectra);
}

RabiSpectrum compute_rabi_psd(const PhaseTrace& trace, double rabi_hz,
                              double carrier_band, std::size_t segment_len,
                              double overlap_frac) {
    if (!(rabi_hz > 0.0)) throw ParamError("rabi_hz must be > 0");
    if (segment_len == 0)
        segment_len = std::max<std::size_t>(64, trace.samples.size() / 8);
    check_welch_args(trace.samples.size(), segment_len, overlap_frac);

    const double fs = trace.sample_rate();
    const double df = fs / static_cast<double>(segment_len);
    if (!(carrier_band >= df))
        throw ParamError("carrier_band must be at least one resolution bin");

    const auto w = hann_window(segment_len);
    double wpow = 0.0;
    for (double v : w) wpow += v * v;
    wpow /= static_cast<double>(segment_len);

    const std::size_t hop = hop_length(segment_len, overlap_frac);
    std::vector<double> acc(segment_len, 0.0);
    std::size_t n_segments = 0;
    std::vector<std::complex<double>> buf(segment_len);
    for (std::size_t start = 0; start + segment_len <= trace.samples.size(); start += hop) {
        for (std::size_t i = 0; i < segment_len; ++i) {
            const double phi = trace.samples[start + i];
            buf[i] = std::polar(w[i], phi);
        }
        auto spec = fft_forward(buf);
        for (std::size_t k = 0; k < segment_len; ++k)
            acc[k] += std::norm(spec[k]) /
                      (fs * static_cast<double>(segment_len) * wpow);
        ++n_segments;
    }

    RabiSpectrum out;
    out.carrier_rabi = rabi_hz;
    out.carrier_band = carrier_band;
    out.resolution_df = df;
    out.n_averages = n_segments;
    out.freqs.resize(segment_len);
    out.values.resize(segment_len);
    // reorder to ascending signed frequency (negative offsets first)
    const std::size_t half = (segment_len + 1) / 2; // bins 0 .. half-1 are >= 0
    std::size_t idx = 0;
    for (std::size_t k = half; k < segment_len; ++k, ++idx) {
        out.freqs[idx] = (static_cast<double>(k) - static_cast<double>(segment_len)) * df;
        out.values[idx] = acc[k] / static_cast<double>(n_segments);
    }
    for (std::size_t k = 0; k < half; ++k, ++idx) {
        out.freqs[idx] = static_cast<double>(k) * df;
        out.values[idx] = acc[k] / static_cast<double>(n_segments);
    }

    // Rescale so the total power (1 for a unit-modulus field) maps to the
    // squared coupling amplitude (pi * Omega)^2.
    double total = 0.0;
    for (double v : out.values) total += v;
    total *= df;
    if (total > 0.0) {
        const double scale = out.carrier_power() / total;
        for (auto& v : out.values) v *= scale;
    }
    return out;
}

namespace {

double interp_value(const RabiSpectrum& s, double f) {
    const auto& fr = s.freqs;
    if (f < fr.front() || f > fr.back())
        throw ParamError("frequency outside spectral range");
    auto it = std::lower_bound(fr.begin(), fr.end(), f);
    if (it == fr.begin()) return s.values.front();
    const std::size_t hi = static_cast<std::size_t>(it - fr.begin());
    const std::size_t lo = hi - 1;
    if (fr[hi] == f) return s.values[hi];
    const double t = (f - fr[lo]) / (fr[hi] - fr[lo]);
    return (1.0 - t) * s.values[lo] + t * s.values[hi];
}

} // namespace

double rpsd_at(const RabiSpectrum& spectrum, double f, double band) {
    if (spectrum.freqs.empty()) throw ContractError("empty spectrum");
    if (band < 0.0) band = 2.0 * spectrum.resolution_df;
    if (band == 0.0) return interp_value(spectrum, f);

    const double lo = std::max(f - band, spectrum.freqs.front());
    const double hi = std::min(f + band, spectrum.freqs.back());
    if (!(hi > lo)) return interp_value(spectrum, f);
    // trapezoid average of the piecewise-linear interpolant
    const int n = 32;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / n;
        const double v = interp_value(spectrum, x);
        acc += (i == 0 || i == n) ? 0.5 * v : v;
    }
    return acc / n;
}

double to_dbc_per_hz(const RabiSpectrum& spectrum, double f, double band) {
    const double v = rpsd_at(spectrum, f, band);
    if (v < 0.0) throw ContractError("negative spectral value");
    if (v == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(v / (spectrum.carrier_rabi * spectrum.carrier_rabi));
}

double to_dbc_per_hz(double value, double carrier_rabi_hz) {
    if (value < 0.0) throw ContractError("negative spectral value");
    if (!(carrier_rabi_hz > 0.0)) throw ParamError("carrier_rabi_hz must be > 0");
    if (value == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(value / (carrier_rabi_hz * carrier_rabi_hz));
}

double integrated_power(const PowerSpectrum& s) {
    double acc = 0.0;
    for (double v : s.values) acc += v;
    return acc * s.resolution_df;
}

double integrated_power(const RabiSpectrum& s) {
    double acc = 0.0;
    for (double v : s.values) acc += v;
    return acc * s.resolution_df;
}

} // namespace pnsim
