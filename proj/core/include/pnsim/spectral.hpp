#pragma once

#include "pnsim/noise.hpp"

#include <cstdint>
#include <vector>

namespace pnsim {

/// One-sided Welch PSD estimate of a real trace.
struct PowerSpectrum {
    std::vector<double> freqs;  ///< Hz, ascending, starting at 0
    std::vector<double> values; ///< rad^2/Hz for phase spectra
    double resolution_df = 0.0; ///< Hz
    std::size_t n_averages = 0; ///< Welch segments (times realizations, if averaged)
};

/// Spectrum of the rotating-frame drive amplitude (pi * Omega) e^{i phi(t)}.
///
/// freqs are signed offsets from the carrier; the carrier normalization
/// integrates the full spectrum to carrier_power() = (pi * carrier_rabi)^2,
/// the squared sigma+ coupling amplitude in angular units. With this
/// normalization the incoherent pumping rate under an off-resonant drive is
/// Gamma ~= 2 * rpsd_at(detuning) in the weak-noise limit.
struct RabiSpectrum {
    std::vector<double> freqs;  ///< Hz, signed offset from carrier, ascending
    std::vector<double> values; ///< Hz^2/Hz
    double carrier_rabi = 0.0;  ///< Omega, Hz
    double carrier_band = 0.0;  ///< half-width of the carrier peak region, Hz
    double resolution_df = 0.0;
    std::size_t n_averages = 0;

    double carrier_power() const;
};

/// Welch estimate with a periodic Hann window. The trace mean is removed
/// first, so Parseval reads sum(values) * df ~= trace variance; the window
/// normalization (division by mean(w^2)) makes that hold to a few percent
/// once enough segments are averaged.
PowerSpectrum estimate_psd(const PhaseTrace& trace, std::size_t segment_len,
                           double overlap_frac);

/// Element-wise mean of same-grid spectra (ensemble averaging).
PowerSpectrum average_spectra(const std::vector<PowerSpectrum>& spectra);
RabiSpectrum average_spectra(const std::vector<RabiSpectrum>& spectra);

/// Two-sided Welch PSD of e^{i phi(t)}, rescaled so the total power equals
/// carrier_power(). segment_len = 0 picks n_samples / 8 (min 64).
RabiSpectrum compute_rabi_psd(const PhaseTrace& trace, double rabi_hz,
                              double carrier_band, std::size_t segment_len = 0,
                              double overlap_frac = 0.5);

/// Piecewise-linear interpolation averaged over [f - band, f + band].
/// band < 0 uses the default +-2 df; band = 0 is pure interpolation.
double rpsd_at(const RabiSpectrum& spectrum, double f, double band = -1.0);

/// 10 log10(rpsd_at(f) / carrier_rabi^2); -inf for an exact zero.
double to_dbc_per_hz(const RabiSpectrum& spectrum, double f, double band = -1.0);

/// Value-level variant: 10 log10(value / carrier_rabi_hz^2).
double to_dbc_per_hz(double value, double carrier_rabi_hz);

/// sum(values) * df.
double integrated_power(const PowerSpectrum& s);
double integrated_power(const RabiSpectrum& s);

} // namespace pnsim
