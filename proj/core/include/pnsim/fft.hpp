#pragma once

#include <complex>
#include <vector>

namespace pnsim {

/// In-order complex DFT (FFTW backend, any length). sign = -1 forward, +1 inverse.
/// The inverse is unnormalized, like FFTW: ifft(fft(x)) = n * x.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& in, int sign);

std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& in);
/// Normalized inverse transform.
std::vector<std::complex<double>> fft_inverse(const std::vector<std::complex<double>>& in);

} // namespace pnsim
