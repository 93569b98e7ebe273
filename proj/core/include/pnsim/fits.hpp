#pragma once

#include <vector>

namespace pnsim {

/// Result of fitting P_e(t) = 0.5 [1 - exp(-Gamma t)].
struct PumpingFit {
    double gamma = 0.0;        ///< 1/s
    double gamma_stderr = 0.0; ///< 1/s
    double r_squared = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
};

/// Damped Gauss-Newton fit of the saturation model (single parameter Gamma).
PumpingFit fit_exponential_saturation(const std::vector<double>& times,
                                      const std::vector<double>& values);

/// Closed-form least squares through the origin: slope = sum(xy) / sum(x^2).
LinearFit fit_linear_through_origin(const std::vector<double>& x,
                                    const std::vector<double>& y);

} // namespace pnsim
