#include "pnsim/fits.hpp"

#include "pnsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pnsim {

namespace {

double saturation_sse(const std::vector<double>& t, const std::vector<double>& y,
                      double gamma) {
    double sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = y[i] - 0.5 * (1.0 - std::exp(-gamma * t[i]));
        sse += r * r;
    }
    return sse;
}

double r_squared_about_mean(const std::vector<double>& y, double sse) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    if (sst == 0.0) return sse == 0.0 ? 1.0 : 0.0;
    return 1.0 - sse / sst;
}

} // namespace

PumpingFit fit_exponential_saturation(const std::vector<double>& times,
                                      const std::vector<double>& values) {
    if (times.size() != values.size())
        throw FitError("times/values length mismatch");
    if (times.size() < 3) throw FitError("need at least 3 points");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
            throw FitError("non-finite fit input");

    const double t_max = *std::max_element(times.begin(), times.end());
    if (!(t_max > 0.0)) throw FitError("degenerate time axis");

    // Initial bracket: log-spaced Gamma between "no decay visible" and
    // "saturated on the first sample", pick the SSE minimum.
    double best_gamma = 0.0;
    double best_sse = saturation_sse(times, values, 0.0);
    for (int i = -20; i <= 40; ++i) {
        const double g = std::pow(10.0, static_cast<double>(i) / 8.0) / t_max;
        const double sse = saturation_sse(times, values, g);
        if (sse < best_sse) {
            best_sse = sse;
            best_gamma = g;
        }
    }

    // Damped Gauss-Newton refinement on the single parameter.
    double gamma = best_gamma;
    for (int iter = 0; iter < 100; ++iter) {
        double jtj = 0.0, jtr = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double e = std::exp(-gamma * times[i]);
            const double jac = 0.5 * times[i] * e; // d model / d gamma
            const double res = values[i] - 0.5 * (1.0 - e);
            jtj += jac * jac;
            jtr += jac * res;
        }
        if (jtj == 0.0) break;
        double step = jtr / jtj;
        double damping = 1.0;
        const double sse0 = saturation_sse(times, values, gamma);
        while (damping > 1e-6) {
            const double cand = std::max(0.0, gamma + damping * step);
            if (saturation_sse(times, values, cand) <= sse0) {
                gamma = cand;
                break;
            }
            damping *= 0.5;
        }
        if (std::abs(damping * step) < 1e-10 * (1.0 + gamma)) break;
    }

    PumpingFit fit;
    fit.gamma = gamma;
    const double sse = saturation_sse(times, values, gamma);
    fit.r_squared = r_squared_about_mean(values, sse);
    double jtj = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double jac = 0.5 * times[i] * std::exp(-gamma * times[i]);
        jtj += jac * jac;
    }
    const auto dof = static_cast<double>(times.size() > 1 ? times.size() - 1 : 1);
    fit.gamma_stderr = jtj > 0.0 ? std::sqrt(sse / dof / jtj)
                                 : std::numeric_limits<double>::infinity();
    return fit;
}

LinearFit fit_linear_through_origin(const std::vector<double>& x,
                                    const std::vector<double>& y) {
    if (x.size() != y.size()) throw FitError("x/y length mismatch");
    if (x.size() < 3) throw FitError("need at least 3 points");
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw FitError("non-finite fit input");
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinearFit fit;
    if (sxx == 0.0) {
        bool all_zero_y = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
        if (!all_zero_y) throw FitError("degenerate x axis");
        fit.r_squared = 1.0;
        return fit;
    }
    fit.slope = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.slope * x[i];
        sse += r * r;
    }
    fit.r_squared = r_squared_about_mean(y, sse);
    const auto dof = static_cast<double>(x.size() - 1);
    fit.slope_stderr = std::sqrt(sse / dof / sxx);
    return fit;
}

} // namespace pnsim
