#include "pnsim/errors.hpp"
#include "pnsim/fits.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace pnsim;

TEST_SUITE_BEGIN("fits");

TEST_CASE("exponential saturation roundtrip recovers gamma within 0.1%") {
    const double gamma = 1000.0;
    std::vector<double> t, y;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(i * 5e-5);
        y.push_back(0.5 * (1.0 - std::exp(-gamma * t.back())));
    }
    const auto fit = fit_exponential_saturation(t, y);
    CHECK(fit.gamma == doctest::Approx(gamma).epsilon(1e-3));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("saturation fit works across magnitudes of gamma") {
    for (double gamma : {5.0, 300.0, 2e4}) {
        std::vector<double> t, y;
        for (int i = 0; i <= 60; ++i) {
            t.push_back(i * (3.0 / gamma) / 60.0);
            y.push_back(0.5 * (1.0 - std::exp(-gamma * t.back())));
        }
        const auto fit = fit_exponential_saturation(t, y);
        CHECK(fit.gamma == doctest::Approx(gamma).epsilon(1e-3));
    }
}

TEST_CASE("flat zero series fits gamma ~ 0") {
    std::vector<double> t, y;
    for (int i = 0; i <= 20; ++i) {
        t.push_back(i * 1e-4);
        y.push_back(0.0);
    }
    const auto fit = fit_exponential_saturation(t, y);
    CHECK(fit.gamma == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("linear through origin: y = 3x exactly") {
    const std::vector<double> x{1.0, 2.0, 5.0};
    const std::vector<double> y{3.0, 6.0, 15.0};
    const auto fit = fit_linear_through_origin(x, y);
    CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.slope_stderr == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("linear through origin: all-zero y succeeds with slope 0") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> y{0.0, 0.0, 0.0};
    const auto fit = fit_linear_through_origin(x, y);
    CHECK(fit.slope == 0.0);
}

TEST_CASE("fit input validation") {
    CHECK_THROWS_AS(fit_linear_through_origin({1.0, 2.0}, {1.0, 2.0}), FitError);
    CHECK_THROWS_AS(fit_linear_through_origin({1.0, 2.0, 3.0}, {1.0, 2.0}), FitError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_linear_through_origin({1.0, 2.0, nan}, {1.0, 2.0, 3.0}),
                    FitError);
    CHECK_THROWS_AS(fit_exponential_saturation({1.0, 2.0}, {0.1, 0.2}), FitError);
    CHECK_THROWS_AS(fit_exponential_saturation({0.0, 0.0, 0.0}, {0.1, 0.2, 0.3}),
                    FitError);
}

TEST_SUITE_END();
