#pragma once

#include <cstdint>
#include <random>

namespace pnsim {

/// Deterministic Gaussian stream backed by std::mt19937_64.
///
/// The uniform-to-double conversion and the Box-Muller transform are spelled
/// out here instead of using std::normal_distribution, whose algorithm is
/// implementation-defined. Identical seeds give bit-identical streams on any
/// conforming platform.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace pnsim
