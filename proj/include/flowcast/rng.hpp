#pragma once

#include <cmath>
#include <cstdint>

namespace flowcast {

/// Deterministic 64-bit generator used everywhere randomness is needed, so
/// that identical seeds reproduce identical simulations, fits and reports
/// across platforms and across reimplementations of the same algorithm.
///
/// Algorithm, fully specified:
///   1. The user seed is mixed once through splitmix64:
///        z = seed + 0x9E3779B97F4A7C15
///        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///        state = z ^ (z >> 31)
///      (a zero state is replaced by 0x9E3779B97F4A7C15, since xorshift
///      has an all-zero fixed point).
///   2. Each draw advances xorshift64* (Marsaglia):
///        state ^= state >> 12
///        state ^= state << 25
///        state ^= state >> 27
///        output = state * 0x2545F4914F6CDD1D
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        state_ = z ^ (z >> 31);
        if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
    }

    std::uint64_t next_u64() noexcept {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1DULL;
    }

    /// Uniform draw in (0, 1]: the top 53 bits of the output, plus one,
    /// scaled by 2^-53. Never returns 0, so log(next_unit()) is finite.
    double next_unit() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform draw on [lo, hi).
    double next_uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * (next_unit() - 0x1.0p-53);
    }

    /// Standard normal via the trigonometric Box-Muller transform:
    ///   r  = sqrt(-2 ln u1),  a = 2*pi*u2
    ///   z0 = r cos(a),        z1 = r sin(a)
    /// u1, u2 are consecutive next_unit() draws; z1 is cached and returned
    /// by the following call, so draws come in deterministic pairs.
    double next_gaussian() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Exponential(1) draw; used for Dirichlet-style fraction sampling.
    double next_exponential() noexcept { return -std::log(next_unit()); }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace flowcast
