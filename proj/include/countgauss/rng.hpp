#ifndef COUNTGAUSS_RNG_HPP
#define COUNTGAUSS_RNG_HPP

#include <cstdint>
#include <string_view>

namespace cg {

// 64-bit mixing function used for deriving child seeds: the trial-t stream of a
// Monte-Carlo run with master seed s is SeededRng(mix64(s, t)). SplitMix64
// finalizer over a golden-ratio combination of the two inputs.
constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL + b * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic 64-bit generator: SplitMix64 stream with an inverse-CDF normal
// sampler (Acklam rational approximation + one Halley refinement). The same
// (seed, request sequence) produces the same outputs on every platform and
// under every thread count; the algorithm identifier is fixed per build.
class SeededRng {
public:
    static constexpr std::string_view kAlgorithm = "splitmix64/inverse-cdf-normal";

    explicit SeededRng(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in the open interval (0, 1), 53-bit resolution.
    double next_uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal draw via the inverse CDF.
    double next_normal() noexcept;

    // Uniform in [0, bound) by modulo reduction of one 64-bit draw; the bias is
    // negligible for bound << 2^64.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        return next_u64() % bound;
    }

    // Independent derived stream; advances this generator by one draw.
    SeededRng split() noexcept { return SeededRng(next_u64()); }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

// Inverse of the standard normal CDF, accurate to ~1e-15 over (0, 1).
double inverse_normal_cdf(double p);

} // namespace cg

#endif
