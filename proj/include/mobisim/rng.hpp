#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mobisim {

/// A named, seeded random stream.
///
/// The engine is std::mt19937_64 (output sequence fixed by the standard); the
/// conversions to doubles and integers are done here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
/// Same (seed, label, substream) gives the same draws on every platform.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label, std::uint64_t substream = 0);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [lo, hi] (inclusive). Rejection sampling, no modulo bias.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Well-known stream labels. Keeping them separate means changing traffic
/// randomness never perturbs mobility draws.
namespace streams {
inline constexpr std::string_view mobility = "mobility";
inline constexpr std::string_view traffic = "traffic";
inline constexpr std::string_view jitter = "jitter";
inline constexpr std::string_view placement = "placement";
}  // namespace streams

}  // namespace mobisim
