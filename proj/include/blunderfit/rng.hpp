#pragma once

#include <cstdint>

namespace blunderfit {

/// SplitMix64 (Steele, Lea & Flood 2014): state advances by the golden-ratio
/// increment, output is a 64-bit finalizer mix. Small, fast, and the stream
/// for a given seed is fully documented by these ~10 lines, so any run is
/// reproducible from (seed, draw index).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0, 1): (k + 1/2) / 2^53 over the top
    /// 53 bits, symmetric about 1/2 and never 0 or 1.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Integer in [0, bound) by rejection-free multiply-shift; bias is
    /// < bound / 2^64, negligible for the index ranges used here.
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    /// Substream seed for trial `index`: finalizer mix of seed XOR a
    /// golden-ratio multiple, so trials are independent and order-free.
    static std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

}  // namespace blunderfit
