#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "sausagelab/geom.hpp"

namespace sausagelab {

// Identifies the RNG stream a result was produced from, for provenance.
struct SeedRecord {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::string to_string() const {
        return "seed=" + std::to_string(seed) + "/stream=" + std::to_string(stream);
    }
    bool operator==(const SeedRecord& o) const { return seed == o.seed && stream == o.stream; }
};

namespace detail {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Stateless: output block is a pure function of (counter, key), which is what
// makes per-sample streams reproducible under any worker schedule.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

}  // namespace detail

// One independent random stream, keyed by (seed, stream id). Streams with
// distinct ids never overlap; construction is O(1).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    SeedRecord record() const { return {(static_cast<std::uint64_t>(key_[1]) << 32) | key_[0], stream_}; }

    std::uint64_t next_u64() {
        if (avail_ == 0) refill();
        avail_ -= 2;
        const std::uint64_t lo = block_[avail_];
        const std::uint64_t hi = block_[avail_ + 1];
        return (hi << 32) | lo;
    }

    // Uniform on [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal via Box-Muller; pairs come from consecutive uniforms so
    // the draw sequence is schedule-independent.
    Vec2 normal_pair() {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double theta = 6.283185307179586476925286766559 * uniform();
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const Vec2 p = normal_pair();
        spare_ = p.y;
        have_spare_ = true;
        return p.x;
    }

private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        block_ = detail::philox4x32(ctr, key_);
        ++counter_;
        avail_ = 4;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int avail_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace sausagelab
