#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mdla {

// Philox4x32-10 (Salmon et al.). Key = seed, upper counter words = stream id,
// lower counter words = block index. Streams with different ids never overlap.
class Philox {
public:
    using result_type = std::uint64_t;

    Philox(std::uint64_t seed = 0, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (idx_ >= 2) {
            refill();
            idx_ = 0;
        }
        std::uint64_t lo = buf_[2 * idx_];
        std::uint64_t hi = buf_[2 * idx_ + 1];
        ++idx_;
        return (hi << 32) | lo;
    }

    // uniform in (0,1), never 0 or 1
    double uniform() { return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    double exponential() { return -std::log(uniform()); }

    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection
        std::uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto l = static_cast<std::uint64_t>(m);
        if (l < n) {
            std::uint64_t t = (0 - n) % n;
            while (l < t) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * n;
                l = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // uniform index in [0, n) from 63 bits of one draw; the spare bit is a fair coin
    std::uint64_t below_with_bit(std::uint64_t n, bool& bit) {
        constexpr std::uint64_t mask = (std::uint64_t(1) << 63) - 1;
        const std::uint64_t thr = (std::uint64_t(1) << 63) % n;
        for (;;) {
            std::uint64_t r = (*this)();
            __uint128_t m = static_cast<__uint128_t>(r >> 1) * n;
            if ((static_cast<std::uint64_t>(m) & mask) < thr) continue;
            bit = r & 1;
            return static_cast<std::uint64_t>(m >> 63);
        }
    }

    std::uint64_t seed() const { return (std::uint64_t(key_[1]) << 32) | key_[0]; }
    std::uint64_t stream() const { return stream_; }

    void discard_blocks(std::uint64_t n) { block_ += n; idx_ = 2; }

private:
    void refill() {
        std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(block_),
                                       static_cast<std::uint32_t>(block_ >> 32),
                                       static_cast<std::uint32_t>(stream_),
                                       static_cast<std::uint32_t>(stream_ >> 32)};
        std::array<std::uint32_t, 2> k = key_;
        for (int r = 0; r < 10; ++r) {
            std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
            std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        buf_ = c;
        ++block_;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int idx_ = 2;
};

// stream ids used across modules
namespace streams {
constexpr std::uint64_t main = 0;
constexpr std::uint64_t init = 1;
constexpr std::uint64_t history = 2;
constexpr std::uint64_t extension_base = std::uint64_t(1) << 32;
}  // namespace streams

// seed for replica r derived from a base seed (splitmix64 finalizer)
inline std::uint64_t replica_seed(std::uint64_t base, std::uint64_t r) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (r + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace mdla
