#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace esle::rng {

// Philox 4x64-10 counter-based generator (Salmon et al. round constants,
// bit-compatible with numpy.random.Philox). Stateless: every 256-bit counter
// and 128-bit key pair maps to an independent block of four 64-bit words,
// which is what makes per-trajectory substreams trivial.
struct Philox4x64 {
    static constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ull;
    static constexpr std::uint64_t M1 = 0xCA5A826395121157ull;
    static constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t W1 = 0xBB67AE8584CAA73Bull;

    static inline void mulhilo(std::uint64_t a, std::uint64_t b,
                               std::uint64_t& hi, std::uint64_t& lo) {
        unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<std::uint64_t>(p >> 64);
        lo = static_cast<std::uint64_t>(p);
    }

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            std::uint64_t hi0, lo0, hi1, lo1;
            mulhilo(M0, ctr[0], hi0, lo0);
            mulhilo(M1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            if (round < 9) {
                key[0] += W0;
                key[1] += W1;
            }
        }
        return ctr;
    }
};

// Substream address: counter words are (block, stream, trajectory, 0) under
// key (seed, salt), so distinct (trajectory, stream) pairs can never collide.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t stream)
        : key_{seed, 0x243F6A8885A308D3ull}, base_{0, stream, trajectory, 0} {}

    double next() {
        if (pos_ >= 4) refill();
        return buf_[pos_++];
    }

    void fill(std::vector<double>& out, std::size_t n, double scale) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = scale * next();
    }

  private:
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> base_;
    std::uint64_t block_index_ = 0;
    double buf_[4] = {};
    int pos_ = 4;

    static double to_unit(std::uint64_t u) {
        // (0,1): 53-bit mantissa, offset keeps log() finite
        return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
    }

    void refill() {
        auto ctr = base_;
        ctr[0] = block_index_++;
        const auto words = Philox4x64::block(ctr, key_);
        // Box-Muller on the two uniform pairs
        const double u0 = to_unit(words[0]), u1 = to_unit(words[1]);
        const double u2 = to_unit(words[2]), u3 = to_unit(words[3]);
        const double r0 = std::sqrt(-2.0 * std::log(u0));
        const double r1 = std::sqrt(-2.0 * std::log(u2));
        buf_[0] = r0 * std::cos(2.0 * M_PI * u1);
        buf_[1] = r0 * std::sin(2.0 * M_PI * u1);
        buf_[2] = r1 * std::cos(2.0 * M_PI * u3);
        buf_[3] = r1 * std::sin(2.0 * M_PI * u3);
        pos_ = 0;
    }
};

} // namespace esle::rng
