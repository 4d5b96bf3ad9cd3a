#pragma once

// Counter-based random streams (Philox4x32-10) with Box-Muller Gaussians.
//
// A stream is identified by (seed, stream_id). The Philox key is the seed and
// the 128-bit counter is (stream_id, block). Work that is split into chunks
// gives chunk c the counter range starting at block c << 32, so the output of
// chunk c never depends on how many chunks precede it on a given worker.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace gaussmin {

struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    // Derived independent stream; used to decorrelate sibling computations.
    RngStream split(std::uint64_t offset) const {
        return {seed, stream_id ^ (0x9E3779B97F4A7C15ULL * (offset + 1))};
    }

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

namespace philox {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline Block round(const Block& ctr, const Key& key) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

// Philox4x32 with 10 rounds.
inline Block generate(Block ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        ctr = round(ctr, key);
    }
    return ctr;
}

}  // namespace philox

// Sequential generator over one chunk of a stream.
class StreamEngine {
  public:
    explicit StreamEngine(RngStream stream, std::uint64_t chunk = 0)
        : key_{static_cast<std::uint32_t>(stream.seed), static_cast<std::uint32_t>(stream.seed >> 32)},
          stream_id_(stream.stream_id),
          block_(chunk << 32) {}

    std::uint64_t next_u64() {
        if (used_ == 2) refill();
        const std::uint64_t v = words_[used_];
        ++used_;
        return v;
    }

    // Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    void fill_gaussian(std::span<double> out) {
        for (double& x : out) x = gaussian();
    }

    // Uniform point on the unit sphere of dimension out.size() - 1.
    void fill_sphere(std::span<double> out) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& x : out) {
                x = gaussian();
                norm2 += x * x;
            }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : out) x *= inv;
    }

    // Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

  private:
    void refill() {
        const philox::Block ctr{static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32),
                                static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)};
        const auto out = philox::generate(ctr, key_);
        words_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        words_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        used_ = 0;
        ++block_;
    }

    philox::Key key_;
    std::uint64_t stream_id_;
    std::uint64_t block_;
    std::array<std::uint64_t, 2> words_{};
    int used_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gaussmin
