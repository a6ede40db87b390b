#pragma once
// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, position), so simulation output does not depend on evaluation
// order or thread count. Domains are separated through the top bits of the
// fourth counter word: 0 for per-agent-per-step draws, 0x8... for sequential
// streams, 0xC... for derived seeds.

#include <array>
#include <cmath>
#include <cstdint>

namespace rgbm {

namespace detail {

constexpr uint32_t philox_m0 = 0xD2511F53u;
constexpr uint32_t philox_m1 = 0xCD9E8D57u;
constexpr uint32_t philox_w0 = 0x9E3779B9u;
constexpr uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

} // namespace detail

using philox_ctr = std::array<uint32_t, 4>;
using philox_key = std::array<uint32_t, 2>;

inline philox_ctr philox4x32(philox_ctr c, philox_key k) {
    for (int round = 0; round < 10; ++round) {
        uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo(detail::philox_m0, c[0], hi0, lo0);
        detail::mulhilo(detail::philox_m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += detail::philox_w0;
        k[1] += detail::philox_w1;
    }
    return c;
}

inline philox_key key_from_seed(uint64_t seed) {
    return {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
}

// (u >> 11) + 1 scaled by 2^-53: uniform on (0, 1], never 0, so log() is safe.
inline double u64_to_unit(uint64_t u) {
    return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;
}

inline uint64_t join_u64(uint32_t lo, uint32_t hi) {
    return static_cast<uint64_t>(hi) << 32 | lo;
}

// Standard normal for agent `agent` at integration step `step`. One Philox
// block per call; the Box-Muller cosine branch of the block's two uniforms.
inline double normal_at(uint64_t seed, uint64_t step, uint32_t agent) {
    philox_ctr c = {static_cast<uint32_t>(step), static_cast<uint32_t>(step >> 32), agent, 0u};
    philox_ctr w = philox4x32(c, key_from_seed(seed));
    double u1 = u64_to_unit(join_u64(w[0], w[1]));
    double u2 = u64_to_unit(join_u64(w[2], w[3]));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Seed for sweep point / repetition `index`, derived so that runs never share
// draws with each other or with the simulation domain.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    philox_ctr c = {static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32), 0u,
                    0xC0000000u};
    philox_ctr w = philox4x32(c, key_from_seed(seed));
    return join_u64(w[0], w[1]);
}

// Sequential stream of draws for samplers that consume an unpredictable
// amount of randomness (gamma rejection, copula sampling). Distinct
// stream ids never collide.
class CounterStream {
  public:
    CounterStream(uint64_t seed, uint32_t stream_id)
        : key_(key_from_seed(seed)), stream_id_(stream_id) {}

    uint64_t next_u64() {
        if (lane_ == 0) {
            philox_ctr c = {static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
                            stream_id_, 0x80000000u};
            philox_ctr w = philox4x32(c, key_);
            buf_[0] = join_u64(w[0], w[1]);
            buf_[1] = join_u64(w[2], w[3]);
            ++block_;
        }
        uint64_t out = buf_[lane_];
        lane_ ^= 1;
        return out;
    }

    // Uniform on (0, 1].
    double next_unit() { return u64_to_unit(next_u64()); }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

  private:
    philox_key key_;
    uint32_t stream_id_;
    uint64_t block_ = 0;
    uint64_t buf_[2] = {0, 0};
    int lane_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rgbm
