#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qfound {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
/// Maps a 128-bit counter and 64-bit key to 128 pseudo-random bits.
std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> counter, std::array<uint32_t, 2> key);

/// Deterministic random stream identified by (seed, stream index).
///
/// The seed is the Philox key; the stream index occupies the high 64 bits of
/// the counter and the draw index the low 64 bits. Two streams with different
/// indices never overlap, so per-task streams derived from (seed, task index)
/// give results that do not depend on how tasks are scheduled.
class RngStream {
   public:
    using result_type = uint64_t;

    RngStream(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    /// Stream for sub-task `index` of this stream's task. Uses a fresh key so
    /// nested derivations do not collide with sibling streams.
    RngStream derive(uint64_t index) const;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }
    uint64_t draws() const { return draw_; }

   private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t block_ = 0;
    uint64_t draw_ = 0;
    std::array<uint32_t, 4> buffer_{};
    int buffered_ = 0;
};

}  // namespace qfound
