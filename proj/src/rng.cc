#include "qfound/rng.h"

namespace qfound {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53;
constexpr uint32_t kMul1 = 0xCD9E8D57;
constexpr uint32_t kWeyl0 = 0x9E3779B9;
constexpr uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t &hi, uint32_t &lo) {
    uint64_t p = uint64_t{a} * uint64_t{b};
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RngStream RngStream::derive(uint64_t index) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(stream_ + 0x632BE59BD9B4E019ull)), index);
}

RngStream::result_type RngStream::operator()() {
    if (buffered_ == 0) {
        buffer_ = philox4x32_10(
            {static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32), static_cast<uint32_t>(stream_),
             static_cast<uint32_t>(stream_ >> 32)},
            {static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32)});
        ++block_;
        buffered_ = 2;
    }
    int slot = 2 - buffered_;
    --buffered_;
    ++draw_;
    return uint64_t{buffer_[2 * slot]} | (uint64_t{buffer_[2 * slot + 1]} << 32);
}

double RngStream::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

}  // namespace qfound
