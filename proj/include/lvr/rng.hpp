#pragma once

#include <cmath>
#include <cstdint>

namespace lvr {

namespace detail {

// 256-layer ziggurat tables over exp(-x^2/2) resp. exp(-x); built once at
// load time in rng.cpp.
struct ZigTables {
    double x[257];
    double ratio[256];
};
extern const ZigTables kNormalZig;
extern const ZigTables kExpZig;
extern const double kNormalZigR;   // rightmost layer edge
extern const double kExpZigR;

} // namespace detail

// Reproducible random stream: (seed, stream_id) fully determine the draw
// sequence; distinct stream ids give statistically independent streams.
//
// The generator is xoshiro256++ with its state filled from a splitmix64
// chain over (seed, stream_id) — implemented here rather than taken from
// <random> so sequences are bit-identical across standard libraries and
// platforms. normal() and exponential() are 256-layer ziggurats
// (Marsaglia/Tsang construction, Doornik-style tables) with exact classic
// tail samplers; both are inverse-free. The acceptance suite depends only
// on their distributional correctness, which the unit tests check against
// erf/expm1 CDFs and moment identities.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        std::uint64_t x = splitmix64(seed);
        x = splitmix64(x + 0x9e3779b97f4a7c15ULL * (stream_id + 1));
        s_[0] = splitmix64(x);
        s_[1] = splitmix64(s_[0]);
        s_[2] = splitmix64(s_[1]);
        s_[3] = splitmix64(s_[2]);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    // Number of raw 64-bit words consumed so far.
    std::uint64_t position() const { return position_; }

    std::uint64_t next_u64() {
        ++position_;
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform01_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal.
    double normal() {
        const std::uint64_t w = next_u64();
        const int i = static_cast<int>(w & 0xFF);
        const double u =
            2.0 * (static_cast<double>(w >> 11) * 0x1.0p-53) - 1.0;
        if (std::fabs(u) < detail::kNormalZig.ratio[i])
            return u * detail::kNormalZig.x[i];
        return normal_slow(u, i);
    }

    // Mean-one exponential.
    double exponential() {
        const std::uint64_t w = next_u64();
        const int i = static_cast<int>(w & 0xFF);
        const double u = static_cast<double>(w >> 11) * 0x1.0p-53;
        if (u < detail::kExpZig.ratio[i]) return u * detail::kExpZig.x[i];
        return exponential_slow(u, i);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    double normal_slow(double u, int i);        // wedges + tail, retries inside
    double exponential_slow(double u, int i);

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t position_ = 0;
    std::uint64_t s_[4];
};

} // namespace lvr
