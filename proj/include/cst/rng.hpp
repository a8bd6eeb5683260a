#pragma once

#include <cmath>
#include <cstdint>

namespace cst {

// splitmix64; also used to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with explicit seeding. Replicate streams are derived from
// (master seed, stream index) so any replicate can be regenerated in
// isolation and work can be split across workers without changing results.
class rng {
public:
    explicit rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t sm = seed ^ (0x6a09e667f3bcc909ULL * (stream + 1));
        s_[0] = splitmix64(sm);
        s_[1] = splitmix64(sm);
        s_[2] = splitmix64(sm);
        s_[3] = splitmix64(sm);
    }

    std::uint64_t next_u64() {
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

    // Uniform on [0,1) with 53 random bits; platform-independent.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1], safe to pass through log().
    double uniform01_open0() { return 1.0 - uniform01(); }

    double exponential() { return -std::log(uniform01_open0()); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Index into a discrete distribution given its cumulative weights
    // (cum.back() may be < 1; returns cum.size() when u exceeds it).
    template <class Vec>
    std::size_t categorical(const Vec& cum) {
        double u = uniform01();
        for (std::size_t j = 0; j < cum.size(); ++j)
            if (u < cum[j]) return j;
        return cum.size();
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

} // namespace cst
