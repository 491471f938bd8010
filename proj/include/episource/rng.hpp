#pragma once

#include <cstdint>

namespace episource {

// splitmix64 finalizer. Bijective, strong avalanche.
inline std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives the seed of an independent stream from a root seed and a stream
// index. Double mixing keeps derived streams off each other's orbits, so
// batch results depend only on (root, stream), never on worker layout.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream)
{
    std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
    return mix64(mix64(z) + 0x9e3779b97f4a7c15ULL);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b)
{
    return derive_seed(derive_seed(root, a), b);
}

// Counter-based PRNG (splitmix64). All distributions are hand-rolled on top
// of next() so sequences are identical across compilers and platforms.
class rng_stream
{
public:
    explicit rng_stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // uniform in [0,1) with 53 random bits
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_unit() < p; }

    // uniform in [0,n), unbiased
    std::uint64_t below(std::uint64_t n)
    {
        std::uint64_t x, r;
        do {
            x = next();
            r = x % n;
        } while (x - r > 0 - n);
        return r;
    }

    // uniform integer in [lo,hi], inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    std::uint64_t state_;
};

} // namespace episource
