#pragma once

#include <cstdint>
#include <random>

namespace qbl {

// splitmix64 finalizer; also used to derive substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Named substreams of a run's root seed. A run draws environment noise and
// policy noise from separate streams so that adding randomness to a policy
// cannot perturb the environment's sample path.
enum class Stream : std::uint64_t {
    environment = 1,
    policy = 2,
    analysis = 3,
};

constexpr std::uint64_t derive_stream_seed(std::uint64_t root_seed, std::uint64_t stream) {
    return mix64(root_seed + stream * 0x9e3779b97f4a7c15ULL);
}

// Deterministic random stream. Sampling helpers are built directly on the
// engine's 64-bit output (not on std:: distributions, whose output is
// implementation-defined), so equal seeds give bit-identical draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t root_seed, Stream stream)
        : engine_(derive_stream_seed(root_seed, static_cast<std::uint64_t>(stream))) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0,1) with 53-bit resolution; never returns 1.0.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform on {0, ..., n-1}, unbiased via rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t overhang = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
        std::uint64_t x = next_u64();
        while (overhang != 0 && x >= UINT64_MAX - overhang + 1) x = next_u64();
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace qbl
