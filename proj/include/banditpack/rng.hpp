#pragma once

#include <cstdint>
#include <random>

namespace banditpack {

// splitmix64 finalizer. Used to turn (base seed, stream index) pairs into
// well-separated engine seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for the `stream`-th independent RNG stream derived from `base`.
// This is the splitmix64 output sequence at position `stream`, so trajectory
// or instance number i can be replayed in isolation from (base, i) alone.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return mix64(base + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

// Deterministic uniform generator. Doubles are produced from the top 53 bits
// of the engine output so results do not depend on the standard library's
// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace banditpack
