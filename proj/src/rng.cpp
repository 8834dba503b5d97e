#include "nsslab/rng.hpp"

namespace nsslab {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

double open_uniform(Engine& engine) {
    // 53 random bits mapped to (0, 1) by centring on the half-ulp grid.
    const std::uint64_t bits = engine() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace nsslab
