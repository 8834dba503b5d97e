#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nsslab {

/// Identifier of the generator family, written into every run's metadata.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64;splitmix64-substream";

/// SplitMix64 finaliser (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of substream `stream` under master seed `seed`. Depends only on the
/// pair, so path i gets the same numbers whatever order paths run in.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    return Engine(substream_seed(seed, stream));
}

/// Uniform draw in the open interval (0, 1).
double open_uniform(Engine& engine);

}  // namespace nsslab
