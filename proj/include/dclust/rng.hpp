#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dclust {

using Engine = std::mt19937_64;

// Independent stream families derived from one trial seed.
enum class StreamKind : std::uint64_t {
  Common = 1,       // V, the systematic Brownian motion
  Name = 2,         // W^n and the exponential threshold of name n
  OracleChunk = 3,  // W* for one chunk of oracle particles
};

// splitmix64 finaliser
std::uint64_t mix64(std::uint64_t x);

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial);

Engine make_stream(std::uint64_t trial_seed, StreamKind kind, std::uint64_t index = 0);

// dV increments for one trial; every solver draws V from here so paths
// match across modules for the same trial seed.
std::vector<double> common_noise(std::uint64_t trial_seed, int steps, double dt);

}  // namespace dclust
