#include "dclust/rng.hpp"

#include <cmath>

namespace dclust {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
  return mix64(mix64(master_seed) ^ mix64(trial + 0x5851f42d4c957f2dULL));
}

Engine make_stream(std::uint64_t trial_seed, StreamKind kind, std::uint64_t index) {
  const auto tag = static_cast<std::uint64_t>(kind);
  return Engine(mix64(trial_seed ^ mix64((tag << 56) ^ mix64(index))));
}

std::vector<double> common_noise(std::uint64_t trial_seed, int steps, double dt) {
  auto engine = make_stream(trial_seed, StreamKind::Common);
  std::normal_distribution<double> normal;
  const double scale = std::sqrt(dt);
  std::vector<double> dv(static_cast<std::size_t>(steps));
  for (auto& v : dv) v = scale * normal(engine);
  return dv;
}

}  // namespace dclust
