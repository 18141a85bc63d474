#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace dclust {

// Loss statistics on the time grid {0, dt, ..., T}. Per-type and
// per-cluster series are indexed [type][step] and [cluster][step].
struct LossPaths {
  std::vector<double> time;
  std::vector<double> D;
  std::vector<std::vector<double>> D_by_type;
  std::vector<std::vector<double>> L;
  std::vector<std::vector<double>> Q_by_type;
  std::vector<double> X;

  LossPaths() = default;
  LossPaths(int steps, double dt, std::size_t types, std::size_t rank);

  std::size_t points() const { return time.size(); }

  bool operator==(const LossPaths&) const = default;
};

// Pointwise accumulation, used for ensemble means.
void accumulate(LossPaths& sum, const LossPaths& add);
void scale(LossPaths& paths, double factor);

// Columns t, D, D_type_i..., L_j..., Q_type_i..., X.
void write_paths_csv(const LossPaths& paths, const std::filesystem::path& path);

}  // namespace dclust
