#include "dclust/paths.hpp"

#include "dclust/csv.hpp"

#include <string>

namespace dclust {

LossPaths::LossPaths(int steps, double dt, std::size_t types, std::size_t rank) {
  const auto n = static_cast<std::size_t>(steps) + 1;
  time.resize(n);
  for (std::size_t k = 0; k < n; ++k) time[k] = static_cast<double>(k) * dt;
  D.assign(n, 0.0);
  D_by_type.assign(types, std::vector<double>(n, 0.0));
  L.assign(rank, std::vector<double>(n, 0.0));
  Q_by_type.assign(types, std::vector<double>(n, 0.0));
  X.assign(n, 0.0);
}

namespace {

void add_to(std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
}

void add_to(std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) add_to(a[i], b[i]);
}

void scale_by(std::vector<double>& a, double f) {
  for (double& v : a) v *= f;
}

}  // namespace

void accumulate(LossPaths& sum, const LossPaths& add) {
  add_to(sum.D, add.D);
  add_to(sum.D_by_type, add.D_by_type);
  add_to(sum.L, add.L);
  add_to(sum.Q_by_type, add.Q_by_type);
  add_to(sum.X, add.X);
}

void scale(LossPaths& paths, double factor) {
  scale_by(paths.D, factor);
  for (auto& v : paths.D_by_type) scale_by(v, factor);
  for (auto& v : paths.L) scale_by(v, factor);
  for (auto& v : paths.Q_by_type) scale_by(v, factor);
  scale_by(paths.X, factor);
}

void write_paths_csv(const LossPaths& paths, const std::filesystem::path& path) {
  CsvWriter out(path);
  std::vector<std::string> head{"t", "D"};
  for (std::size_t i = 0; i < paths.D_by_type.size(); ++i) head.push_back("D_type_" + std::to_string(i + 1));
  for (std::size_t j = 0; j < paths.L.size(); ++j) head.push_back("L_" + std::to_string(j + 1));
  for (std::size_t i = 0; i < paths.Q_by_type.size(); ++i) head.push_back("Q_type_" + std::to_string(i + 1));
  head.push_back("X");
  out.header(head);
  std::vector<double> row;
  for (std::size_t k = 0; k < paths.points(); ++k) {
    row.clear();
    row.push_back(paths.time[k]);
    row.push_back(paths.D[k]);
    for (const auto& v : paths.D_by_type) row.push_back(v[k]);
    for (const auto& v : paths.L) row.push_back(v[k]);
    for (const auto& v : paths.Q_by_type) row.push_back(v[k]);
    row.push_back(paths.X[k]);
    out.row(row);
  }
}

}  // namespace dclust
