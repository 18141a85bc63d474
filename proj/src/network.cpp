#include "dclust/network.hpp"

#include "dclust/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dclust {

AdjacencyMatrix AdjacencyMatrix::identity(std::size_t dim) {
  AdjacencyMatrix a(dim);
  for (std::size_t i = 0; i < dim; ++i) a(i, i) = 1.0;
  return a;
}

void check_adjacency(const AdjacencyMatrix& a) {
  if (a.entries.size() != a.n * a.n) throw MalformedConfig("adjacency matrix is not square");
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    const double v = a.entries[k];
    if (!std::isfinite(v) || v < 0.0)
      throw MalformedConfig("adjacency entry (" + std::to_string(k / a.n) + ", " +
                            std::to_string(k % a.n) + ") must be finite and nonnegative");
  }
}

double frobenius_norm(const AdjacencyMatrix& a) {
  double s = 0.0;
  for (double v : a.entries) s += v * v;
  return std::sqrt(s);
}

double frobenius_distance(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    const double d = a.entries[k] - b.entries[k];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool lexicographically_greater(std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

}  // namespace

NetworkSVD svd_decompose(const AdjacencyMatrix& a, double tol) {
  check_adjacency(a);
  if (!(tol > 0.0)) throw MalformedConfig("svd tolerance must be positive");
  const auto n = static_cast<Eigen::Index>(a.n);
  NetworkSVD out;
  out.n = a.n;
  if (a.n == 0) return out;

  const Eigen::Map<const RowMajor> mat(a.entries.data(), n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double s_max = s.size() ? s(0) : 0.0;
  if (!std::isfinite(s_max)) throw NonConvergence("SVD produced non-finite singular values");

  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(s.size()) && s(static_cast<Eigen::Index>(rank)) > tol * s_max)
    ++rank;

  Eigen::MatrixXd left = svd.matrixU().leftCols(static_cast<Eigen::Index>(rank));
  Eigen::MatrixXd right = svd.matrixV().leftCols(static_cast<Eigen::Index>(rank));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(rank); ++j) {
    Eigen::Index arg = 0;
    right.col(j).cwiseAbs().maxCoeff(&arg);
    if (right(arg, j) < 0.0) {
      right.col(j) *= -1.0;
      left.col(j) *= -1.0;
    }
  }

  std::vector<std::size_t> order(rank);
  std::iota(order.begin(), order.end(), 0);
  const double tie = 1e-12 * s_max;
  // Stable pass: values are already sorted descending, so only runs of ties move.
  for (std::size_t begin = 0; begin < rank;) {
    std::size_t end = begin + 1;
    while (end < rank && s(static_cast<Eigen::Index>(begin)) - s(static_cast<Eigen::Index>(end)) <= tie)
      ++end;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                     order.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t x, std::size_t y) {
                       return lexicographically_greater({left.col(static_cast<Eigen::Index>(x)).data(), a.n},
                                                        {left.col(static_cast<Eigen::Index>(y)).data(), a.n});
                     });
    begin = end;
  }

  out.rank = rank;
  out.singular_values.resize(rank);
  out.left.resize(rank * a.n);
  out.right.resize(rank * a.n);
  for (std::size_t j = 0; j < rank; ++j) {
    const auto src = static_cast<Eigen::Index>(order[j]);
    out.singular_values[j] = s(src);
    std::copy_n(left.col(src).data(), a.n, out.left.begin() + static_cast<std::ptrdiff_t>(j * a.n));
    std::copy_n(right.col(src).data(), a.n, out.right.begin() + static_cast<std::ptrdiff_t>(j * a.n));
  }

  // Post-conditions: orthonormal factors and a faithful reconstruction.
  for (std::size_t j = 0; j < rank; ++j) {
    for (std::size_t k = j; k < rank; ++k) {
      double ll = 0.0, uu = 0.0;
      for (std::size_t i = 0; i < a.n; ++i) {
        ll += out.ell(i, j) * out.ell(i, k);
        uu += out.u(i, j) * out.u(i, k);
      }
      const double target = j == k ? 1.0 : 0.0;
      if (std::abs(ll - target) > 1e-10 || std::abs(uu - target) > 1e-10)
        throw NonConvergence("SVD factors failed the orthonormality check");
    }
  }
  double discarded = 0.0;
  for (Eigen::Index j = static_cast<Eigen::Index>(rank); j < s.size(); ++j) discarded += s(j) * s(j);
  const double residual = frobenius_distance(a, reconstruct(out));
  if (!(residual <= std::sqrt(discarded) + 1e-8 * frobenius_norm(a)))
    throw NonConvergence("SVD reconstruction residual " + std::to_string(residual) + " exceeds tolerance");
  return out;
}

AdjacencyMatrix reconstruct(const NetworkSVD& svd) {
  AdjacencyMatrix a(svd.n);
  for (std::size_t j = 0; j < svd.rank; ++j) {
    const double s = svd.singular_values[j];
    for (std::size_t i = 0; i < svd.n; ++i) {
      const double li = s * svd.ell(i, j);
      if (li == 0.0) continue;
      double* row = a.entries.data() + i * svd.n;
      const auto col = svd.right_column(j);
      for (std::size_t k = 0; k < svd.n; ++k) row[k] += li * col[k];
    }
  }
  return a;
}

LowRankResult low_rank(const NetworkSVD& svd, std::size_t theta) {
  if (theta < 1 || theta > svd.rank)
    throw RankOutOfRange("theta = " + std::to_string(theta) + " outside [1, " + std::to_string(svd.rank) + "]");
  NetworkSVD head = svd;
  head.rank = theta;
  head.singular_values.resize(theta);
  head.left.resize(theta * svd.n);
  head.right.resize(theta * svd.n);

  LowRankResult out{reconstruct(head), {}};
  double sq = 0.0;
  for (std::size_t j = theta; j < svd.rank; ++j) {
    sq += svd.singular_values[j] * svd.singular_values[j];
    out.error.tail_sum += svd.singular_values[j];
  }
  out.error.frobenius = std::sqrt(sq);
  out.error.spectral = theta < svd.rank ? svd.singular_values[theta] : 0.0;
  return out;
}

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4 + 0.0; }


// Sort keys ascending and merge neighbours within tol of the group's first key.
std::vector<std::pair<std::vector<double>, std::size_t>> group_keys(std::vector<std::vector<double>> keys,
                                                                     double tol) {
  std::sort(keys.begin(), keys.end());
  std::vector<std::pair<std::vector<double>, std::size_t>> groups;
  for (auto& key : keys) {
    if (!groups.empty()) {
      const auto& rep = groups.back().first;
      double dist = 0.0;
      for (std::size_t i = 0; i < key.size(); ++i) dist = std::max(dist, std::abs(key[i] - rep[i]));
      if (dist <= tol) {
        ++groups.back().second;
        continue;
      }
    }
    groups.emplace_back(std::move(key), 1);
  }
  return groups;
}

}  // namespace

TypeDistribution extract_types(const NetworkSVD& svd, double group_tol) {
  if (!(group_tol > 0.0)) throw MalformedConfig("group tolerance must be positive");
  std::vector<std::vector<double>> keys(svd.n);
  for (std::size_t i = 0; i < svd.n; ++i) {
    auto& key = keys[i];
    key.reserve(2 * svd.rank);
    for (std::size_t j = 0; j < svd.rank; ++j) key.push_back(round4(svd.beta_c(i, j)));
    for (std::size_t j = 0; j < svd.rank; ++j) key.push_back(round4(svd.ell(i, j)));
  }
  TypeDistribution dist;
  for (auto& [key, count] : group_keys(std::move(keys), group_tol)) {
    TypeDistributionAtom atom;
    atom.beta_c.assign(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(svd.rank));
    atom.ell.assign(key.begin() + static_cast<std::ptrdiff_t>(svd.rank), key.end());
    atom.count = count;
    atom.probability = static_cast<double>(count) / static_cast<double>(svd.n);
    dist.atoms.push_back(std::move(atom));
  }
  return dist;
}

std::vector<MarginalAtom> extract_marginal(const NetworkSVD& svd, Factor factor, std::size_t cluster,
                                           double group_tol) {
  if (!(group_tol > 0.0)) throw MalformedConfig("group tolerance must be positive");
  if (cluster >= svd.rank) throw RankOutOfRange("cluster index " + std::to_string(cluster) + " out of range");
  std::vector<std::vector<double>> keys(svd.n);
  for (std::size_t i = 0; i < svd.n; ++i)
    keys[i] = {round4(factor == Factor::BetaC ? svd.beta_c(i, cluster) : svd.ell(i, cluster))};
  std::vector<MarginalAtom> out;
  for (auto& [key, count] : group_keys(std::move(keys), group_tol))
    out.push_back({key[0], count, static_cast<double>(count) / static_cast<double>(svd.n)});
  return out;
}

std::vector<double> beta_norms(const NetworkSVD& svd) {
  std::vector<double> norms(svd.rank);
  for (std::size_t j = 0; j < svd.rank; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < svd.n; ++i) s += svd.beta_c(i, j) * svd.beta_c(i, j);
    norms[j] = std::sqrt(s);
  }
  return norms;
}

std::vector<NameType> name_types(const TypeDistribution& dist, const NameType& base) {
  std::vector<NameType> types;
  types.reserve(dist.atoms.size());
  for (std::size_t k = 0; k < dist.atoms.size(); ++k) {
    NameType t = base;
    t.label = "atom" + std::to_string(k + 1);
    t.beta_c = dist.atoms[k].beta_c;
    t.ell = dist.atoms[k].ell;
    t.weight = dist.atoms[k].probability;
    types.push_back(std::move(t));
  }
  return types;
}

}  // namespace dclust
