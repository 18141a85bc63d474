#pragma once

#include "dclust/model.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace dclust {

// Dense n x n matrix of default impacts: (i, j) is the loss of name j at
// the default of name i. Row-major.
struct AdjacencyMatrix {
  std::size_t n = 0;
  std::vector<double> entries;

  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t dim) : n(dim), entries(dim * dim, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries[i * n + j]; }

  static AdjacencyMatrix identity(std::size_t dim);

  bool operator==(const AdjacencyMatrix&) const = default;
};

// Throws MalformedConfig unless the matrix is square, finite and nonnegative.
void check_adjacency(const AdjacencyMatrix& a);

double frobenius_norm(const AdjacencyMatrix& a);
double frobenius_distance(const AdjacencyMatrix& a, const AdjacencyMatrix& b);

// A = sum_j singular_values[j] * left_j * right_j^T.
// Columns are stored contiguously: left[j * n + i] is ell_{i,j}.
struct NetworkSVD {
  std::size_t n = 0;
  std::size_t rank = 0;
  std::vector<double> singular_values;
  std::vector<double> left;
  std::vector<double> right;

  std::span<const double> left_column(std::size_t j) const {
    return {left.data() + j * n, n};
  }
  std::span<const double> right_column(std::size_t j) const {
    return {right.data() + j * n, n};
  }
  double ell(std::size_t name, std::size_t j) const { return left[j * n + name]; }
  double u(std::size_t name, std::size_t j) const { return right[j * n + name]; }
  // beta^C_{name,j} = xi^2_j u_{name,j}
  double beta_c(std::size_t name, std::size_t j) const { return singular_values[j] * u(name, j); }
};

// Singular values <= tol * max singular value are discarded. Factor signs
// make the largest-magnitude entry of each right column positive; equal
// singular values are ordered by descending lexicographic left column.
NetworkSVD svd_decompose(const AdjacencyMatrix& a, double tol = 1e-12);

struct LowRankError {
  double frobenius = 0.0;  // sqrt(sum_{i>theta} xi_i^4), the Eckart-Young minimum
  double spectral = 0.0;   // xi^2_{theta+1}
  double tail_sum = 0.0;   // sum_{i>theta} xi^2_i, an upper bound on both
};

struct LowRankResult {
  AdjacencyMatrix matrix;
  LowRankError error;
};

// Best rank-theta approximation; errors are relative to the retained
// decomposition. Throws RankOutOfRange unless 1 <= theta <= rank.
LowRankResult low_rank(const NetworkSVD& svd, std::size_t theta);

AdjacencyMatrix reconstruct(const NetworkSVD& svd);

struct TypeDistributionAtom {
  std::vector<double> beta_c;
  std::vector<double> ell;
  std::size_t count = 0;
  double probability = 0.0;
};

struct TypeDistribution {
  std::vector<TypeDistributionAtom> atoms;
};

// Groups names whose (beta^C, ell) rows agree within group_tol in max norm
// after rounding to 4 decimals. Atoms are sorted ascending.
TypeDistribution extract_types(const NetworkSVD& svd, double group_tol = 5e-5);

enum class Factor { BetaC, Ell };

struct MarginalAtom {
  double value = 0.0;
  std::size_t count = 0;
  double probability = 0.0;
};

// The one-dimensional version of extract_types for a single factor column.
std::vector<MarginalAtom> extract_marginal(const NetworkSVD& svd, Factor factor, std::size_t cluster,
                                           double group_tol = 5e-5);

// ||beta^C_{.,j}||_2 per cluster, computed from the factor columns.
std::vector<double> beta_norms(const NetworkSVD& svd);

// Types from a distribution: every atom copies `base` and takes the atom's
// beta^C, ell and probability.
std::vector<NameType> name_types(const TypeDistribution& dist, const NameType& base);

enum class MatrixFormat { Dense, Triples };

// Dense: one row per line, comma or whitespace separated. Triples: lines
// "i,j,w" with 0-based indices; the dimension is 1 + the largest index.
// Lines starting with '#' are skipped.
AdjacencyMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format);
void write_dense_csv(const AdjacencyMatrix& a, const std::filesystem::path& path);

// singular_values.csv, left_factors.csv and right_factors.csv in dir.
void write_svd_csv(const NetworkSVD& svd, const std::filesystem::path& dir);
void write_type_distribution_csv(const TypeDistribution& dist, const std::filesystem::path& path);

}  // namespace dclust
