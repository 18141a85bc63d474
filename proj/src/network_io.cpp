#include "dclust/csv.hpp"
#include "dclust/errors.hpp"
#include "dclust/network.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace dclust {

namespace {

std::vector<double> parse_fields(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ',' || line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
      ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ',' && line[end] != ' ' && line[end] != '\t' && line[end] != '\r')
      ++end;
    double v = 0.0;
    const char* first = line.data() + pos;
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, line.data() + end, v);
    if (ec != std::errc{} || ptr != line.data() + end)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": cannot parse '" +
                    line.substr(pos, end - pos) + "'");
    out.push_back(v);
    pos = end;
  }
  return out;
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(parse_fields(line, path, lineno));
  }
  return rows;
}

}  // namespace

AdjacencyMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
  const auto rows = read_rows(path);
  if (format == MatrixFormat::Dense) {
    AdjacencyMatrix a(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size())
        throw MalformedConfig(path.string() + ": row " + std::to_string(i + 1) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " +
                              std::to_string(rows.size()));
      std::copy(rows[i].begin(), rows[i].end(), a.entries.begin() + static_cast<std::ptrdiff_t>(i * a.n));
    }
    return a;
  }
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.size() != 3) throw MalformedConfig(path.string() + ": triples need exactly 3 fields");
    for (int k = 0; k < 2; ++k) {
      if (r[k] < 0 || r[k] != static_cast<double>(static_cast<std::size_t>(r[k])))
        throw MalformedConfig(path.string() + ": indices must be nonnegative integers");
      n = std::max(n, static_cast<std::size_t>(r[k]) + 1);
    }
  }
  AdjacencyMatrix a(n);
  for (const auto& r : rows) a(static_cast<std::size_t>(r[0]), static_cast<std::size_t>(r[1])) = r[2];
  return a;
}

void write_dense_csv(const AdjacencyMatrix& a, const std::filesystem::path& path) {
  CsvWriter out(path);
  for (std::size_t i = 0; i < a.n; ++i) out.row({a.entries.data() + i * a.n, a.n});
}

void write_svd_csv(const NetworkSVD& svd, const std::filesystem::path& dir) {
  {
    CsvWriter out(dir / "singular_values.csv");
    const std::vector<std::string> head{"j", "singular_value"};
    out.header(head);
    for (std::size_t j = 0; j < svd.rank; ++j) {
      const double row[] = {static_cast<double>(j + 1), svd.singular_values[j]};
      out.row(row);
    }
  }
  const auto factors = [&](const std::filesystem::path& path, const char* prefix, bool left) {
    CsvWriter out(path);
    std::vector<std::string> head{"name"};
    for (std::size_t j = 0; j < svd.rank; ++j) head.push_back(prefix + std::to_string(j + 1));
    out.header(head);
    std::vector<double> row(svd.rank);
    for (std::size_t i = 0; i < svd.n; ++i) {
      for (std::size_t j = 0; j < svd.rank; ++j) row[j] = left ? svd.ell(i, j) : svd.u(i, j);
      out.row(std::to_string(i), row);
    }
  };
  factors(dir / "left_factors.csv", "ell_", true);
  factors(dir / "right_factors.csv", "u_", false);
}

void write_type_distribution_csv(const TypeDistribution& dist, const std::filesystem::path& path) {
  CsvWriter out(path);
  const std::size_t r = dist.atoms.empty() ? 0 : dist.atoms.front().beta_c.size();
  std::vector<std::string> head;
  for (std::size_t j = 0; j < r; ++j) head.push_back("beta_c_" + std::to_string(j + 1));
  for (std::size_t j = 0; j < r; ++j) head.push_back("ell_" + std::to_string(j + 1));
  head.push_back("count");
  head.push_back("probability");
  out.header(head);
  std::vector<double> row;
  for (const auto& atom : dist.atoms) {
    row.assign(atom.beta_c.begin(), atom.beta_c.end());
    row.insert(row.end(), atom.ell.begin(), atom.ell.end());
    row.push_back(static_cast<double>(atom.count));
    row.push_back(atom.probability);
    out.row(row);
  }
}

}  // namespace dclust
