// Brute-force loop oracles, written independently of the library code paths.

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

namespace zstci::testing {

using Matrix = std::vector<std::vector<double>>;

inline double oracle_sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Nearest mean with ties to the smallest id.
inline std::vector<int> oracle_ncm(const Matrix& queries, const std::map<int, std::vector<double>>& protos) {
  std::vector<int> out;
  for (const auto& q : queries) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [c, u] : protos) {
      const double d = oracle_sq_dist(q, u);
      if (d < best_d || (d == best_d && c < best)) {
        best_d = d;
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

// Number of (a, p, n) with label[a] == label[p], a != p, label[n] != label[a].
inline std::size_t oracle_triplet_count(const std::vector<int>& labels) {
  std::size_t count = 0;
  for (std::size_t a = 0; a < labels.size(); ++a)
    for (std::size_t p = 0; p < labels.size(); ++p)
      for (std::size_t n = 0; n < labels.size(); ++n)
        if (a != p && labels[a] == labels[p] && labels[n] != labels[a]) ++count;
  return count;
}

inline double oracle_triplet_loss(const Matrix& z, const std::vector<int>& labels, double margin) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < labels.size(); ++a)
    for (std::size_t p = 0; p < labels.size(); ++p)
      for (std::size_t n = 0; n < labels.size(); ++n)
        if (a != p && labels[a] == labels[p] && labels[n] != labels[a]) {
          total += std::max(0.0, oracle_sq_dist(z[a], z[p]) - oracle_sq_dist(z[a], z[n]) + margin);
          ++count;
        }
  return count ? total / static_cast<double>(count) : 0.0;
}

inline std::map<int, std::vector<double>> oracle_class_means(const Matrix& z, const std::vector<int>& labels) {
  std::map<int, std::vector<double>> sums;
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& s = sums[labels[i]];
    if (s.empty()) s.assign(z[i].size(), 0.0);
    for (std::size_t d = 0; d < z[i].size(); ++d) s[d] += z[i][d];
    ++counts[labels[i]];
  }
  for (auto& [c, s] : sums)
    for (double& v : s) v /= static_cast<double>(counts[c]);
  return sums;
}

// a[k-1][j-1] holds a_{k,j}.
inline double oracle_average_accuracy(const Matrix& a, std::size_t k) {
  double s = 0.0;
  for (std::size_t j = 1; j <= k; ++j) s += a[k - 1][j - 1];
  return s / static_cast<double>(k);
}

inline double oracle_forgetting(const Matrix& a, std::size_t k) {
  double total = 0.0;
  for (std::size_t j = 1; j < k; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = j; l < k; ++l) best = std::max(best, a[l - 1][j - 1] - a[k - 1][j - 1]);
    total += best;
  }
  return total / static_cast<double>(k - 1);
}

}  // namespace zstci::testing
