#ifndef VTT_ASSIGNMENT_HPP_
#define VTT_ASSIGNMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "vtt/errors.hpp"

namespace vtt {

/// Dense row-major M x N matrix of non-negative distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  /// (row, col) pairs in ascending row order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost(const DistanceMatrix& m) const {
    double acc = 0.0;
    for (auto [r, c] : pairs) acc += m(r, c);
    return acc;
  }
};

namespace detail {

// Shortest augmenting path Kuhn-Munkres with row/column potentials, for
// rows <= cols. Returns the column assigned to each row. Rows are inserted in
// ascending order and columns scanned in ascending order with strict
// comparisons, which fixes the choice among equal-cost optima.
template <typename Cost>
std::vector<std::size_t> hungarian_rows_le_cols(std::size_t n, std::size_t m, Cost&& cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost one-to-one matching of size min(M, N) (rectangular
/// Kuhn-Munkres). Pairs whose distance exceeds `gate` are then dropped and
/// their indices reported as unmatched.
inline Assignment solve_assignment(const DistanceMatrix& m,
                                   double gate = std::numeric_limits<double>::infinity()) {
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw ContractError("solve_assignment: non-finite matrix entry");
  }
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<std::size_t> row_match(rows, cols);  // cols == unmatched
  if (rows > 0 && cols > 0) {
    if (rows <= cols) {
      const auto r2c = detail::hungarian_rows_le_cols(
          rows, cols, [&](std::size_t r, std::size_t c) { return m(r, c); });
      for (std::size_t r = 0; r < rows; ++r) row_match[r] = r2c[r];
    } else {
      const auto c2r = detail::hungarian_rows_le_cols(
          cols, rows, [&](std::size_t c, std::size_t r) { return m(r, c); });
      for (std::size_t c = 0; c < cols; ++c) row_match[c2r[c]] = c;
    }
  }

  Assignment out;
  std::vector<char> col_used(cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = row_match[r];
    if (c < cols && m(r, c) <= gate) {
      out.pairs.emplace_back(r, c);
      col_used[c] = 1;
    } else {
      out.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

}  // namespace vtt

#endif  // VTT_ASSIGNMENT_HPP_
