#include "tcg/assignment.hpp"

#include <limits>

#include "tcg/errors.hpp"

namespace tcg {

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t rows,
                                          std::size_t cols) {
  if (rows > cols) throw InputError("assignment requires rows <= cols");
  if (cost.size() != rows * cols) throw InputError("assignment cost matrix has wrong size");
  if (rows == 0) return {};

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = 0;
  // 1-based bookkeeping; column 0 is a virtual source.
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, kNone), way(cols + 1, 0);
  auto c = [&](std::size_t r, std::size_t col) { return cost[(r - 1) * cols + (col - 1)]; };

  for (std::size_t r = 1; r <= rows; ++r) {
    match[0] = r;
    std::size_t col0 = 0;
    std::vector<double> minv(cols + 1, kInf);
    std::vector<bool> used(cols + 1, false);
    do {
      used[col0] = true;
      const std::size_t r0 = match[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= cols; ++col) {
        if (used[col]) continue;
        const double cur = c(r0, col) - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= cols; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != kNone);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::size_t> row_to_col(rows);
  for (std::size_t col = 1; col <= cols; ++col) {
    if (match[col] != kNone) row_to_col[match[col] - 1] = col - 1;
  }
  return row_to_col;
}

}  // namespace tcg
