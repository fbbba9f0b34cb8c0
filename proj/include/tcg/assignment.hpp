#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tcg {

// Minimum-cost assignment for a rows x cols cost matrix (row-major) with
// rows <= cols, via the Hungarian method with potentials, O(rows^2 cols).
// Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t rows,
                                          std::size_t cols);

}  // namespace tcg
