#pragma once

#include <vector>

namespace otcal {

// Exact linear assignment (Kuhn-Munkres, shortest augmenting path, O(n^3)).
// cost is a dense square matrix, row-major; returns row -> column matching
// and the minimal total cost.
double solve_assignment(const std::vector<std::vector<double>>& cost,
                        std::vector<int>& row_to_col);

// Exhaustive permutation minimum, O(n!); independent oracle for small n.
double brute_force_assignment(const std::vector<std::vector<double>>& cost,
                              std::vector<int>& row_to_col);

}  // namespace otcal
