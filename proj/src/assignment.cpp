#include "otcal/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "otcal/errors.hpp"

namespace otcal {

double solve_assignment(const std::vector<std::vector<double>>& cost,
                        std::vector<int>& row_to_col) {
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n)
      throw SizeMismatchError("assignment: cost matrix is not square");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  row_to_col.assign(n, -1);
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (p[j] == 0) continue;
    row_to_col[p[j] - 1] = j - 1;
    total += cost[p[j] - 1][j - 1];
  }
  return total;
}

double brute_force_assignment(const std::vector<std::vector<double>>& cost,
                              std::vector<int>& row_to_col) {
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n)
      throw SizeMismatchError("assignment: cost matrix is not square");
  if (n > 10) throw SizeMismatchError("brute force limited to n <= 10");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[i][perm[i]];
    if (total < best) {
      best = total;
      row_to_col = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace otcal
