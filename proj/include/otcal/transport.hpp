#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "otcal/cost.hpp"
#include "otcal/density.hpp"

namespace otcal {

struct TransportMap {
  enum class Kind { Analytic, GridInterpolated, DiscreteMatching };
  Kind kind = Kind::Analytic;
  int n = 1;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jac;  // optional closed form
  DomainSpec source;
  DomainSpec target;
  double fd_step = 1e-5;

  Vec operator()(const Vec& x) const { return eval(x); }

  // Analytic when available, otherwise central differences of eval.
  Mat jacobian(const Vec& x) const;
  Mat jacobian_fd(const Vec& x) const;
};

// Kantorovich potentials u on M and v on Mbar.
struct TransportPotentials {
  std::function<double(const Vec&)> u;
  std::function<double(const Vec&)> v;
  std::function<Vec(const Vec&)> grad_u;  // optional
};

struct DiscretePlan {
  std::vector<Vec> source;
  std::vector<Vec> target;
  std::vector<double> source_weights;
  std::vector<double> target_weights;
  std::vector<int> matching;  // source index -> target index
  double total_cost = 0.0;
};

// 1-D monotone rearrangement F = Fbar^{-1} o F of the CDFs.
TransportMap solve_1d_monotone(const DensitySpec& rho,
                               const DensitySpec& rhobar, int grid = 256);

// Exact matching between equal-size uniform-weight clouds (<= 2000 points).
DiscretePlan solve_discrete(const std::vector<Vec>& source,
                            const std::vector<Vec>& target,
                            const CostField& cost);

// Closed-form optimal map between centered Gaussians for quadratic cost:
// F(x) = A x, A = S^{-1/2} (S^{1/2} Sbar S^{1/2})^{1/2} S^{-1/2}.
Mat gaussian_map_matrix(const Mat& sigma, const Mat& sigma_bar);
TransportMap gaussian_map(const Mat& sigma, const Mat& sigma_bar,
                          const DomainSpec& source);

// Solve Dc(x, F(x)) = -Du(x) by damped Newton inside the target box.
TransportMap map_from_potential(const TransportPotentials& pot,
                                const CostField& cost,
                                const DomainSpec& source,
                                const DomainSpec& target,
                                double residual_tol = 1e-10);

// CSV with header "x1,...,xn", one point per row.
std::vector<Vec> read_points_csv(const std::string& path);

// 1-D map sampled at uniformly spaced points (CSV header "x,fx"), linearly
// interpolated between samples.
TransportMap map_from_grid_csv(const std::string& path,
                               const DomainSpec& target);

// Integral of c(x, F(x)) rho(x) dx by midpoint quadrature on rho's grid.
double total_cost(const TransportMap& map, const DensitySpec& rho,
                  const CostField& cost);
double total_cost(const DiscretePlan& plan, const CostField& cost);

struct CyclicalReport {
  bool monotone = true;
  double worst_violation = 0.0;  // most negative cycle improvement found
  int cycles_checked = 0;
};

// No permutation of any subset of size <= max_cycle strictly lowers the sum
// of matched costs (tolerance -1e-10). Enumerates all subsets when feasible,
// otherwise samples seeded random subsets.
CyclicalReport cyclical_monotonicity_check(
    const std::vector<std::pair<Vec, Vec>>& pairs, const CostField& cost,
    int max_cycle, std::uint64_t seed = 1, int max_subsets = 20000);

}  // namespace otcal
