#include "otcal/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "otcal/assignment.hpp"
#include "otcal/errors.hpp"

namespace otcal {

Mat TransportMap::jacobian_fd(const Vec& x) const {
  const double h = fd_step;
  Mat j(n, n);
  Vec xp = x, xm = x;
  for (int i = 0; i < n; ++i) {
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (eval(xp) - eval(xm)) / (2 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return j;
}

Mat TransportMap::jacobian(const Vec& x) const {
  if (jac) return jac(x);
  return jacobian_fd(x);
}

TransportMap solve_1d_monotone(const DensitySpec& rho,
                               const DensitySpec& rhobar, int grid) {
  if (rho.n != 1 || rhobar.n != 1)
    throw ConfigError("solve_1d_monotone requires n = 1");
  if (!rho.cdf || !rhobar.inv_cdf)
    throw ConfigError("solve_1d_monotone requires CDF access");
  // Strictness check on an interior grid; a flat stretch of either CDF makes
  // the rearrangement ill-defined.
  for (int k = 1; k < grid; ++k) {
    double a = rho.support.lo[0] +
               (rho.support.hi[0] - rho.support.lo[0]) * (k - 1) / grid;
    double b = rho.support.lo[0] +
               (rho.support.hi[0] - rho.support.lo[0]) * k / grid;
    if (!(rho.cdf(b) > rho.cdf(a)))
      throw FlatCdfError("source density vanishes on an interior interval");
  }
  auto cdf = rho.cdf;
  auto inv = rhobar.inv_cdf;
  auto reval = rho.eval;
  auto rbeval = rhobar.eval;
  TransportMap f;
  f.kind = TransportMap::Kind::Analytic;
  f.n = 1;
  f.source = rho.support;
  f.target = rhobar.support;
  f.fd_step = 1e-6 * rho.support.diameter();
  f.eval = [cdf, inv](const Vec& x) {
    Vec y(1);
    y[0] = inv(cdf(x[0]));
    return y;
  };
  // F' = rho / rhobar(F), the 1-D pushforward identity.
  auto ev = f.eval;
  f.jac = [reval, rbeval, ev](const Vec& x) {
    Mat j(1, 1);
    Vec y = ev(x);
    j(0, 0) = reval(x) / rbeval(y);
    return j;
  };
  return f;
}

DiscretePlan solve_discrete(const std::vector<Vec>& source,
                            const std::vector<Vec>& target,
                            const CostField& cost) {
  if (source.size() != target.size())
    throw SizeMismatchError("solve_discrete: clouds differ in size");
  if (source.empty() || source.size() > 2000)
    throw SizeMismatchError("solve_discrete: cloud size out of range");
  const int n = static_cast<int>(source.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c[i][j] = eval_cost(cost, source[i], target[j]);
  DiscretePlan plan;
  plan.source = source;
  plan.target = target;
  plan.source_weights.assign(n, 1.0 / n);
  plan.target_weights.assign(n, 1.0 / n);
  plan.total_cost = solve_assignment(c, plan.matching) / n;
  return plan;
}

namespace {

Mat spd_power(const Mat& m, double p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.eigenvalues().minCoeff() <= 0)
    throw NotPositiveDefiniteError("covariance is not positive definite");
  Vec d = es.eigenvalues().array().pow(p);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Mat gaussian_map_matrix(const Mat& sigma, const Mat& sigma_bar) {
  if (sigma.rows() != sigma_bar.rows())
    throw SizeMismatchError("gaussian_map: covariance dimension mismatch");
  if (!sigma.isApprox(sigma.transpose(), 1e-12) ||
      !sigma_bar.isApprox(sigma_bar.transpose(), 1e-12))
    throw NotPositiveDefiniteError("covariance is not symmetric");
  Mat shalf = spd_power(sigma, 0.5);
  Mat sinvhalf = spd_power(sigma, -0.5);
  Mat mid = spd_power(shalf * sigma_bar * shalf, 0.5);
  return sinvhalf * mid * sinvhalf;
}

TransportMap gaussian_map(const Mat& sigma, const Mat& sigma_bar,
                          const DomainSpec& source) {
  Mat a = gaussian_map_matrix(sigma, sigma_bar);
  const int n = static_cast<int>(a.rows());
  TransportMap f;
  f.kind = TransportMap::Kind::Analytic;
  f.n = n;
  f.source = source;
  f.fd_step = 1e-6 * source.diameter();
  f.eval = [a](const Vec& x) -> Vec { return a * x; };
  f.jac = [a](const Vec&) -> Mat { return a; };
  // Axis-aligned bounding box of the image of the source box.
  f.target = source;
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (long corner = 0; corner < (1L << n); ++corner) {
    Vec c(n);
    for (int i = 0; i < n; ++i)
      c[i] = (corner >> i) & 1 ? source.hi[i] : source.lo[i];
    Vec img = a * c;
    lo = lo.cwiseMin(img);
    hi = hi.cwiseMax(img);
  }
  f.target.lo = lo;
  f.target.hi = hi;
  return f;
}

TransportMap map_from_potential(const TransportPotentials& pot,
                                const CostField& cost,
                                const DomainSpec& source,
                                const DomainSpec& target,
                                double residual_tol) {
  auto grad_u = pot.grad_u;
  if (!grad_u) {
    auto u = pot.u;
    double h = 1e-6 * source.diameter();
    int n = source.dim();
    grad_u = [u, h, n](const Vec& x) {
      Vec g(n);
      Vec xp = x, xm = x;
      for (int i = 0; i < n; ++i) {
        xp[i] += h;
        xm[i] -= h;
        g[i] = (u(xp) - u(xm)) / (2 * h);
        xp[i] = x[i];
        xm[i] = x[i];
      }
      return g;
    };
  }
  CostField c = cost;
  TransportMap f;
  f.kind = TransportMap::Kind::Analytic;
  f.n = cost.n;
  f.source = source;
  f.target = target;
  f.fd_step = 1e-6 * source.diameter();
  Vec center = 0.5 * (target.lo + target.hi);
  f.eval = [c, grad_u, center, target, residual_tol](const Vec& x) -> Vec {
    Vec rhs = -grad_u(x);
    Vec xbar = center;
    auto residual = [&](const Vec& xb) -> Vec {
      return cost_grad_x(c, x, xb) - rhs;
    };
    Vec r = residual(xbar);
    for (int it = 0; it < 100; ++it) {
      if (r.norm() < residual_tol) return xbar;
      Mat jac = mixed_hessian(c, x, xbar);
      Vec step = jac.fullPivLu().solve(-r);
      double damp = 1.0;
      for (; damp > 1e-6; damp *= 0.5) {
        Vec trial = xbar + damp * step;
        if (!target.contains(trial, 0.1 * target.diameter())) continue;
        Vec rt = residual(trial);
        if (rt.norm() < r.norm()) {
          xbar = trial;
          r = rt;
          break;
        }
      }
      if (damp <= 1e-6)
        throw NoRootError("map_from_potential: Newton stalled");
    }
    if (r.norm() >= residual_tol)
      throw NoRootError("map_from_potential: no root within the target box");
    return xbar;
  };
  return f;
}

std::vector<Vec> read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open points file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty points file: " + path);
  int n = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<Vec> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      if (!std::getline(ss, cell, ','))
        throw SizeMismatchError("points csv: short row");
      x[i] = std::stod(cell);
    }
    points.push_back(x);
  }
  return points;
}

TransportMap map_from_grid_csv(const std::string& path,
                               const DomainSpec& target) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty map file: " + path);
  std::vector<double> xs, fs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw ConfigError("map csv: expected two columns");
    xs.push_back(std::stod(a));
    fs.push_back(std::stod(b));
  }
  if (xs.size() < 2) throw ConfigError("map csv: need at least 2 rows");
  double h = xs[1] - xs[0];
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (std::abs(xs[k] - xs[k - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw ConfigError("map csv: grid spacing is not uniform");
  TransportMap f;
  f.kind = TransportMap::Kind::GridInterpolated;
  f.n = 1;
  f.source.lo = Vec::Constant(1, xs.front());
  f.source.hi = Vec::Constant(1, xs.back());
  f.source.resolution = {static_cast<int>(xs.size())};
  f.target = target;
  f.fd_step = 1e-4 * (xs.back() - xs.front());
  double lo = xs.front();
  int m = static_cast<int>(xs.size());
  f.eval = [fs, lo, h, m](const Vec& x) {
    double t = std::clamp((x[0] - lo) / h, 0.0, m - 1.0);
    int k = std::min(static_cast<int>(t), m - 2);
    Vec y(1);
    y[0] = fs[k] + (t - k) * (fs[k + 1] - fs[k]);
    return y;
  };
  return f;
}

double total_cost(const TransportMap& map, const DensitySpec& rho,
                  const CostField& cost) {
  const DomainSpec& dom = rho.support;
  const std::ptrdiff_t cells = dom.cell_count();
  double sum = 0.0;
  for (std::ptrdiff_t k = 0; k < cells; ++k) {
    Vec x = dom.cell_point(k);
    sum += eval_cost(cost, x, map(x)) * rho(x);
  }
  return sum * dom.cell_volume();
}

double total_cost(const DiscretePlan& plan, const CostField& cost) {
  double sum = 0.0;
  for (size_t i = 0; i < plan.source.size(); ++i)
    sum += plan.source_weights[i] *
           eval_cost(cost, plan.source[i], plan.target[plan.matching[i]]);
  return sum;
}

namespace {

// Try every permutation of one subset; returns the best (most negative)
// improvement over the identity matching.
double best_cycle_improvement(const std::vector<std::pair<Vec, Vec>>& pairs,
                              const CostField& cost,
                              const std::vector<int>& subset) {
  const int k = static_cast<int>(subset.size());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double base = 0.0;
  for (int idx : subset)
    base += eval_cost(cost, pairs[idx].first, pairs[idx].second);
  double best = 0.0;
  while (std::next_permutation(perm.begin(), perm.end())) {
    double alt = 0.0;
    for (int i = 0; i < k; ++i)
      alt += eval_cost(cost, pairs[subset[i]].first,
                       pairs[subset[perm[i]]].second);
    best = std::min(best, alt - base);
  }
  return best;
}

}  // namespace

CyclicalReport cyclical_monotonicity_check(
    const std::vector<std::pair<Vec, Vec>>& pairs, const CostField& cost,
    int max_cycle, std::uint64_t seed, int max_subsets) {
  if (max_cycle > 5) throw ConfigError("max_cycle must be <= 5");
  const int n = static_cast<int>(pairs.size());
  CyclicalReport rep;
  std::mt19937_64 rng(seed);
  for (int k = 2; k <= std::min(max_cycle, n); ++k) {
    // Count subsets of size k; enumerate when feasible, sample otherwise.
    double count = 1.0;
    for (int i = 0; i < k; ++i) count *= double(n - i) / (i + 1);
    if (count <= max_subsets) {
      std::vector<int> subset(k);
      std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
          double imp = best_cycle_improvement(pairs, cost, subset);
          rep.worst_violation = std::min(rep.worst_violation, imp);
          ++rep.cycles_checked;
          return;
        }
        for (int i = start; i < n; ++i) {
          subset[depth] = i;
          rec(i + 1, depth + 1);
        }
      };
      rec(0, 0);
    } else {
      std::vector<int> all(n);
      std::iota(all.begin(), all.end(), 0);
      for (int s = 0; s < max_subsets; ++s) {
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<int> subset(all.begin(), all.begin() + k);
        double imp = best_cycle_improvement(pairs, cost, subset);
        rep.worst_violation = std::min(rep.worst_violation, imp);
        ++rep.cycles_checked;
      }
    }
  }
  rep.monotone = rep.worst_violation >= -1e-10;
  return rep;
}

}  // namespace otcal
