#include "otcal/density.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "otcal/errors.hpp"

namespace otcal {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Monotone bisection + Newton inverse on [a, b].
double invert_monotone(const std::function<double(double)>& f, double target,
                       double a, double b) {
  double fa = f(a), fb = f(b);
  if (target <= fa) return a;
  if (target >= fb) return b;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (a + b);
    double fm = f(mid);
    if (fm < target)
      a = mid;
    else
      b = mid;
    if (b - a < 1e-15 * std::max(1.0, std::abs(a) + std::abs(b))) break;
  }
  return 0.5 * (a + b);
}

}  // namespace

DensitySpec make_uniform(const DomainSpec& support) {
  support.validate();
  DensitySpec d;
  d.n = support.dim();
  double vol = 1.0;
  for (int i = 0; i < d.n; ++i) vol *= support.hi[i] - support.lo[i];
  double value = 1.0 / vol;
  d.eval = [value](const Vec&) { return value; };
  d.support = support;
  if (d.n == 1) {
    double lo = support.lo[0], hi = support.hi[0];
    d.cdf = [lo, hi](double x) {
      return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    };
    d.inv_cdf = [lo, hi](double p) { return lo + p * (hi - lo); };
  }
  return d;
}

DensitySpec make_gaussian(const DomainSpec& support, const Vec& sigma) {
  support.validate();
  if (sigma.size() != support.dim())
    throw ConfigError("gaussian density: sigma dimension mismatch");
  DensitySpec d;
  d.n = support.dim();
  d.support = support;
  // Per-axis truncation weight; the product normalizes the box restriction.
  double znorm = 1.0;
  for (int i = 0; i < d.n; ++i) {
    double zi = std_normal_cdf(support.hi[i] / sigma[i]) -
                std_normal_cdf(support.lo[i] / sigma[i]);
    znorm *= zi * sigma[i] * std::sqrt(2.0 * M_PI);
  }
  Vec sig = sigma;
  d.eval = [sig, znorm](const Vec& x) {
    double e = 0.0;
    for (int i = 0; i < x.size(); ++i) e += 0.5 * x[i] * x[i] / (sig[i] * sig[i]);
    return std::exp(-e) / znorm;
  };
  if (d.n == 1) {
    double s = sigma[0];
    double ca = std_normal_cdf(support.lo[0] / s);
    double cb = std_normal_cdf(support.hi[0] / s);
    auto cdf = [s, ca, cb](double x) {
      return std::clamp((std_normal_cdf(x / s) - ca) / (cb - ca), 0.0, 1.0);
    };
    d.cdf = cdf;
    double lo = support.lo[0], hi = support.hi[0];
    d.inv_cdf = [cdf, lo, hi](double p) {
      return invert_monotone(cdf, p, lo, hi);
    };
  }
  return d;
}

DensitySpec make_grid_density(const DomainSpec& support,
                              const std::vector<double>& values) {
  support.validate();
  if (support.dim() != 1)
    throw ConfigError("grid density supports n = 1 only");
  const int m = support.resolution[0];
  if (static_cast<int>(values.size()) != m)
    throw ConfigError("grid density: value count does not match resolution");
  const double lo = support.lo[0], hi = support.hi[0];
  const double h = (hi - lo) / m;
  // Normalize to unit mass.
  double mass = 0.0;
  for (double v : values) {
    if (v < 0) throw NonpositiveDensityError("grid density: negative value");
    mass += v * h;
  }
  if (mass <= 0) throw NonpositiveDensityError("grid density: zero mass");
  std::vector<double> val(values);
  for (double& v : val) v /= mass;

  DensitySpec d;
  d.n = 1;
  d.support = support;
  d.eval = [val, lo, h, m](const Vec& x) {
    int k = std::clamp(static_cast<int>((x[0] - lo) / h), 0, m - 1);
    return val[k];
  };
  // Piecewise-linear CDF over cell boundaries.
  std::vector<double> cum(m + 1, 0.0);
  for (int k = 0; k < m; ++k) cum[k + 1] = cum[k] + val[k] * h;
  d.cdf = [cum, lo, h, m](double x) {
    double f = std::clamp((x - lo) / h, 0.0, static_cast<double>(m));
    int k = std::min(static_cast<int>(f), m - 1);
    return cum[k] + (f - k) * (cum[k + 1] - cum[k]);
  };
  d.inv_cdf = [cum, val, lo, h, m](double p) {
    p = std::clamp(p, 0.0, 1.0);
    int k = 0;
    while (k < m - 1 && cum[k + 1] < p) ++k;
    double slope = cum[k + 1] - cum[k];
    if (slope <= 0)
      throw FlatCdfError("density vanishes on an interior interval");
    return lo + (k + (p - cum[k]) / slope) * h;
  };
  return d;
}

DensitySpec read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open density file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty density file: " + path);
  std::vector<double> xs, vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw ConfigError("density csv: expected two columns");
    xs.push_back(std::stod(a));
    vals.push_back(std::stod(b));
  }
  if (xs.size() < 3) throw ConfigError("density csv: need at least 3 rows");
  double h = xs[1] - xs[0];
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (std::abs(xs[k] - xs[k - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw ConfigError("density csv: grid spacing is not uniform");
  DomainSpec support;
  support.lo = Vec::Constant(1, xs.front() - h / 2);
  support.hi = Vec::Constant(1, xs.back() + h / 2);
  support.resolution = {static_cast<int>(xs.size())};
  return make_grid_density(support, vals);
}

namespace {

double midpoint_mass(const DensitySpec& rho, int res) {
  DomainSpec dom = rho.support;
  dom.resolution.assign(dom.dim(), res);
  double sum = 0.0;
  const std::ptrdiff_t cells = dom.cell_count();
  for (std::ptrdiff_t c = 0; c < cells; ++c) sum += rho.eval(dom.cell_point(c));
  return sum * dom.cell_volume();
}

}  // namespace

double density_total_mass(const DensitySpec& rho) {
  // Richardson-extrapolated midpoint rule; midpoint alone is O(h^2) which is
  // not enough for the 1e-6 normalization check.
  int res = rho.support.dim() >= 2 ? 512 : 4096;
  double coarse = midpoint_mass(rho, res / 2);
  double fine = midpoint_mass(rho, res);
  return (4.0 * fine - coarse) / 3.0;
}

void validate_density(const DensitySpec& rho, double tol) {
  const DomainSpec& dom = rho.support;
  const std::ptrdiff_t cells = dom.cell_count();
  for (std::ptrdiff_t c = 0; c < cells; ++c)
    if (!(rho.eval(dom.cell_point(c)) > 0))
      throw NonpositiveDensityError("density not positive on its support");
  double mass = density_total_mass(rho);
  if (std::abs(mass - 1.0) > tol)
    throw ConfigError("density mass " + std::to_string(mass) +
                      " differs from 1 beyond tolerance");
}

}  // namespace otcal
