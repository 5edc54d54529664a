#pragma once

#include <functional>
#include <string>
#include <vector>

#include "otcal/domain.hpp"

namespace otcal {

// Probability density on a box support. Built-in families are normalized on
// the support, so a Gaussian is the truncated-and-renormalized one.
struct DensitySpec {
  int n = 1;
  std::function<double(const Vec&)> eval;
  DomainSpec support;
  // 1-D only; both strictly monotone on the support when present.
  std::function<double(double)> cdf;
  std::function<double(double)> inv_cdf;

  double operator()(const Vec& x) const { return eval(x); }
};

DensitySpec make_uniform(const DomainSpec& support);

// Centered Gaussian with diagonal covariance sigma^2 per axis, truncated to
// the support box and renormalized.
DensitySpec make_gaussian(const DomainSpec& support, const Vec& sigma);

// Density from per-cell samples on the support grid (piecewise constant with
// linear interpolation between cell centers, 1-D only for CDF access).
DensitySpec make_grid_density(const DomainSpec& support,
                              const std::vector<double>& values);

// CSV with header "x,value": uniformly spaced cell centers; the support box
// is inferred from the spacing.
DensitySpec read_density_csv(const std::string& path);

// Midpoint quadrature of the density over its support.
double density_total_mass(const DensitySpec& rho);

// Checks positivity on the grid and total mass 1 within tol.
void validate_density(const DensitySpec& rho, double tol = 1e-6);

}  // namespace otcal
