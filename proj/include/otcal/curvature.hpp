#pragma once

#include <functional>
#include <vector>

#include "otcal/metric.hpp"

namespace otcal {

// Symmetric matrix field on the 2n-dimensional product space,
// y = (x, xbar).
using AmbientMetricField = std::function<Mat(const Vec&)>;

AmbientMetricField base_metric_field(const CostField& cost);
AmbientMetricField conformal_metric_field(const CostField& cost,
                                          const DensitySpec& rho,
                                          const DensitySpec& rhobar);

// gamma[a](b, c) = Gamma^a_bc by central differences of the metric.
std::vector<Mat> christoffel_symbols(const AmbientMetricField& field,
                                     const Vec& y, double fd_step);

// Lowered Riemann component R_abcd, sign convention pinned so that the round
// sphere has R(X, Y, Y, X) > 0 (unit-tested against a constant-curvature
// metric). Finite differences throughout.
double riemann_component(const AmbientMetricField& field, const Vec& y, int a,
                         int b, int c, int d, double fd_step);

// Metric with exact first and second derivatives; the second, independent
// pipeline for curvature components.
struct AmbientMetricJet {
  std::function<Mat(const Vec&)> value;
  std::function<Mat(const Vec&, int)> d1;        // d_a H
  std::function<Mat(const Vec&, int, int)> d2;   // d_a d_b H
};

double riemann_component_exact(const AmbientMetricJet& jet, const Vec& y,
                               int a, int b, int c, int d);

// Exact-derivative jet of h_c for the cost sqrt(1 + |Bx - A xbar|^2);
// B and A default to identity and admit chart rotations.
AmbientMetricJet sqrt1p_base_jet(int n, const Mat& bmat, const Mat& amat);

// Cost in rotated Mbar coordinates, xbar = Q xbar'.
CostField rotate_cost_xbar(const CostField& cost, const Mat& q);

enum class MtwClass { StrictPositive, Nonnegative, Violated };

struct MtwPointResult {
  Vec x;
  Vec xbar;
  double min_component = 0.0;  // min R_{i jbar jbar i} over vanishing pairs
  int configs = 0;
};

struct MtwReport {
  std::vector<MtwPointResult> points;
  MtwClass classification = MtwClass::Nonnegative;
};

// Sign report of R_{i jbar jbar i} over index pairs and Mbar-rotations that
// put the metric component (h_c)_{i jbar} at zero.
MtwReport mtw_check(const CostField& cost,
                    const std::vector<std::pair<Vec, Vec>>& points,
                    double tol = 1e-8, double fd_step = 1e-3,
                    double band = 1e-7, int haar_samples = 1024,
                    std::uint64_t seed = 11);

struct ConformalIdentityResult {
  double lhs = 0.0;  // curvature of the conformal metric
  double rhs = 0.0;  // conformal factor times curvature of h_c
  double relative_error = 0.0;
  double lambda_scale = 0.0;  // magnitude of the dropped derivative terms
};

// For (h_c)_{i jbar} = 0, the conformal metric's R_{i jbar jbar i} equals the
// pointwise conformal factor times the base component; both sides computed
// through independent pipelines.
ConformalIdentityResult conformal_identity_check(
    const CostField& cost, const DensitySpec& rho, const DensitySpec& rhobar,
    const Vec& x, const Vec& xbar, int i, int jbar, double fd_step,
    double vanish_tol = 1e-8);

}  // namespace otcal
