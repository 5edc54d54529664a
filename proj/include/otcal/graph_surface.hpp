#pragma once

#include <vector>

#include "otcal/metric.hpp"
#include "otcal/parallel.hpp"
#include "otcal/transport.hpp"

namespace otcal {

// Discretized graph {(x, F(x))} over a source grid, with Jacobians and
// tangent frames. Immutable after construction.
struct GraphSurface {
  DomainSpec grid;
  std::vector<Vec> points;
  std::vector<Vec> values;
  std::vector<Mat> jacobians;

  TangentPlane frame(std::size_t k) const {
    return TangentPlane::graph(jacobians[k]);
  }
};

GraphSurface build_graph_surface(const TransportMap& map,
                                 const DomainSpec& region);

// Induced metric g = (rho rhobar(F) / |det DDbar c|)^{1/n} sym((-DDbar c) DF).
Mat pullback_metric(const TransportMap& map, const CostField& cost,
                    const DensitySpec& rho, const DensitySpec& rhobar,
                    const Vec& x);

// Sup-norm sweeps over the interior of the region grid (eroded by 2 cells).
// Grid points with disagreeing one-sided Jacobians are excluded from the
// statistics and counted in flagged_points.
struct SweepResult {
  double value = 0.0;
  int flagged_points = 0;
  int points_used = 0;
};

// Max-abs entry of the antisymmetric part of (-DDbar c) DF.
SweepResult lagrangian_residual(const TransportMap& map, const CostField& cost,
                                const DomainSpec& region,
                                ExecPolicy policy = ExecPolicy::Parallel);

// Min eigenvalue of sym((-DDbar c) DF) over the grid.
SweepResult spacelike_margin(const TransportMap& map, const CostField& cost,
                             const DomainSpec& region,
                             ExecPolicy policy = ExecPolicy::Parallel);

// Max of |rhobar(F) det DF - rho| / rho; throws OrientationFlip when
// det DF <= 0 at an interior point.
SweepResult pushforward_residual(const TransportMap& map,
                                 const DensitySpec& rho,
                                 const DensitySpec& rhobar,
                                 const DomainSpec& region,
                                 ExecPolicy policy = ExecPolicy::Parallel);

struct CalibrationEqualityReport {
  double max_sqrt_det_gap = 0.0;  // max |sqrt(det g) - rho| / rho
  double max_phi_gap = 0.0;       // max |Phi pullback - rho| / rho
  double min_phi_excess = 0.0;    // min (Phi pullback - sqrt(det g))
  int flagged_points = 0;
  int points_used = 0;
};

// Pointwise comparison of sqrt(det g), the Phi pullback
// (rho + rhobar(F) det DF)/2 and rho.
CalibrationEqualityReport calibration_equality_check(
    const TransportMap& map, const CostField& cost, const DensitySpec& rho,
    const DensitySpec& rhobar, const DomainSpec& region,
    ExecPolicy policy = ExecPolicy::Parallel);

struct DeterminantInequalityResult {
  bool holds = false;
  bool equality = false;
};

// det(sym B) <= det B for B with nonnegative symmetric part, equality iff
// B is symmetric.
DeterminantInequalityResult determinant_inequality_check(const Mat& b);

struct MeanCurvatureResult {
  std::vector<Vec> points;
  std::vector<Vec> vectors;  // ambient mean curvature vector per point
  std::vector<double> norms;  // sqrt(|h(H, H)|)
  double sup_norm = 0.0;
};

// Mean curvature of x -> (x, F(x)) in (M x Mbar, h^{rho,rhobar}): ambient
// Christoffel symbols by central differences of the conformal metric, second
// fundamental form by h-normal projection, trace with the induced metric.
MeanCurvatureResult mean_curvature(const TransportMap& map,
                                   const CostField& cost,
                                   const DensitySpec& rho,
                                   const DensitySpec& rhobar,
                                   const DomainSpec& region, double fd_step,
                                   ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace otcal
