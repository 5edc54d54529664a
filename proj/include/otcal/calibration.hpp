#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "otcal/graph_surface.hpp"
#include "otcal/metric.hpp"

namespace otcal {

// The n-form (rho dx + rhobar dxbar)/2 evaluated on frames.
struct CalibrationForm {
  DensitySpec rho;
  DensitySpec rhobar;
};

// (rho(x) det(M minors) + rhobar(xbar) det(Mbar minors)) / 2.
double eval_calibration(const CalibrationForm& phi, const Vec& x,
                        const Vec& xbar, const TangentPlane& plane);

using FormAtPoint = std::function<double(const TangentPlane&)>;

struct ComassConfig {
  int starts = 12;
  int iterations = 400;
  double ladder_tol = 1e-3;  // decrease across ladder rungs flags unbounded
  std::uint64_t seed = 7;
  std::vector<double> ladder = {2.0, 8.0, 32.0};
};

struct ComassResult {
  double estimate = 0.0;
  Mat argmin;  // matrix B of the best graph frame {(e_i, B e_i)}
  bool bounded = true;
};

// Infimum of form(xi)/|xi|_h over tau-oriented spacelike graph planes,
// estimated by multi-start Nelder-Mead descent inside an escalating radius
// ladder. Requires the metric's off-diagonal block to have positive definite
// symmetric part (coordinates with -DDbar c > 0).
ComassResult numeric_comass(const FormAtPoint& form,
                            const MetricAtPoint& metric,
                            const ComassConfig& config = {});

struct SweepGap {
  double min_gap = 0.0;  // min of Phi(xi) - |xi|_h over samples
  std::vector<double> histogram;  // gap counts over fixed bins
  int samples = 0;
};

// Randomized check of Phi(xi) >= |xi|_h over graph planes with positive
// definite symmetric part, sampled at points of the product grid.
SweepGap calibration_inequality_sweep(const CalibrationForm& phi,
                                      const CostField& cost, int point_samples,
                                      int plane_samples, std::uint64_t seed);

// Simplicial n-mesh in R^{2n}; simplex orientation is the vertex order.
struct PolyhedralCurrent {
  int n = 1;
  std::vector<Vec> vertices;
  std::vector<std::vector<int>> simplices;  // n+1 indices each

  Mat simplex_frame(std::size_t s) const;  // edge vectors, 2n x n
  Vec simplex_centroid(std::size_t s) const;
};

// Shared facets must be induced with opposite orientations and every simplex
// frame must be tau-oriented; throws MeshOrientationError otherwise.
void validate_current(const PolyhedralCurrent& current);

// Graph of a map sampled on the region grid nodes: segments in 1-D, two
// triangles per cell in 2-D.
PolyhedralCurrent mesh_from_graph(const TransportMap& map,
                                  const DomainSpec& region);

struct MassResult {
  bool finite = true;  // false encodes the -infinity convention
  double value = 0.0;
  int timelike_simplices = 0;
};

using MetricField = std::function<MetricAtPoint(const Vec& x, const Vec& xbar)>;

// Sum over simplices of |frame n-vector|_h x reference volume. A simplex
// whose Gram matrix is not positive definite makes the mass -infinity.
MassResult polyhedral_mass(const PolyhedralCurrent& current,
                           const MetricField& metric,
                           ExecPolicy policy = ExecPolicy::Parallel);

// Integral of the form over the mesh.
double current_integral(const PolyhedralCurrent& current,
                        const CalibrationForm& phi,
                        ExecPolicy policy = ExecPolicy::Parallel);

struct MassCompareRow {
  std::string name;
  double phi_integral = 0.0;
  MassResult mass;
  double pushforward_residual = 0.0;
};

struct MassCompareReport {
  std::vector<MassCompareRow> rows;  // first row is the optimal map
  bool optimal_wins = false;
};

MassCompareReport mass_compare(
    const TransportMap& optimal,
    const std::vector<std::pair<std::string, TransportMap>>& competitors,
    const CostField& cost, const DensitySpec& rho, const DensitySpec& rhobar,
    const DomainSpec& region, double residual_threshold = 1e-2);

// Mesh exchange: vertices.csv (2n columns) + simplices.csv (n+1 indices).
void write_mesh_csv(const PolyhedralCurrent& current,
                    const std::string& vertices_path,
                    const std::string& simplices_path);
PolyhedralCurrent read_mesh_csv(int n, const std::string& vertices_path,
                                const std::string& simplices_path);

}  // namespace otcal
