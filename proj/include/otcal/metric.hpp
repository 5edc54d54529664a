#pragma once

#include <utility>

#include "otcal/cost.hpp"
#include "otcal/density.hpp"

namespace otcal {

// 2n x 2n symmetric matrix of h_c or h^{rho,rhobar} at one point.
struct MetricAtPoint {
  Mat matrix;
  std::pair<int, int> sig;  // (positive count, negative count)
};

// n column vectors in R^{2n}, each split as (V, Vbar).
struct TangentPlane {
  Mat vectors;  // 2n x n

  int ambient_dim() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
  Mat m_part() const { return vectors.topRows(vectors.rows() / 2); }
  Mat mbar_part() const { return vectors.bottomRows(vectors.rows() / 2); }

  // Graph frame {(e_i, B e_i)} over the M factor.
  static TangentPlane graph(const Mat& B);
};

// h_c = [[0, -DDbar c], [-(DDbar c)^T, 0]].
MetricAtPoint base_metric(const CostField& cost, const Vec& x, const Vec& xbar,
                          double tol = 1e-12);

// Conformal factor applied to h_c: (1/2) (rho rhobar / |det DDbar c|)^{1/n}.
double conformal_factor(const CostField& cost, const DensitySpec& rho,
                        const DensitySpec& rhobar, const Vec& x,
                        const Vec& xbar);

MetricAtPoint conformal_metric(const CostField& cost, const DensitySpec& rho,
                               const DensitySpec& rhobar, const Vec& x,
                               const Vec& xbar, double tol = 1e-12);

// omega_c = [[0, -DDbar c], [(DDbar c)^T, 0]] (antisymmetric pairing).
Mat symplectic_form(const CostField& cost, const Vec& x, const Vec& xbar,
                    double tol = 1e-12);

// Gram matrix h(v_i, v_j) of the frame under the metric.
Mat gram_matrix(const MetricAtPoint& metric, const TangentPlane& plane);

// sqrt(det Gram); throws NotSpacelike if the Gram matrix is not positive
// definite.
double nvector_norm(const MetricAtPoint& metric, const TangentPlane& plane);

struct SpacelikeReport {
  bool spacelike = false;
  double margin = 0.0;  // minimum Gram eigenvalue
};

SpacelikeReport is_spacelike(const MetricAtPoint& metric,
                             const TangentPlane& plane, double tol = 0.0);

// Sign of tau(xi) = (det of M components + det of Mbar components) / 2.
int orientation_sign(const TangentPlane& plane);

// Eigenvalue signature with tolerance 1e-10 x spectral radius.
std::pair<int, int> signature(const Mat& symmetric);

}  // namespace otcal
