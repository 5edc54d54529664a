#include "otcal/metric.hpp"

#include <cmath>

#include "otcal/errors.hpp"

namespace otcal {

TangentPlane TangentPlane::graph(const Mat& B) {
  const int n = static_cast<int>(B.rows());
  TangentPlane p;
  p.vectors.resize(2 * n, n);
  p.vectors.topRows(n) = Mat::Identity(n, n);
  p.vectors.bottomRows(n) = B;
  return p;
}

MetricAtPoint base_metric(const CostField& cost, const Vec& x, const Vec& xbar,
                          double tol) {
  Mat m = mixed_hessian(cost, x, xbar);
  if (std::abs(m.determinant()) <= tol)
    throw DegenerateError("det D Dbar c vanishes at the requested point");
  const int n = cost.n;
  MetricAtPoint h;
  h.matrix = Mat::Zero(2 * n, 2 * n);
  h.matrix.topRightCorner(n, n) = -m;
  h.matrix.bottomLeftCorner(n, n) = -m.transpose();
  h.sig = {n, n};
  return h;
}

double conformal_factor(const CostField& cost, const DensitySpec& rho,
                        const DensitySpec& rhobar, const Vec& x,
                        const Vec& xbar) {
  double r = rho(x), rb = rhobar(xbar);
  if (!(r > 0) || !(rb > 0))
    throw NonpositiveDensityError("density not positive at evaluation point");
  double det = std::abs(mixed_hessian(cost, x, xbar).determinant());
  if (det <= 0) throw DegenerateError("det D Dbar c vanishes");
  return 0.5 * std::pow(r * rb / det, 1.0 / cost.n);
}

MetricAtPoint conformal_metric(const CostField& cost, const DensitySpec& rho,
                               const DensitySpec& rhobar, const Vec& x,
                               const Vec& xbar, double tol) {
  MetricAtPoint h = base_metric(cost, x, xbar, tol);
  h.matrix *= conformal_factor(cost, rho, rhobar, x, xbar);
  return h;
}

Mat symplectic_form(const CostField& cost, const Vec& x, const Vec& xbar,
                    double tol) {
  Mat m = mixed_hessian(cost, x, xbar);
  if (std::abs(m.determinant()) <= tol)
    throw DegenerateError("det D Dbar c vanishes at the requested point");
  const int n = cost.n;
  Mat w = Mat::Zero(2 * n, 2 * n);
  w.topRightCorner(n, n) = -m;
  w.bottomLeftCorner(n, n) = m.transpose();
  return w;
}

Mat gram_matrix(const MetricAtPoint& metric, const TangentPlane& plane) {
  return plane.vectors.transpose() * metric.matrix * plane.vectors;
}

double nvector_norm(const MetricAtPoint& metric, const TangentPlane& plane) {
  Mat gram = gram_matrix(metric, plane);
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  if (es.eigenvalues().minCoeff() <= 0)
    throw NotSpacelikeError("plane is not spacelike under the metric");
  return std::sqrt(gram.determinant());
}

SpacelikeReport is_spacelike(const MetricAtPoint& metric,
                             const TangentPlane& plane, double tol) {
  Mat gram = gram_matrix(metric, plane);
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  SpacelikeReport rep;
  rep.margin = es.eigenvalues().minCoeff();
  rep.spacelike = rep.margin > tol;
  return rep;
}

int orientation_sign(const TangentPlane& plane) {
  double dm = plane.m_part().determinant();
  double dmb = plane.mbar_part().determinant();
  double tau = 0.5 * (dm + dmb);
  if (tau == 0.0)
    throw ZeroOrientationError("frame degenerates under both projections");
  return tau > 0 ? 1 : -1;
}

std::pair<int, int> signature(const Mat& symmetric) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric);
  const auto& ev = es.eigenvalues();
  double radius = ev.cwiseAbs().maxCoeff();
  double tol = 1e-10 * radius;
  int pos = 0, neg = 0;
  for (long i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= tol)
      throw DegenerateError("metric eigenvalue within tolerance of zero");
    (ev[i] > 0 ? pos : neg)++;
  }
  return {pos, neg};
}

}  // namespace otcal
