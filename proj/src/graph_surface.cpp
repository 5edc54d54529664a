#include "otcal/graph_surface.hpp"

#include <cmath>

#include "otcal/errors.hpp"

namespace otcal {

namespace {

constexpr int kInteriorMargin = 2;

// One-sided Jacobian disagreement marks a kink; such points are excluded
// from sup-norm statistics and reported separately.
bool kinked(const TransportMap& map, const Vec& x) {
  if (map.jac) return false;
  const double h = map.fd_step;
  const int n = map.n;
  Vec xp = x, xm = x;
  for (int i = 0; i < n; ++i) {
    xp[i] += h;
    xm[i] -= h;
    Vec fwd = (map.eval(xp) - map.eval(x)) / h;
    Vec bwd = (map.eval(x) - map.eval(xm)) / h;
    xp[i] = x[i];
    xm[i] = x[i];
    double scale = std::max(1.0, fwd.norm());
    if ((fwd - bwd).norm() > 10.0 * 100.0 * h * scale) return true;
  }
  return false;
}

template <typename PerPoint>
SweepResult sweep(const TransportMap& map, const DomainSpec& region,
                  ExecPolicy policy, bool track_max, PerPoint&& per_point) {
  const std::ptrdiff_t cells = region.cell_count();
  std::vector<double> vals(cells,
                           track_max ? -std::numeric_limits<double>::infinity()
                                     : std::numeric_limits<double>::infinity());
  std::vector<char> flags(cells, 0);
  std::vector<char> used(cells, 0);
  parallel_for(
      cells,
      [&](std::ptrdiff_t k) {
        if (!region.interior_cell(k, kInteriorMargin)) return;
        Vec x = region.cell_point(k);
        if (kinked(map, x)) {
          flags[k] = 1;
          return;
        }
        vals[k] = per_point(x);
        used[k] = 1;
      },
      policy);
  SweepResult res;
  res.value = track_max ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t k = 0; k < cells; ++k) {
    res.flagged_points += flags[k];
    if (!used[k]) continue;
    ++res.points_used;
    res.value = track_max ? std::max(res.value, vals[k])
                          : std::min(res.value, vals[k]);
  }
  return res;
}

}  // namespace

GraphSurface build_graph_surface(const TransportMap& map,
                                 const DomainSpec& region) {
  GraphSurface s;
  s.grid = region;
  const std::ptrdiff_t cells = region.cell_count();
  s.points.resize(cells);
  s.values.resize(cells);
  s.jacobians.resize(cells);
  parallel_for(cells, [&](std::ptrdiff_t k) {
    s.points[k] = region.cell_point(k);
    s.values[k] = map(s.points[k]);
    s.jacobians[k] = map.jacobian(s.points[k]);
  });
  return s;
}

Mat pullback_metric(const TransportMap& map, const CostField& cost,
                    const DensitySpec& rho, const DensitySpec& rhobar,
                    const Vec& x) {
  Vec fx = map(x);
  Mat a = -mixed_hessian(cost, x, fx);
  double det = std::abs(a.determinant());
  if (det <= 1e-300) throw DegenerateError("det D Dbar c vanishes");
  Mat df = map.jacobian(x);
  Mat prod = a * df;
  double factor = std::pow(rho(x) * rhobar(fx) / det, 1.0 / cost.n);
  return factor * 0.5 * (prod + prod.transpose());
}

SweepResult lagrangian_residual(const TransportMap& map, const CostField& cost,
                                const DomainSpec& region, ExecPolicy policy) {
  return sweep(map, region, policy, true, [&](const Vec& x) {
    Vec fx = map(x);
    Mat prod = -mixed_hessian(cost, x, fx) * map.jacobian(x);
    return (prod - prod.transpose()).cwiseAbs().maxCoeff();
  });
}

SweepResult spacelike_margin(const TransportMap& map, const CostField& cost,
                             const DomainSpec& region, ExecPolicy policy) {
  return sweep(map, region, policy, false, [&](const Vec& x) {
    Vec fx = map(x);
    Mat prod = -mixed_hessian(cost, x, fx) * map.jacobian(x);
    Mat sym = 0.5 * (prod + prod.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    return es.eigenvalues().minCoeff();
  });
}

SweepResult pushforward_residual(const TransportMap& map,
                                 const DensitySpec& rho,
                                 const DensitySpec& rhobar,
                                 const DomainSpec& region, ExecPolicy policy) {
  return sweep(map, region, policy, true, [&](const Vec& x) {
    double det = map.jacobian(x).determinant();
    if (det <= 0)
      throw OrientationFlipError("det DF <= 0 at an interior point");
    double r = rho(x);
    return std::abs(rhobar(map(x)) * det - r) / r;
  });
}

CalibrationEqualityReport calibration_equality_check(
    const TransportMap& map, const CostField& cost, const DensitySpec& rho,
    const DensitySpec& rhobar, const DomainSpec& region, ExecPolicy policy) {
  const std::ptrdiff_t cells = region.cell_count();
  struct Row {
    double sqrt_gap, phi_gap, excess;
    char used = 0, flagged = 0;
  };
  std::vector<Row> rows(cells);
  parallel_for(
      cells,
      [&](std::ptrdiff_t k) {
        if (!region.interior_cell(k, kInteriorMargin)) return;
        Vec x = region.cell_point(k);
        if (kinked(map, x)) {
          rows[k].flagged = 1;
          return;
        }
        Mat g = pullback_metric(map, cost, rho, rhobar, x);
        double detg = g.determinant();
        if (detg <= 0)
          throw NotSpacelikeError("induced Gram determinant is nonpositive");
        double sd = std::sqrt(detg);
        double r = rho(x);
        double phi = 0.5 * (r + rhobar(map(x)) * map.jacobian(x).determinant());
        rows[k].sqrt_gap = std::abs(sd - r) / r;
        rows[k].phi_gap = std::abs(phi - r) / r;
        rows[k].excess = phi - sd;
        rows[k].used = 1;
      },
      policy);
  CalibrationEqualityReport rep;
  rep.min_phi_excess = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    rep.flagged_points += row.flagged;
    if (!row.used) continue;
    ++rep.points_used;
    rep.max_sqrt_det_gap = std::max(rep.max_sqrt_det_gap, row.sqrt_gap);
    rep.max_phi_gap = std::max(rep.max_phi_gap, row.phi_gap);
    rep.min_phi_excess = std::min(rep.min_phi_excess, row.excess);
  }
  return rep;
}

DeterminantInequalityResult determinant_inequality_check(const Mat& b) {
  Mat sym = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw NotMonotoneError("symmetric part has a negative eigenvalue");
  DeterminantInequalityResult res;
  res.holds = sym.determinant() <= b.determinant() + 1e-12;
  res.equality = (b - b.transpose()).norm() < 1e-12;
  return res;
}

namespace {

// Christoffel symbols of the ambient conformal metric at y in R^{2n}, by
// central differences of the metric field.
std::vector<Mat> christoffels(
    const std::function<Mat(const Vec&)>& metric_field, const Vec& y,
    double h) {
  const int d = static_cast<int>(y.size());
  Mat h0 = metric_field(y);
  Mat hinv = h0.fullPivLu().inverse();
  std::vector<Mat> dh(d);  // dh[a](b,c) = d_a H_bc
  // Five-point stencil: the curvature-free residual is compared against a
  // tolerance at a fixed step, so the O(h^2) constant matters.
  for (int a = 0; a < d; ++a) {
    Vec yp = y, ym = y, yp2 = y, ym2 = y;
    yp[a] += h;
    ym[a] -= h;
    yp2[a] += 2 * h;
    ym2[a] -= 2 * h;
    dh[a] = (-metric_field(yp2) + 8 * metric_field(yp) - 8 * metric_field(ym) +
             metric_field(ym2)) /
            (12 * h);
  }
  std::vector<Mat> gamma(d, Mat::Zero(d, d));  // gamma[a](b,c) = Gamma^a_bc
  for (int b = 0; b < d; ++b)
    for (int c = b; c < d; ++c) {
      Vec lower(d);
      for (int e = 0; e < d; ++e)
        lower[e] = 0.5 * (dh[b](e, c) + dh[c](e, b) - dh[e](b, c));
      Vec up = hinv * lower;
      for (int a = 0; a < d; ++a) {
        gamma[a](b, c) = up[a];
        gamma[a](c, b) = up[a];
      }
    }
  return gamma;
}

}  // namespace

MeanCurvatureResult mean_curvature(const TransportMap& map,
                                   const CostField& cost,
                                   const DensitySpec& rho,
                                   const DensitySpec& rhobar,
                                   const DomainSpec& region, double fd_step,
                                   ExecPolicy policy) {
  const int n = map.n;
  const int d = 2 * n;
  auto metric_field = [&](const Vec& y) -> Mat {
    return conformal_metric(cost, rho, rhobar, y.head(n), y.tail(n)).matrix;
  };

  const std::ptrdiff_t cells = region.cell_count();
  std::vector<std::ptrdiff_t> interior;
  for (std::ptrdiff_t k = 0; k < cells; ++k)
    if (region.interior_cell(k, kInteriorMargin)) interior.push_back(k);

  MeanCurvatureResult res;
  res.points.resize(interior.size());
  res.vectors.resize(interior.size());
  res.norms.resize(interior.size());

  parallel_for(
      static_cast<std::ptrdiff_t>(interior.size()),
      [&](std::ptrdiff_t idx) {
        const Vec x = region.cell_point(interior[idx]);
        const Vec fx = map(x);
        Vec y(d);
        y << x, fx;

        // Tangent frame and second derivatives of the immersion.
        Mat df = map.jacobian(x);
        Mat frame(d, n);
        frame.topRows(n) = Mat::Identity(n, n);
        frame.bottomRows(n) = df;

        const double h = fd_step;
        // Fourth-order stencils, matching the metric-derivative accuracy.
        auto d1_map = [&](const Vec& at, int j) -> Vec {
          Vec p = at, m = at, p2 = at, m2 = at;
          p[j] += h;
          m[j] -= h;
          p2[j] += 2 * h;
          m2[j] -= 2 * h;
          return (-map(p2) + 8 * map(p) - 8 * map(m) + map(m2)) / (12 * h);
        };
        std::vector<Mat> d2f(n, Mat::Zero(n, n));  // d2f[a](i,j) = d_i d_j F^a
        for (int i = 0; i < n; ++i) {
          Vec xp = x, xm = x, xp2 = x, xm2 = x;
          xp[i] += h;
          xm[i] -= h;
          xp2[i] += 2 * h;
          xm2[i] -= 2 * h;
          Vec diag = (-map(xp2) + 16 * map(xp) - 30 * fx + 16 * map(xm) -
                      map(xm2)) /
                     (12 * h * h);
          for (int a = 0; a < n; ++a) d2f[a](i, i) = diag[a];
          for (int j = i + 1; j < n; ++j) {
            Vec pi = x, mi = x, pi2 = x, mi2 = x;
            pi[i] += h;
            mi[i] -= h;
            pi2[i] += 2 * h;
            mi2[i] -= 2 * h;
            Vec cross = (-d1_map(pi2, j) + 8 * d1_map(pi, j) -
                         8 * d1_map(mi, j) + d1_map(mi2, j)) /
                        (12 * h);
            for (int a = 0; a < n; ++a) {
              d2f[a](i, j) = cross[a];
              d2f[a](j, i) = cross[a];
            }
          }
        }

        Mat hmat = metric_field(y);
        auto gamma = christoffels(metric_field, y, h);
        Mat g = frame.transpose() * hmat * frame;
        Mat ginv = g.fullPivLu().inverse();

        // Trace of the covariant Hessian of the immersion.
        Vec trace = Vec::Zero(d);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            Vec w = Vec::Zero(d);
            for (int a = 0; a < n; ++a) w[n + a] = d2f[a](i, j);
            for (int a = 0; a < d; ++a)
              w[a] += frame.col(i).transpose() * gamma[a] * frame.col(j);
            trace += ginv(i, j) * w;
          }

        // h-orthogonal projection onto the normal space; h is nondegenerate
        // on the normal complement of a spacelike plane.
        Mat ptan = frame * ginv * frame.transpose() * hmat;
        if ((ptan * ptan - ptan).cwiseAbs().maxCoeff() > 1e-8)
          throw DegenerateError("tangent projector fails idempotency check");
        Vec hvec = trace - ptan * trace;

        res.points[idx] = x;
        res.vectors[idx] = hvec;
        res.norms[idx] = std::sqrt(std::abs(hvec.dot(hmat * hvec)));
      },
      policy);

  for (double v : res.norms) res.sup_norm = std::max(res.sup_norm, v);
  return res;
}

}  // namespace otcal
