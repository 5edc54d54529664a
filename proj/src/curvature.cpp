#include "otcal/curvature.hpp"

#include <cmath>
#include <random>

#include "otcal/errors.hpp"

namespace otcal {

AmbientMetricField base_metric_field(const CostField& cost) {
  const int n = cost.n;
  return [cost, n](const Vec& y) -> Mat {
    Mat m = mixed_hessian(cost, y.head(n), y.tail(n));
    Mat h = Mat::Zero(2 * n, 2 * n);
    h.topRightCorner(n, n) = -m;
    h.bottomLeftCorner(n, n) = -m.transpose();
    return h;
  };
}

AmbientMetricField conformal_metric_field(const CostField& cost,
                                          const DensitySpec& rho,
                                          const DensitySpec& rhobar) {
  const int n = cost.n;
  return [cost, rho, rhobar, n](const Vec& y) -> Mat {
    return conformal_metric(cost, rho, rhobar, y.head(n), y.tail(n)).matrix;
  };
}

std::vector<Mat> christoffel_symbols(const AmbientMetricField& field,
                                     const Vec& y, double fd_step) {
  const int d = static_cast<int>(y.size());
  Mat h0 = field(y);
  Mat hinv = h0.fullPivLu().inverse();
  std::vector<Mat> dh(d);
  Vec yp = y, ym = y;
  for (int a = 0; a < d; ++a) {
    yp[a] += fd_step;
    ym[a] -= fd_step;
    dh[a] = (field(yp) - field(ym)) / (2 * fd_step);
    yp[a] = y[a];
    ym[a] = y[a];
  }
  std::vector<Mat> gamma(d, Mat::Zero(d, d));
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

namespace {

// Lowered tensor from Christoffels and their derivatives along c and d:
// R_abcd = -H_ae (d_c Gamma^e_db - d_d Gamma^e_cb
//                 + Gamma^e_cf Gamma^f_db - Gamma^e_df Gamma^f_cb).
// The leading sign makes R(X, Y, Y, X) the sectional numerator, positive on
// the round sphere.
double assemble_component(const Mat& h0, const std::vector<Mat>& gamma,
                          const std::vector<Mat>& dgamma_c,
                          const std::vector<Mat>& dgamma_d, int a, int b,
                          int c, int d) {
  const int dim = static_cast<int>(h0.rows());
  double comp = 0.0;
  for (int e = 0; e < dim; ++e) {
    double t = dgamma_c[e](d, b) - dgamma_d[e](c, b);
    for (int f = 0; f < dim; ++f)
      t += gamma[e](c, f) * gamma[f](d, b) - gamma[e](d, f) * gamma[f](c, b);
    comp += h0(a, e) * t;
  }
  return -comp;
}

}  // namespace

double riemann_component(const AmbientMetricField& field, const Vec& y, int a,
                         int b, int c, int d, double fd_step) {
  Mat h0 = field(y);
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(h0);
    if (es.eigenvalues().cwiseAbs().minCoeff() <
        1e-10 * es.eigenvalues().cwiseAbs().maxCoeff())
      throw DegenerateError("metric degenerate at curvature point");
  }
  auto gamma = christoffel_symbols(field, y, fd_step);
  auto dgamma_along = [&](int dir) {
    Vec yp = y, ym = y;
    yp[dir] += fd_step;
    ym[dir] -= fd_step;
    auto gp = christoffel_symbols(field, yp, fd_step);
    auto gm = christoffel_symbols(field, ym, fd_step);
    for (std::size_t e = 0; e < gp.size(); ++e)
      gp[e] = (gp[e] - gm[e]) / (2 * fd_step);
    return gp;
  };
  return assemble_component(h0, gamma, dgamma_along(c), dgamma_along(d), a, b,
                            c, d);
}

double riemann_component_exact(const AmbientMetricJet& jet, const Vec& y,
                               int a, int b, int c, int d) {
  const int dim = static_cast<int>(y.size());
  Mat h0 = jet.value(y);
  Mat hinv = h0.fullPivLu().inverse();
  std::vector<Mat> dh(dim);
  for (int e = 0; e < dim; ++e) dh[e] = jet.d1(y, e);

  auto lower_gamma = [&](int bb, int cc) {
    Vec lo(dim);
    for (int e = 0; e < dim; ++e)
      lo[e] = 0.5 * (dh[bb](e, cc) + dh[cc](e, bb) - dh[e](bb, cc));
    return lo;
  };
  std::vector<Mat> gamma(dim, Mat::Zero(dim, dim));
  for (int bb = 0; bb < dim; ++bb)
    for (int cc = bb; cc < dim; ++cc) {
      Vec up = hinv * lower_gamma(bb, cc);
      for (int e = 0; e < dim; ++e) {
        gamma[e](bb, cc) = up[e];
        gamma[e](cc, bb) = up[e];
      }
    }
  auto dgamma_along = [&](int dir) {
    Mat dH = dh[dir];
    Mat dhinv = -hinv * dH * hinv;
    std::vector<Mat> dg(dim, Mat::Zero(dim, dim));
    for (int bb = 0; bb < dim; ++bb)
      for (int cc = bb; cc < dim; ++cc) {
        Vec lo = lower_gamma(bb, cc);
        Vec dlo(dim);
        for (int e = 0; e < dim; ++e)
          dlo[e] = 0.5 * (jet.d2(y, dir, bb)(e, cc) +
                          jet.d2(y, dir, cc)(e, bb) -
                          jet.d2(y, dir, e)(bb, cc));
        Vec up = dhinv * lo + hinv * dlo;
        for (int e = 0; e < dim; ++e) {
          dg[e](bb, cc) = up[e];
          dg[e](cc, bb) = up[e];
        }
      }
    return dg;
  };
  return assemble_component(h0, gamma, dgamma_along(c), dgamma_along(d), a, b,
                            c, d);
}

namespace {

double inv_sqrt1p(const Vec& s) { return 1.0 / std::sqrt(1.0 + s.squaredNorm()); }

Mat f2_sqrt1p(const Vec& s) {
  double w = inv_sqrt1p(s);
  const int n = static_cast<int>(s.size());
  return Mat::Identity(n, n) * w - s * s.transpose() * (w * w * w);
}

// Third derivative tensor contracted with one direction.
Mat f3_contract(const Vec& s, const Vec& v) {
  double w = inv_sqrt1p(s);
  double w3 = w * w * w, w5 = w3 * w * w;
  double sv = s.dot(v);
  const int n = static_cast<int>(s.size());
  return -(sv * Mat::Identity(n, n) + v * s.transpose() + s * v.transpose()) *
             w3 +
         3.0 * sv * s * s.transpose() * w5;
}

// Fourth derivative tensor contracted with two directions.
Mat f4_contract(const Vec& s, const Vec& u, const Vec& v) {
  double w = inv_sqrt1p(s);
  double w3 = w * w * w, w5 = w3 * w * w, w7 = w5 * w * w;
  double su = s.dot(u), sv = s.dot(v), uv = u.dot(v);
  const int n = static_cast<int>(s.size());
  Mat id = Mat::Identity(n, n);
  Mat ss = s * s.transpose();
  return -(uv * id + u * v.transpose() + v * u.transpose()) * w3 +
         3.0 * w5 *
             (su * sv * id + sv * (u * s.transpose() + s * u.transpose()) +
              su * (v * s.transpose() + s * v.transpose()) + uv * ss) -
         15.0 * w7 * su * sv * ss;
}

Mat embed_block(const Mat& block) {
  const int n = static_cast<int>(block.rows());
  Mat h = Mat::Zero(2 * n, 2 * n);
  h.topRightCorner(n, n) = block;
  h.bottomLeftCorner(n, n) = block.transpose();
  return h;
}

}  // namespace

AmbientMetricJet sqrt1p_base_jet(int n, const Mat& bmat, const Mat& amat) {
  // s = B x - A xbar; h_c block = -DDbar c = B^T F2(s) A.
  auto svec = [bmat, amat, n](const Vec& y) -> Vec {
    return bmat * y.head(n) - amat * y.tail(n);
  };
  auto dir = [bmat, amat, n](int a) -> Vec {
    return a < n ? Vec(bmat.col(a)) : Vec(-amat.col(a - n));
  };
  AmbientMetricJet jet;
  jet.value = [svec, bmat, amat](const Vec& y) -> Mat {
    return embed_block(bmat.transpose() * f2_sqrt1p(svec(y)) * amat);
  };
  jet.d1 = [svec, dir, bmat, amat](const Vec& y, int a) -> Mat {
    return embed_block(bmat.transpose() * f3_contract(svec(y), dir(a)) * amat);
  };
  jet.d2 = [svec, dir, bmat, amat](const Vec& y, int a, int b) -> Mat {
    return embed_block(bmat.transpose() *
                       f4_contract(svec(y), dir(a), dir(b)) * amat);
  };
  return jet;
}

CostField rotate_cost_xbar(const CostField& cost, const Mat& q) {
  CostField out = cost;
  CostField base = cost;
  out.eval = [base, q](const Vec& x, const Vec& xb) {
    return base.eval(x, q * xb);
  };
  if (base.grad_x)
    out.grad_x = [base, q](const Vec& x, const Vec& xb) -> Vec {
      return base.grad_x(x, q * xb);
    };
  if (base.grad_xbar)
    out.grad_xbar = [base, q](const Vec& x, const Vec& xb) -> Vec {
      return q.transpose() * base.grad_xbar(x, q * xb);
    };
  if (base.mixed)
    out.mixed = [base, q](const Vec& x, const Vec& xb) -> Mat {
      return base.mixed(x, q * xb) * q;
    };
  if (base.cut_locus)
    out.cut_locus = [base, q](const Vec& x, const Vec& xb) {
      return base.cut_locus(x, q * xb);
    };
  return out;
}

namespace {

// Rotation of Mbar coordinates making the (i, j) entry of the mixed block
// vanish: column j orthogonal to row i of DDbar c, remaining columns by
// Gram-Schmidt, det +1.
Mat vanishing_rotation(const Mat& mixed, int i, int j, double tol) {
  const int n = static_cast<int>(mixed.rows());
  Vec row = mixed.row(i).transpose();
  if (row.norm() < tol)
    throw NoVanishingComponentError("mixed Hessian row is null");
  Mat q(n, n);
  if (n == 1) throw NoVanishingComponentError("n = 1 admits no vanishing pair");
  // Unit vector orthogonal to row.
  Vec perp = Vec::Zero(n);
  {
    int k = 0;
    for (int t = 1; t < n; ++t)
      if (std::abs(row[t]) < std::abs(row[k])) k = t;
    perp[k] = 1.0;
    perp -= row * (row.dot(perp) / row.squaredNorm());
    perp.normalize();
  }
  q.col(j) = perp;
  // Complete to an orthonormal basis by Gram-Schmidt, seeding the first free
  // column with the row direction itself.
  int fill = 0;
  for (int col = 0; col < n; ++col) {
    if (col == j) continue;
    Vec cand = (fill == 0) ? Vec(row.normalized()) : Vec(Vec::Unit(n, fill));
    for (int p = 0; p < n; ++p) {
      if (p == j || (p < col && p != j)) {
        Vec qc = q.col(p);
        if (qc.norm() > 0.5) cand -= qc * qc.dot(cand);
      }
    }
    if (cand.norm() < 1e-8) cand = Vec::Unit(n, (fill + 1) % n);
    q.col(col) = cand.normalized();
    ++fill;
  }
  if (q.determinant() < 0) {
    for (int col = 0; col < n; ++col)
      if (col != j) {
        q.col(col) *= -1;
        break;
      }
  }
  return q;
}

}  // namespace

MtwReport mtw_check(const CostField& cost,
                    const std::vector<std::pair<Vec, Vec>>& points, double tol,
                    double fd_step, double band, int haar_samples,
                    std::uint64_t seed) {
  const int n = cost.n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  MtwReport rep;
  double global_min = std::numeric_limits<double>::infinity();
  double global_max = -std::numeric_limits<double>::infinity();
  for (const auto& [x, xbar] : points) {
    Mat mixed = mixed_hessian(cost, x, xbar);
    double radius = mixed.cwiseAbs().maxCoeff();
    MtwPointResult pr;
    pr.x = x;
    pr.xbar = xbar;
    pr.min_component = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, Mat>> configs;  // (pair id, rotation)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        try {
          Mat q = vanishing_rotation(mixed, i, j, 1e-14);
          configs.emplace_back(i * n + j, q);
        } catch (const NoVanishingComponentError&) {
        }
      }
    // Haar-like scan for rotations that already vanish somewhere.
    for (int s = 0; s < haar_samples; ++s) {
      Mat g(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) g(a, b) = gauss(rng);
      Eigen::HouseholderQR<Mat> qr(g);
      Mat q = qr.householderQ();
      Mat rotated = mixed * q;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (std::abs(rotated(i, j)) < tol * radius)
            configs.emplace_back(i * n + j, q);
    }
    if (configs.empty())
      throw NoVanishingComponentError(
          "no rotation produced a vanishing metric component");
    for (const auto& [pair_id, q] : configs) {
      int i = pair_id / n, j = pair_id % n;
      CostField rotated = rotate_cost_xbar(cost, q);
      Vec y(2 * n);
      y << x, q.transpose() * xbar;
      double r = riemann_component(base_metric_field(rotated), y, i, n + j,
                                   n + j, i, fd_step);
      pr.min_component = std::min(pr.min_component, r);
      ++pr.configs;
    }
    global_min = std::min(global_min, pr.min_component);
    global_max = std::max(global_max, pr.min_component);
    rep.points.push_back(pr);
  }
  if (global_min < -band)
    rep.classification = MtwClass::Violated;
  else if (global_min > band)
    rep.classification = MtwClass::StrictPositive;
  else
    rep.classification = MtwClass::Nonnegative;
  return rep;
}

ConformalIdentityResult conformal_identity_check(
    const CostField& cost, const DensitySpec& rho, const DensitySpec& rhobar,
    const Vec& x, const Vec& xbar, int i, int jbar, double fd_step,
    double vanish_tol) {
  const int n = cost.n;
  Vec y(2 * n);
  y << x, xbar;
  auto base = base_metric_field(cost);
  Mat h0 = base(y);
  double radius = h0.cwiseAbs().maxCoeff();
  if (std::abs(h0(i, n + jbar)) >= vanish_tol * radius)
    throw NotVanishingError("(h_c)_{i jbar} does not vanish at this point");

  auto conf = conformal_metric_field(cost, rho, rhobar);
  ConformalIdentityResult res;
  res.lhs = riemann_component(conf, y, i, n + jbar, n + jbar, i, fd_step);
  double base_comp =
      riemann_component(base, y, i, n + jbar, n + jbar, i, fd_step);
  double lambda = conformal_factor(cost, rho, rhobar, x, xbar);
  res.rhs = lambda * base_comp;

  // Scale of the dropped derivative terms: lambda (|grad log lambda|^2
  // + |hess log lambda|) |h_c|; denominates the near-zero cases.
  auto log_lambda = [&](const Vec& yy) {
    return std::log(
        conformal_factor(cost, rho, rhobar, yy.head(n), yy.tail(n)));
  };
  double g2 = 0.0, hess = 0.0;
  const double h = fd_step;
  for (int a = 0; a < 2 * n; ++a) {
    Vec yp = y, ym = y;
    yp[a] += h;
    ym[a] -= h;
    double ga = (log_lambda(yp) - log_lambda(ym)) / (2 * h);
    g2 = std::max(g2, ga * ga);
    double ha =
        (log_lambda(yp) - 2 * log_lambda(y) + log_lambda(ym)) / (h * h);
    hess = std::max(hess, std::abs(ha));
  }
  res.lambda_scale = lambda * (g2 + hess) * radius;
  res.relative_error =
      std::abs(res.lhs - res.rhs) /
      (std::abs(res.rhs) + std::max(res.lambda_scale, 1e-300));
  return res;
}

}  // namespace otcal
