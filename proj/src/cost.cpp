#include "otcal/cost.hpp"

#include <cmath>

namespace otcal {

namespace {

void require_off_cut(const CostField& cost, const Vec& x, const Vec& xbar) {
  if (cost.on_cut_locus(x, xbar))
    throw CutLocusError("cost evaluation on the cut locus");
}

void require_step(const CostField& cost, const Vec& x, const Vec& xbar) {
  double scale = std::max(1.0, std::max(x.norm(), xbar.norm()));
  if (cost.fd_step <= 0 || cost.fd_step < 1e-13 * scale)
    throw DegenerateStepError("fd_step underflows the domain scale");
}

}  // namespace

double eval_cost(const CostField& cost, const Vec& x, const Vec& xbar) {
  require_off_cut(cost, x, xbar);
  return cost.eval(x, xbar);
}

Vec cost_grad_x(const CostField& cost, const Vec& x, const Vec& xbar) {
  require_off_cut(cost, x, xbar);
  if (cost.grad_x) return cost.grad_x(x, xbar);
  require_step(cost, x, xbar);
  const double h = cost.fd_step;
  Vec g(cost.n);
  Vec xp = x, xm = x;
  for (int i = 0; i < cost.n; ++i) {
    xp[i] += h;
    xm[i] -= h;
    g[i] = (cost.eval(xp, xbar) - cost.eval(xm, xbar)) / (2 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Vec cost_grad_xbar(const CostField& cost, const Vec& x, const Vec& xbar) {
  require_off_cut(cost, x, xbar);
  if (cost.grad_xbar) return cost.grad_xbar(x, xbar);
  require_step(cost, x, xbar);
  const double h = cost.fd_step;
  Vec g(cost.n);
  Vec bp = xbar, bm = xbar;
  for (int j = 0; j < cost.n; ++j) {
    bp[j] += h;
    bm[j] -= h;
    g[j] = (cost.eval(x, bp) - cost.eval(x, bm)) / (2 * h);
    bp[j] = xbar[j];
    bm[j] = xbar[j];
  }
  return g;
}

Mat mixed_hessian_fd(const CostField& cost, const Vec& x, const Vec& xbar) {
  require_off_cut(cost, x, xbar);
  require_step(cost, x, xbar);
  const double h = cost.fd_step;
  Mat m(cost.n, cost.n);
  Vec xp = x, xm = x, bp = xbar, bm = xbar;
  for (int i = 0; i < cost.n; ++i) {
    xp[i] += h;
    xm[i] -= h;
    for (int j = 0; j < cost.n; ++j) {
      bp[j] += h;
      bm[j] -= h;
      m(i, j) = (cost.eval(xp, bp) - cost.eval(xp, bm) - cost.eval(xm, bp) +
                 cost.eval(xm, bm)) /
                (4 * h * h);
      bp[j] = xbar[j];
      bm[j] = xbar[j];
    }
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return m;
}

Mat mixed_hessian(const CostField& cost, const Vec& x, const Vec& xbar) {
  require_off_cut(cost, x, xbar);
  if (cost.mixed) return cost.mixed(x, xbar);
  return mixed_hessian_fd(cost, x, xbar);
}

TwistReport check_twist(const CostField& cost, const Vec& x,
                        const std::vector<Vec>& samples, double tol) {
  TwistReport rep;
  rep.sample_count = static_cast<int>(samples.size());
  std::vector<Vec> images;
  images.reserve(samples.size());
  for (const auto& xbar : samples) {
    images.push_back(cost_grad_x(cost, x, xbar));
    if (!check_nondegenerate(cost, x, xbar, tol)) rep.nondegenerate = false;
  }
  rep.min_image_gap = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < images.size(); ++a)
    for (size_t b = a + 1; b < images.size(); ++b) {
      double gap = (images[a] - images[b]).norm();
      rep.min_image_gap = std::min(rep.min_image_gap, gap);
      if (gap <= tol * std::max(1.0, images[a].norm())) rep.injective = false;
    }
  if (images.size() < 2) rep.min_image_gap = 0.0;
  return rep;
}

bool check_nondegenerate(const CostField& cost, const Vec& x, const Vec& xbar,
                         double tol) {
  Mat m = mixed_hessian(cost, x, xbar);
  return std::abs(m.determinant()) > tol;
}

namespace {

CostField quadratic_cost(int n) {
  CostField c;
  c.n = n;
  c.eval = [](const Vec& x, const Vec& xb) {
    return 0.5 * (x - xb).squaredNorm();
  };
  c.grad_x = [](const Vec& x, const Vec& xb) -> Vec { return x - xb; };
  c.grad_xbar = [](const Vec& x, const Vec& xb) -> Vec { return xb - x; };
  c.mixed = [n](const Vec&, const Vec&) -> Mat {
    return -Mat::Identity(n, n);
  };
  return c;
}

CostField bilinear_cost(int n) {
  CostField c;
  c.n = n;
  c.eval = [](const Vec& x, const Vec& xb) { return -x.dot(xb); };
  c.grad_x = [](const Vec&, const Vec& xb) -> Vec { return -xb; };
  c.grad_xbar = [](const Vec& x, const Vec&) -> Vec { return -x; };
  c.mixed = [n](const Vec&, const Vec&) -> Mat {
    return -Mat::Identity(n, n);
  };
  return c;
}

CostField log_cost(int n, double margin) {
  CostField c;
  c.n = n;
  c.eval = [](const Vec& x, const Vec& xb) {
    return -std::log((x - xb).norm());
  };
  c.grad_x = [](const Vec& x, const Vec& xb) -> Vec {
    Vec s = x - xb;
    return -s / s.squaredNorm();
  };
  c.grad_xbar = [](const Vec& x, const Vec& xb) -> Vec {
    Vec s = x - xb;
    return s / s.squaredNorm();
  };
  c.mixed = [n](const Vec& x, const Vec& xb) -> Mat {
    // d^2/dx_i dxb_j of -log|x-xb| = (I - 2 s s^T/|s|^2)/|s|^2
    Vec s = x - xb;
    double q = s.squaredNorm();
    return (Mat::Identity(n, n) - 2.0 * s * s.transpose() / q) / q;
  };
  c.cut_locus = [margin](const Vec& x, const Vec& xb) {
    return (x - xb).norm() < margin;
  };
  return c;
}

CostField sqrt1p_cost(int n) {
  CostField c;
  c.n = n;
  c.eval = [](const Vec& x, const Vec& xb) {
    return std::sqrt(1.0 + (x - xb).squaredNorm());
  };
  c.grad_x = [](const Vec& x, const Vec& xb) -> Vec {
    Vec s = x - xb;
    return s / std::sqrt(1.0 + s.squaredNorm());
  };
  c.grad_xbar = [](const Vec& x, const Vec& xb) -> Vec {
    Vec s = x - xb;
    return -s / std::sqrt(1.0 + s.squaredNorm());
  };
  c.mixed = [n](const Vec& x, const Vec& xb) -> Mat {
    Vec s = x - xb;
    double u = 1.0 / std::sqrt(1.0 + s.squaredNorm());
    // D Dbar c = -(I u - s s^T u^3)
    return -(Mat::Identity(n, n) * u - s * s.transpose() * (u * u * u));
  };
  return c;
}

// Uniform-grid Catmull-Rom interpolation along one axis.
double cubic(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t * (p2 - p0 +
                         t * (2 * p0 - 5 * p1 + 4 * p2 - p3 +
                              t * (3 * (p1 - p2) + p3 - p0)));
}

}  // namespace

CostField make_cost(const std::string& id, int n, double cut_margin) {
  if (id == "quadratic") return quadratic_cost(n);
  if (id == "bilinear") return bilinear_cost(n);
  if (id == "log") return log_cost(n, cut_margin);
  if (id == "sqrt1p") return sqrt1p_cost(n);
  throw ConfigError("unknown cost id: " + id);
}

CostField make_grid_cost(const DomainSpec& dom_x, const DomainSpec& dom_xbar,
                         const std::vector<double>& samples) {
  if (dom_x.dim() != 1 || dom_xbar.dim() != 1)
    throw ConfigError("custom-grid cost supports n = 1 only");
  const int nx = dom_x.resolution[0];
  const int nb = dom_xbar.resolution[0];
  if (static_cast<int>(samples.size()) != nx * nb)
    throw ConfigError("custom-grid cost: sample count does not match grid");
  const double x0 = dom_x.lo[0], hx = (dom_x.hi[0] - dom_x.lo[0]) / (nx - 1);
  const double b0 = dom_xbar.lo[0],
               hb = (dom_xbar.hi[0] - dom_xbar.lo[0]) / (nb - 1);
  auto at = [samples, nb](int i, int j) { return samples[i * nb + j]; };

  CostField c;
  c.n = 1;
  c.eval = [=](const Vec& x, const Vec& xb) {
    double fx = (x[0] - x0) / hx;
    double fb = (xb[0] - b0) / hb;
    int i = std::clamp(static_cast<int>(std::floor(fx)), 1, nx - 3);
    int j = std::clamp(static_cast<int>(std::floor(fb)), 1, nb - 3);
    double tx = fx - i, tb = fb - j;
    double col[4];
    for (int a = 0; a < 4; ++a) {
      int ia = i - 1 + a;
      col[a] = cubic(at(ia, j - 1), at(ia, j), at(ia, j + 1), at(ia, j + 2), tb);
    }
    return cubic(col[0], col[1], col[2], col[3], tx);
  };
  c.fd_step = 1e-4 * (dom_x.diameter() + dom_xbar.diameter());
  return c;
}

void scale_fd_step(CostField& cost, const DomainSpec& dom_x,
                   const DomainSpec& dom_xbar, double rel) {
  cost.fd_step = rel * 0.5 * (dom_x.diameter() + dom_xbar.diameter());
}

}  // namespace otcal
