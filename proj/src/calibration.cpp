#include "otcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "otcal/errors.hpp"

namespace otcal {

double eval_calibration(const CalibrationForm& phi, const Vec& x,
                        const Vec& xbar, const TangentPlane& plane) {
  double dm = plane.m_part().determinant();
  double dmb = plane.mbar_part().determinant();
  return 0.5 * (phi.rho(x) * dm + phi.rhobar(xbar) * dmb);
}

namespace {

// Plain Nelder-Mead; dimension is at most n^2 = 4 here.
Vec nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start,
                double scale, int iterations) {
  const int d = static_cast<int>(start.size());
  std::vector<Vec> pts(d + 1, start);
  std::vector<double> val(d + 1);
  for (int i = 0; i < d; ++i) pts[i + 1][i] += scale;
  for (int i = 0; i <= d; ++i) val[i] = f(pts[i]);
  for (int it = 0; it < iterations; ++it) {
    // Order simplex.
    std::vector<int> ord(d + 1);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](int a, int b) { return val[a] < val[b]; });
    std::vector<Vec> p2(d + 1);
    std::vector<double> v2(d + 1);
    for (int i = 0; i <= d; ++i) {
      p2[i] = pts[ord[i]];
      v2[i] = val[ord[i]];
    }
    pts = p2;
    val = v2;
    Vec centroid = Vec::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[i];
    centroid /= d;
    Vec refl = centroid + (centroid - pts[d]);
    double fr = f(refl);
    if (fr < val[0]) {
      Vec exp_ = centroid + 2.0 * (centroid - pts[d]);
      double fe = f(exp_);
      if (fe < fr) {
        pts[d] = exp_;
        val[d] = fe;
      } else {
        pts[d] = refl;
        val[d] = fr;
      }
    } else if (fr < val[d - 1]) {
      pts[d] = refl;
      val[d] = fr;
    } else {
      Vec contr = centroid + 0.5 * (pts[d] - centroid);
      double fc = f(contr);
      if (fc < val[d]) {
        pts[d] = contr;
        val[d] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          val[i] = f(pts[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= d; ++i)
    if (val[i] < val[best]) best = i;
  return pts[best];
}

constexpr double kPenalty = 1e6;

}  // namespace

ComassResult numeric_comass(const FormAtPoint& form,
                            const MetricAtPoint& metric,
                            const ComassConfig& config) {
  const int dim2 = static_cast<int>(metric.matrix.rows());
  const int n = dim2 / 2;
  // The metric's top-right block is -DDbar c itself.
  Mat a = metric.matrix.topRightCorner(n, n);
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    if (es.eigenvalues().minCoeff() <= 0)
      throw BadSignatureError(
          "comass requires coordinates with positive definite -DDbar c");
  }

  auto objective_at = [&](const Mat& b, double radius) -> double {
    double floor = 1.0 / (radius * radius);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (b + b.transpose()));
    double mineig = es.eigenvalues().minCoeff();
    if (mineig < floor || b.norm() > radius)
      return kPenalty + std::max(floor - mineig, b.norm() - radius);
    TangentPlane plane = TangentPlane::graph(b);
    Mat gram = gram_matrix(metric, plane);
    Eigen::SelfAdjointEigenSolver<Mat> ges(gram);
    if (ges.eigenvalues().minCoeff() <= 0) return kPenalty;
    return form(plane) / std::sqrt(gram.determinant());
  };

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 0.5);

  ComassResult res;
  res.argmin = Mat::Identity(n, n);
  double prev_best = std::numeric_limits<double>::infinity();
  for (std::size_t rung = 0; rung < config.ladder.size(); ++rung) {
    const double radius = config.ladder[rung];
    auto obj = [&](const Vec& v) {
      Mat b = Eigen::Map<const Mat>(v.data(), n, n);
      return objective_at(b, radius);
    };
    double best = prev_best;
    for (int s = 0; s < config.starts; ++s) {
      Mat b0 = Mat::Identity(n, n);
      if (s > 0)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) b0(i, j) += gauss(rng);
      Vec v0 = Eigen::Map<Vec>(b0.data(), n * n);
      Vec vbest = nelder_mead(obj, v0, 0.3, config.iterations);
      double val = obj(vbest);
      if (val < best) {
        best = val;
        res.argmin = Eigen::Map<const Mat>(vbest.data(), n, n);
      }
    }
    // Divergence across the last rung transition signals an infimum of
    // -infinity along degenerating planes.
    if (rung + 1 == config.ladder.size() && std::isfinite(prev_best))
      res.bounded = (prev_best - best) <= config.ladder_tol;
    prev_best = best;
    res.estimate = best;
  }
  return res;
}

SweepGap calibration_inequality_sweep(const CalibrationForm& phi,
                                      const CostField& cost, int point_samples,
                                      int plane_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 0.4);
  const int n = cost.n;
  SweepGap out;
  out.min_gap = std::numeric_limits<double>::infinity();
  std::vector<double> gaps;
  for (int p = 0; p < point_samples; ++p) {
    Vec x(n), xbar(n);
    for (int i = 0; i < n; ++i) {
      x[i] = phi.rho.support.lo[i] +
             unif(rng) * (phi.rho.support.hi[i] - phi.rho.support.lo[i]);
      xbar[i] = phi.rhobar.support.lo[i] +
                unif(rng) * (phi.rhobar.support.hi[i] - phi.rhobar.support.lo[i]);
    }
    if (cost.on_cut_locus(x, xbar)) continue;
    MetricAtPoint h = conformal_metric(cost, phi.rho, phi.rhobar, x, xbar);
    for (int q = 0; q < plane_samples; ++q) {
      // Graph plane with positive definite symmetric part.
      Mat m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = gauss(rng);
      Mat b = m * m.transpose() + 0.05 * Mat::Identity(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          double k = gauss(rng);
          b(i, j) += k;
          b(j, i) -= k;
        }
      TangentPlane plane = TangentPlane::graph(b);
      Mat gram = gram_matrix(h, plane);
      Eigen::SelfAdjointEigenSolver<Mat> es(gram);
      if (es.eigenvalues().minCoeff() <= 0) continue;  // not spacelike
      double gap = eval_calibration(phi, x, xbar, plane) -
                   std::sqrt(gram.determinant());
      gaps.push_back(gap);
      out.min_gap = std::min(out.min_gap, gap);
      ++out.samples;
    }
  }
  // 10 bins from min to max gap.
  out.histogram.assign(10, 0.0);
  if (!gaps.empty()) {
    double lo = out.min_gap;
    double hi = *std::max_element(gaps.begin(), gaps.end());
    double w = std::max(hi - lo, 1e-300);
    for (double g : gaps) {
      int bin = std::min(9, static_cast<int>(10 * (g - lo) / w));
      out.histogram[bin] += 1.0;
    }
  }
  return out;
}

Mat PolyhedralCurrent::simplex_frame(std::size_t s) const {
  const auto& ix = simplices[s];
  Mat frame(2 * n, n);
  for (int i = 0; i < n; ++i)
    frame.col(i) = vertices[ix[i + 1]] - vertices[ix[0]];
  return frame;
}

Vec PolyhedralCurrent::simplex_centroid(std::size_t s) const {
  const auto& ix = simplices[s];
  Vec c = Vec::Zero(2 * n);
  for (int v : ix) c += vertices[v];
  return c / (n + 1);
}

namespace {

int permutation_parity(std::vector<int> v) {
  int swaps = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (v[j] < v[i]) ++swaps;
  return swaps % 2 == 0 ? 1 : -1;
}

}  // namespace

void validate_current(const PolyhedralCurrent& current) {
  const int n = current.n;
  std::map<std::vector<int>, int> facet_sign;
  for (std::size_t s = 0; s < current.simplices.size(); ++s) {
    const auto& ix = current.simplices[s];
    if (static_cast<int>(ix.size()) != n + 1)
      throw MeshOrientationError("simplex with wrong vertex count");
    // tau-orientation of the frame.
    TangentPlane plane;
    plane.vectors = current.simplex_frame(s);
    if (orientation_sign(plane) <= 0)
      throw MeshOrientationError("simplex frame is not tau-oriented");
    // Facet orientation bookkeeping: removing vertex i contributes the
    // facet with sign (-1)^i; interior facets must cancel.
    for (int i = 0; i <= n; ++i) {
      std::vector<int> facet;
      for (int j = 0; j <= n; ++j)
        if (j != i) facet.push_back(ix[j]);
      int sign = (i % 2 == 0 ? 1 : -1) * permutation_parity(facet);
      std::vector<int> key = facet;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = facet_sign.emplace(key, sign);
      if (!inserted) {
        if (it->second + sign != 0)
          throw MeshOrientationError(
              "inconsistent orientation across a shared facet");
        it->second = 0;
      }
    }
  }
}

PolyhedralCurrent mesh_from_graph(const TransportMap& map,
                                  const DomainSpec& region) {
  const int n = region.dim();
  if (n > 2) throw ConfigError("mesh_from_graph supports n <= 2");
  PolyhedralCurrent cur;
  cur.n = n;
  if (n == 1) {
    const int res = region.resolution[0];
    const double lo = region.lo[0], h = (region.hi[0] - region.lo[0]) / res;
    for (int k = 0; k <= res; ++k) {
      Vec x(1);
      x[0] = lo + k * h;
      Vec v(2);
      v << x[0], map(x)[0];
      cur.vertices.push_back(v);
    }
    for (int k = 0; k < res; ++k) cur.simplices.push_back({k, k + 1});
    return cur;
  }
  const int rx = region.resolution[0], ry = region.resolution[1];
  const double hx = (region.hi[0] - region.lo[0]) / rx;
  const double hy = (region.hi[1] - region.lo[1]) / ry;
  auto node = [&](int i, int j) { return i * (ry + 1) + j; };
  for (int i = 0; i <= rx; ++i)
    for (int j = 0; j <= ry; ++j) {
      Vec x(2);
      x << region.lo[0] + i * hx, region.lo[1] + j * hy;
      Vec fx = map(x);
      Vec v(4);
      v << x[0], x[1], fx[0], fx[1];
      cur.vertices.push_back(v);
    }
  for (int i = 0; i < rx; ++i)
    for (int j = 0; j < ry; ++j) {
      cur.simplices.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1)});
      cur.simplices.push_back({node(i, j), node(i + 1, j + 1), node(i, j + 1)});
    }
  return cur;
}

MassResult polyhedral_mass(const PolyhedralCurrent& current,
                           const MetricField& metric, ExecPolicy policy) {
  const int n = current.n;
  double nfact = 1.0;
  for (int i = 2; i <= n; ++i) nfact *= i;
  const std::ptrdiff_t count = current.simplices.size();
  std::vector<double> vals(count, 0.0);
  std::vector<char> timelike(count, 0);
  parallel_for(
      count,
      [&](std::ptrdiff_t s) {
        Vec c = current.simplex_centroid(s);
        MetricAtPoint h = metric(c.head(n), c.tail(n));
        Mat frame = current.simplex_frame(s);
        Mat gram = frame.transpose() * h.matrix * frame;
        Eigen::SelfAdjointEigenSolver<Mat> es(gram);
        if (es.eigenvalues().minCoeff() <= 0) {
          timelike[s] = 1;
          return;
        }
        vals[s] = std::sqrt(gram.determinant()) / nfact;
      },
      policy);
  MassResult res;
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    res.timelike_simplices += timelike[s];
    res.value += vals[s];
  }
  if (res.timelike_simplices > 0) {
    res.finite = false;
    res.value = -std::numeric_limits<double>::infinity();
  }
  return res;
}

double current_integral(const PolyhedralCurrent& current,
                        const CalibrationForm& phi, ExecPolicy policy) {
  const int n = current.n;
  double nfact = 1.0;
  for (int i = 2; i <= n; ++i) nfact *= i;
  const std::ptrdiff_t count = current.simplices.size();
  std::vector<double> vals(count);
  parallel_for(
      count,
      [&](std::ptrdiff_t s) {
        Vec c = current.simplex_centroid(s);
        TangentPlane plane;
        plane.vectors = current.simplex_frame(s);
        vals[s] =
            eval_calibration(phi, c.head(n), c.tail(n), plane) / nfact;
      },
      policy);
  double sum = 0.0;
  for (double v : vals) sum += v;
  return sum;
}

MassCompareReport mass_compare(
    const TransportMap& optimal,
    const std::vector<std::pair<std::string, TransportMap>>& competitors,
    const CostField& cost, const DensitySpec& rho, const DensitySpec& rhobar,
    const DomainSpec& region, double residual_threshold) {
  CalibrationForm phi{rho, rhobar};
  MetricField metric = [&](const Vec& x, const Vec& xbar) {
    return conformal_metric(cost, rho, rhobar, x, xbar);
  };
  auto make_row = [&](const std::string& name, const TransportMap& map,
                      bool gate) {
    MassCompareRow row;
    row.name = name;
    try {
      row.pushforward_residual =
          pushforward_residual(map, rho, rhobar, region).value;
    } catch (const OrientationFlipError&) {
      row.pushforward_residual = std::numeric_limits<double>::quiet_NaN();
    }
    if (gate && std::isfinite(row.pushforward_residual) &&
        row.pushforward_residual > residual_threshold)
      throw NotComparableError(name + ": pushforward residual " +
                               std::to_string(row.pushforward_residual) +
                               " exceeds threshold");
    PolyhedralCurrent mesh = mesh_from_graph(map, region);
    row.phi_integral = current_integral(mesh, phi);
    row.mass = polyhedral_mass(mesh, metric);
    return row;
  };
  MassCompareReport rep;
  rep.rows.push_back(make_row("optimal", optimal, true));
  for (const auto& [name, map] : competitors)
    rep.rows.push_back(make_row(name, map, true));
  rep.optimal_wins = rep.rows.front().mass.finite;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    double m = rep.rows[i].mass.finite
                   ? rep.rows[i].mass.value
                   : -std::numeric_limits<double>::infinity();
    if (m > rep.rows.front().mass.value + 1e-12) rep.optimal_wins = false;
  }
  return rep;
}

void write_mesh_csv(const PolyhedralCurrent& current,
                    const std::string& vertices_path,
                    const std::string& simplices_path) {
  std::ofstream vf(vertices_path);
  for (const Vec& v : current.vertices) {
    for (long i = 0; i < v.size(); ++i)
      vf << (i ? "," : "") << v[i];
    vf << "\n";
  }
  std::ofstream sf(simplices_path);
  for (const auto& s : current.simplices) {
    for (std::size_t i = 0; i < s.size(); ++i)
      sf << (i ? "," : "") << s[i];
    sf << "\n";
  }
}

PolyhedralCurrent read_mesh_csv(int n, const std::string& vertices_path,
                                const std::string& simplices_path) {
  PolyhedralCurrent cur;
  cur.n = n;
  std::ifstream vf(vertices_path);
  if (!vf) throw ConfigError("cannot open " + vertices_path);
  std::string line;
  while (std::getline(vf, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Vec v(2 * n);
    std::string cell;
    for (int i = 0; i < 2 * n; ++i) {
      if (!std::getline(ss, cell, ','))
        throw ConfigError("vertex row with too few columns");
      v[i] = std::stod(cell);
    }
    cur.vertices.push_back(v);
  }
  std::ifstream sf(simplices_path);
  if (!sf) throw ConfigError("cannot open " + simplices_path);
  while (std::getline(sf, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<int> s;
    std::string cell;
    while (std::getline(ss, cell, ',')) s.push_back(std::stoi(cell));
    if (static_cast<int>(s.size()) != n + 1)
      throw ConfigError("simplex row with wrong index count");
    cur.simplices.push_back(s);
  }
  return cur;
}

}  // namespace otcal
