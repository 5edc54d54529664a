#include <random>

#include "doctest.h"
#include "otcal/metric.hpp"

using namespace otcal;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

TangentPlane line_plane(double a, double b) {
  Mat f(2, 1);
  f << a, b;
  return TangentPlane{f};
}

}  // namespace

TEST_CASE("base metric blocks and signature") {
  CostField quad = make_cost("quadratic", 1);
  MetricAtPoint h = base_metric(quad, v1(0.3), v1(0.7));
  Mat expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK((h.matrix - expect).norm() < 1e-12);
  CHECK(h.sig == std::pair<int, int>(1, 1));

  CostField bil = make_cost("bilinear", 2);
  MetricAtPoint h2 = base_metric(bil, v2(1, 2), v2(3, 4));
  Mat expect2 = Mat::Zero(4, 4);
  expect2.topRightCorner(2, 2) = Mat::Identity(2, 2);
  expect2.bottomLeftCorner(2, 2) = Mat::Identity(2, 2);
  CHECK((h2.matrix - expect2).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(h2.matrix);
  CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()[3] == doctest::Approx(1.0));

  CostField lg = make_cost("log", 1);
  MetricAtPoint hl = base_metric(lg, v1(0), v1(1));
  CHECK(hl.matrix(0, 1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("conformal metric carries the half factor") {
  CostField quad = make_cost("quadratic", 1);
  DensitySpec u = make_uniform(DomainSpec::box({0.0}, {1.0}, 16));
  MetricAtPoint h = conformal_metric(quad, u, u, v1(0.5), v1(0.5));
  CHECK(h.matrix(0, 1) == doctest::Approx(0.5));
  CHECK(h.matrix(1, 0) == doctest::Approx(0.5));

  // rho = uniform on [0, 1/2] has density 2: factor (1/2)(2*1) = 1.
  DensitySpec half = make_uniform(DomainSpec::box({0.0}, {0.5}, 16));
  MetricAtPoint h2 = conformal_metric(quad, half, u, v1(0.25), v1(0.5));
  CHECK(h2.matrix(0, 1) == doctest::Approx(1.0));

  // Conformal / base is a positive scalar.
  double ratio = h.matrix(0, 1) / base_metric(quad, v1(0.5), v1(0.5)).matrix(0, 1);
  CHECK(ratio > 0);
  CHECK(conformal_factor(quad, u, u, v1(0.5), v1(0.5)) ==
        doctest::Approx(ratio));
}

TEST_CASE("symplectic pairing") {
  CostField quad = make_cost("quadratic", 1);
  Mat w = symplectic_form(quad, v1(0.2), v1(0.9));
  Mat expect(2, 2);
  expect << 0, 1, -1, 0;
  CHECK((w - expect).norm() < 1e-12);

  CostField bil = make_cost("bilinear", 2);
  Mat wb = symplectic_form(bil, v2(0, 0), v2(1, 1));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 8; ++trial) {
    Vec u(4), v(4);
    for (int i = 0; i < 4; ++i) {
      u[i] = gauss(rng);
      v[i] = gauss(rng);
    }
    CHECK(std::abs(u.dot(wb * v) + v.dot(wb * u)) < 1e-12);
  }
  Vec e1u = Vec::Zero(4), e1v = Vec::Zero(4);
  e1u[0] = 1;  // (e1, 0)
  e1v[2] = 1;  // (0, e1)
  CHECK(e1u.dot(wb * e1v) == doctest::Approx(1.0));
}

TEST_CASE("n-vector norms and spacelike test") {
  CostField quad = make_cost("quadratic", 1);
  DensitySpec u = make_uniform(DomainSpec::box({0.0}, {1.0}, 16));
  MetricAtPoint h = conformal_metric(quad, u, u, v1(0.5), v1(0.5));

  CHECK(nvector_norm(h, line_plane(1, 1)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(nvector_norm(h, line_plane(1, -1)), NotSpacelikeError);

  CostField bil = make_cost("bilinear", 2);
  DensitySpec u2 = make_uniform(DomainSpec::box({0.0, 0.0}, {1.0, 1.0}, 8));
  MetricAtPoint h2 =
      conformal_metric(bil, u2, u2, v2(0.5, 0.5), v2(0.5, 0.5));
  TangentPlane ident = TangentPlane::graph(Mat::Identity(2, 2));
  CHECK(nvector_norm(h2, ident) == doctest::Approx(1.0));

  SpacelikeReport pos = is_spacelike(h, line_plane(1, 1));
  CHECK(pos.spacelike);
  SpacelikeReport neg = is_spacelike(h, line_plane(1, -1));
  CHECK_FALSE(neg.spacelike);

  // DF = rotation by 90 degrees under the bilinear cost: symmetric part 0,
  // weakly spacelike boundary.
  Mat r90(2, 2);
  r90 << 0, 1, -1, 0;
  MetricAtPoint hb = base_metric(bil, v2(0, 0), v2(0, 0));
  SpacelikeReport edge = is_spacelike(hb, TangentPlane::graph(r90));
  CHECK_FALSE(edge.spacelike);
  CHECK(std::abs(edge.margin) < 1e-12);
}

TEST_CASE("orientation sign") {
  Mat f = Mat::Zero(4, 2);
  f.topRows(2) = Mat::Identity(2, 2);
  f.bottomRows(2) = Mat::Identity(2, 2);
  CHECK(orientation_sign(TangentPlane{f}) == 1);

  Mat g = f;
  g.col(0) *= -1;
  CHECK(orientation_sign(TangentPlane{g}) == -1);

  Mat pure = Mat::Zero(4, 2);
  pure.topRows(2) = Mat::Identity(2, 2);
  CHECK(orientation_sign(TangentPlane{pure}) == 1);
}

TEST_CASE("signature counts") {
  CHECK(signature(Mat::Identity(4, 4)) == std::pair<int, int>(4, 0));
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 1, -1, -1;
  CHECK(signature(d) == std::pair<int, int>(1, 2));
}

TEST_CASE("conformal factor preserves spacelikeness") {
  CostField sq = make_cost("sqrt1p", 2);
  DensitySpec g = make_gaussian(DomainSpec::box({-2.0, -2.0}, {2.0, 2.0}, 8),
                                Vec::Constant(2, 1.0));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 40; ++trial) {
    Vec x = v2(gauss(rng) * 0.5, gauss(rng) * 0.5);
    Vec xb = v2(gauss(rng) * 0.5, gauss(rng) * 0.5);
    Mat b(2, 2);
    for (int i = 0; i < 4; ++i) b(i / 2, i % 2) = gauss(rng);
    TangentPlane plane = TangentPlane::graph(b);
    bool base = is_spacelike(base_metric(sq, x, xb), plane).spacelike;
    bool conf = is_spacelike(conformal_metric(sq, g, g, x, xb), plane).spacelike;
    CHECK(base == conf);
  }
}

TEST_CASE("norm is frame independent under unimodular changes") {
  CostField quad = make_cost("quadratic", 2);
  DensitySpec u2 = make_uniform(DomainSpec::box({0.0, 0.0}, {1.0, 1.0}, 8));
  MetricAtPoint h = conformal_metric(quad, u2, u2, v2(0.4, 0.6), v2(0.4, 0.6));
  Mat b(2, 2);
  b << 1.2, 0.1, 0.1, 0.9;
  TangentPlane plane = TangentPlane::graph(b);
  double norm0 = nvector_norm(h, plane);
  Mat a(2, 2);
  a << 2.0, 0.3, 1.0, 0.65;  // det = 1
  a /= std::sqrt(a.determinant());
  TangentPlane changed{plane.vectors * a};
  CHECK(std::abs(nvector_norm(h, changed) - norm0) < 1e-10);
}

TEST_CASE("orientation sign is constant along spacelike paths") {
  // Interpolate between two symmetric positive graphs; the frame stays
  // spacelike and tau never changes sign (disconnectedness witness).
  Mat b0 = Mat::Identity(2, 2);
  Mat b1(2, 2);
  b1 << 2.0, 0.3, 0.3, 1.5;
  for (int k = 0; k <= 20; ++k) {
    double t = k / 20.0;
    TangentPlane plane = TangentPlane::graph((1 - t) * b0 + t * b1);
    CHECK(orientation_sign(plane) == 1);
    Mat flipped = plane.vectors;
    flipped.col(0) *= -1;
    CHECK(orientation_sign(TangentPlane{flipped}) == -1);
  }
}
