#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "otcal/errors.hpp"

namespace otcal {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Axis-aligned box with a tensor grid, the only domain type supported.
struct DomainSpec {
  Vec lo;
  Vec hi;
  std::vector<int> resolution;  // per axis, >= 3

  int dim() const { return static_cast<int>(lo.size()); }

  double diameter() const { return (hi - lo).norm(); }

  bool contains(const Vec& x, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
  }

  void validate() const {
    if (lo.size() != hi.size() || static_cast<int>(resolution.size()) != dim())
      throw ConfigError("domain: inconsistent dimensions");
    for (int i = 0; i < dim(); ++i) {
      if (!(hi[i] > lo[i])) throw ConfigError("domain: empty interior");
      if (resolution[i] < 3) throw ConfigError("domain: resolution must be >= 3");
    }
  }

  // Cell-center (midpoint) grid coordinate along one axis.
  double cell_center(int axis, int k) const {
    double hstep = (hi[axis] - lo[axis]) / resolution[axis];
    return lo[axis] + (k + 0.5) * hstep;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= (hi[i] - lo[i]) / resolution[i];
    return v;
  }

  std::ptrdiff_t cell_count() const {
    std::ptrdiff_t c = 1;
    for (int r : resolution) c *= r;
    return c;
  }

  // Row-major multi-index of a flat cell id.
  Vec cell_point(std::ptrdiff_t flat) const {
    Vec x(dim());
    for (int i = dim() - 1; i >= 0; --i) {
      int k = static_cast<int>(flat % resolution[i]);
      flat /= resolution[i];
      x[i] = cell_center(i, k);
    }
    return x;
  }

  // True if the cell is at least `margin` cells away from every face.
  bool interior_cell(std::ptrdiff_t flat, int margin) const {
    for (int i = dim() - 1; i >= 0; --i) {
      int k = static_cast<int>(flat % resolution[i]);
      flat /= resolution[i];
      if (k < margin || k >= resolution[i] - margin) return false;
    }
    return true;
  }

  static DomainSpec box(std::initializer_list<double> lo_,
                        std::initializer_list<double> hi_, int res) {
    DomainSpec d;
    d.lo = Eigen::Map<const Vec>(std::data(lo_), static_cast<long>(lo_.size()));
    d.hi = Eigen::Map<const Vec>(std::data(hi_), static_cast<long>(hi_.size()));
    d.resolution.assign(lo_.size(), res);
    d.validate();
    return d;
  }
};

}  // namespace otcal
