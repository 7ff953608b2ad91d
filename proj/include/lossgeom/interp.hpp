#pragma once

#include <vector>

namespace lossgeom {

// Cubic spline with not-a-knot end conditions (single parabola for 3 points,
// straight line for 2).  Abscissae must be strictly increasing.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double value(double t) const;
  double derivative(double t) const;

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  int segment(double t) const;

  std::vector<double> x_, y_, sigma_;  // sigma = second derivatives at knots
};

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
// Preserves monotonicity of the data; C^1.
class PchipInterpolator {
 public:
  PchipInterpolator(std::vector<double> x, std::vector<double> y);

  double value(double t) const;
  double derivative(double t) const;

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  int segment(double t) const;

  std::vector<double> x_, y_, slope_;
};

}  // namespace lossgeom
