#include "lossgeom/numdiff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lossgeom {

namespace {

struct CentralStencil {
  int radius;
  std::array<double, 7> coeff;  // offsets -radius .. radius
};

// Classic O(h^2) central stencils.
const CentralStencil& central_stencil(int order) {
  static const std::array<CentralStencil, 6> table = {{
      {1, {-0.5, 0.0, 0.5}},
      {1, {1.0, -2.0, 1.0}},
      {2, {-0.5, 1.0, 0.0, -1.0, 0.5}},
      {2, {1.0, -4.0, 6.0, -4.0, 1.0}},
      {3, {-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5}},
      {3, {1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0}},
  }};
  if (order < 1 || order > 6) throw std::invalid_argument("derivative order must be 1..6");
  return table[order - 1];
}

// One-sided O(h^2) stencils at offsets 0, 1, ..., order+1.
const std::vector<double>& onesided_stencil(int order) {
  static const std::array<std::vector<double>, 6> table = {{
      {-1.5, 2.0, -0.5},
      {2.0, -5.0, 4.0, -1.0},
      {-2.5, 9.0, -12.0, 7.0, -1.5},
      {3.0, -14.0, 26.0, -24.0, 11.0, -2.0},
      {-3.5, 20.0, -47.5, 60.0, -42.5, 16.0, -2.5},
      {4.0, -27.0, 78.0, -125.0, 120.0, -69.0, 22.0, -3.0},
  }};
  if (order < 1 || order > 6) throw std::invalid_argument("derivative order must be 1..6");
  return table[order - 1];
}

double central_once(const ScalarFn& f, double x, int order, double h) {
  const CentralStencil& s = central_stencil(order);
  double acc = 0.0;
  for (int j = -s.radius; j <= s.radius; ++j) {
    double c = s.coeff[j + s.radius];
    if (c == 0.0) continue;
    double v = f(x + j * h);
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
    acc += c * v;
  }
  return acc / std::pow(h, order);
}

double onesided_once(const ScalarFn& f, double x0, int order, double h, int dir) {
  const std::vector<double>& c = onesided_stencil(order);
  double acc = 0.0;
  for (size_t i = 0; i < c.size(); ++i) {
    double v = f(x0 + dir * static_cast<double>(i) * h);
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
    acc += c[i] * v;
  }
  return acc / std::pow(dir * h, order);
}

}  // namespace

int central_radius(int order) { return central_stencil(order).radius; }

int onesided_points(int order) {
  return static_cast<int>(onesided_stencil(order).size());
}

double central_derivative(const ScalarFn& f, double x, int order, double h) {
  // Neville tableau over steps h, h/2, h/4; the error series has even powers.
  double d0 = central_once(f, x, order, h);
  double d1 = central_once(f, x, order, h / 2);
  double d2 = central_once(f, x, order, h / 4);
  double r1a = (4.0 * d1 - d0) / 3.0;
  double r1b = (4.0 * d2 - d1) / 3.0;
  return (16.0 * r1b - r1a) / 15.0;
}

double onesided_derivative(const ScalarFn& f, double x0, int order, double h,
                           int direction) {
  // One Richardson step: the O(h^2) term cancels, the O(h^3) term does not,
  // and deeper extrapolation amplifies rounding noise at high orders.
  double d0 = onesided_once(f, x0, order, h, direction);
  double d1 = onesided_once(f, x0, order, h / 2, direction);
  return (4.0 * d1 - d0) / 3.0;
}

double interval_derivative(const ScalarFn& f, double x, int order, double lo,
                           double hi) {
  static const double order_scale[7] = {0, 1.0, 1.0, 2.0, 4.0, 8.0, 12.0};
  static const double onesided_base[7] = {0, 1e-3, 2e-3, 6e-3, 1.2e-2, 2.5e-2, 4e-2};

  const double width = hi - lo;
  const double dist = std::min(x - lo, hi - x);
  double h = std::max(1e-5, 1e-2 * dist) * order_scale[order];
  const int radius = central_radius(order);

  if (x - radius * h > lo && x + radius * h < hi) {
    return central_derivative(f, x, order, h);
  }

  // Too close to a boundary: march into the domain.
  const int dir = (x - lo <= hi - x) ? +1 : -1;
  const double avail = (dir > 0) ? hi - x : x - lo;
  const int npts = onesided_points(order);
  double hs = std::min(onesided_base[order] * width, avail / (npts + 0.5));
  if (hs <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return onesided_derivative(f, x, order, hs, dir);
}

}  // namespace lossgeom
