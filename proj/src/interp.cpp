#include "lossgeom/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lossgeom {

namespace {

void check_grid(const std::vector<double>& x, const std::vector<double>& y,
                size_t min_points) {
  if (x.size() != y.size()) throw std::invalid_argument("interp: size mismatch");
  if (x.size() < min_points) throw std::invalid_argument("interp: too few points");
  for (size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      throw std::invalid_argument("interp: abscissae not strictly increasing");
    }
  }
}

int locate(const std::vector<double>& x, double t) {
  // clamped segment lookup: evaluation outside [x0, xn] extends the end cubics
  auto it = std::upper_bound(x.begin(), x.end(), t);
  int i = static_cast<int>(it - x.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x.size()) - 2);
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  check_grid(x_, y_, 2);
  const int n = static_cast<int>(x_.size());
  sigma_.assign(n, 0.0);
  if (n == 2) return;  // linear: sigma = 0

  std::vector<double> h(n - 1), d(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }

  if (n == 3) {
    // single parabola through the three points
    double s = 2.0 * (d[1] - d[0]) / (h[0] + h[1]);
    sigma_[0] = sigma_[1] = sigma_[2] = s;
    return;
  }

  // Unknowns sigma_1..sigma_{n-2}; not-a-knot eliminates sigma_0, sigma_{n-1}:
  //   sigma_0 = sigma_1 (1 + h0/h1) - sigma_2 h0/h1, and mirrored on the right.
  const int m = n - 2;
  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  for (int i = 1; i <= n - 2; ++i) {
    int r = i - 1;
    sub[r] = h[i - 1];
    diag[r] = 2.0 * (h[i - 1] + h[i]);
    sup[r] = h[i];
    rhs[r] = 6.0 * (d[i] - d[i - 1]);
  }
  {
    double ratio = h[0] / h[1];
    diag[0] += h[0] * (1.0 + ratio);
    sup[0] -= h[0] * ratio;
    sub[0] = 0.0;
  }
  {
    double ratio = h[n - 2] / h[n - 3];
    diag[m - 1] += h[n - 2] * (1.0 + ratio);
    sub[m - 1] -= h[n - 2] * ratio;
    sup[m - 1] = 0.0;
  }

  // Thomas algorithm
  for (int r = 1; r < m; ++r) {
    double w = sub[r] / diag[r - 1];
    diag[r] -= w * sup[r - 1];
    rhs[r] -= w * rhs[r - 1];
  }
  std::vector<double> sol(m);
  sol[m - 1] = rhs[m - 1] / diag[m - 1];
  for (int r = m - 2; r >= 0; --r) {
    sol[r] = (rhs[r] - sup[r] * sol[r + 1]) / diag[r];
  }
  for (int i = 1; i <= n - 2; ++i) sigma_[i] = sol[i - 1];
  sigma_[0] = sigma_[1] * (1.0 + h[0] / h[1]) - sigma_[2] * (h[0] / h[1]);
  sigma_[n - 1] =
      sigma_[n - 2] * (1.0 + h[n - 2] / h[n - 3]) - sigma_[n - 3] * (h[n - 2] / h[n - 3]);
}

int CubicSpline::segment(double t) const { return locate(x_, t); }

double CubicSpline::value(double t) const {
  int i = segment(t);
  double hi = x_[i + 1] - x_[i];
  double a = x_[i + 1] - t, b = t - x_[i];
  return sigma_[i] * a * a * a / (6.0 * hi) + sigma_[i + 1] * b * b * b / (6.0 * hi) +
         (y_[i] / hi - sigma_[i] * hi / 6.0) * a + (y_[i + 1] / hi - sigma_[i + 1] * hi / 6.0) * b;
}

double CubicSpline::derivative(double t) const {
  int i = segment(t);
  double hi = x_[i + 1] - x_[i];
  double a = x_[i + 1] - t, b = t - x_[i];
  return -sigma_[i] * a * a / (2.0 * hi) + sigma_[i + 1] * b * b / (2.0 * hi) +
         (y_[i + 1] - y_[i]) / hi - (sigma_[i + 1] - sigma_[i]) * hi / 6.0;
}

PchipInterpolator::PchipInterpolator(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  check_grid(x_, y_, 2);
  const int n = static_cast<int>(x_.size());
  slope_.assign(n, 0.0);
  if (n == 2) {
    slope_[0] = slope_[1] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
    return;
  }

  std::vector<double> h(n - 1), d(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }

  for (int i = 1; i < n - 1; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
      slope_[i] = 0.0;
    } else {
      double w1 = 2.0 * h[i] + h[i - 1];
      double w2 = h[i] + 2.0 * h[i - 1];
      slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }

  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if ((d0 > 0) != (d1 > 0) && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
  };
  slope_[0] = end_slope(h[0], h[1], d[0], d[1]);
  slope_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

int PchipInterpolator::segment(double t) const { return locate(x_, t); }

double PchipInterpolator::value(double t) const {
  int i = segment(t);
  double hi = x_[i + 1] - x_[i];
  double s = (t - x_[i]) / hi;
  double s2 = s * s, s3 = s2 * s;
  double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y_[i] + h10 * hi * slope_[i] + h01 * y_[i + 1] + h11 * hi * slope_[i + 1];
}

double PchipInterpolator::derivative(double t) const {
  int i = segment(t);
  double hi = x_[i + 1] - x_[i];
  double s = (t - x_[i]) / hi;
  double s2 = s * s;
  double dh00 = 6 * s2 - 6 * s, dh10 = 3 * s2 - 4 * s + 1;
  double dh01 = -6 * s2 + 6 * s, dh11 = 3 * s2 - 2 * s;
  return (dh00 * y_[i] + dh01 * y_[i + 1]) / hi + dh10 * slope_[i] + dh11 * slope_[i + 1];
}

}  // namespace lossgeom
