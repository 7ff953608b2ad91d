#include "lossgeom/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lossgeom/errors.hpp"

namespace lossgeom {

namespace {

constexpr int kScanGrid = 4097;
constexpr double kGoldenTolerance = 1e-10;
constexpr double kDivergenceThreshold = 1e8;

using Fn = std::function<double(double)>;

// Golden-section minimization on [a, b]; returns (argmin, min).
std::pair<double, double> golden_min(const Fn& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

// Probes approaching one endpoint at geometrically shrinking distances.
std::vector<EndpointProbe> probe_endpoint(const Fn& f, double endpoint, double width,
                                          int toward, int max_decade) {
  std::vector<EndpointProbe> probes;
  for (int j = 2; j <= max_decade; ++j) {
    double p = endpoint + toward * width * std::pow(10.0, -j);
    double v;
    try {
      v = f(p);
    } catch (const NumericError&) {
      continue;
    }
    if (std::isfinite(v)) probes.push_back({p, v});
  }
  return probes;
}

// A probe sequence diverges when it increases strictly toward the endpoint
// and either crosses the absolute threshold or keeps growing geometrically
// at the deepest trustworthy probes.
bool probes_diverge(const std::vector<EndpointProbe>& probes) {
  if (probes.size() < 3) return false;
  for (size_t i = 1; i < probes.size(); ++i) {
    if (!(probes[i].value > probes[i - 1].value)) return false;
  }
  double last = probes.back().value;
  if (last > kDivergenceThreshold) return true;
  double two_decades_back = probes[probes.size() - 3].value;
  return last > 1e3 && two_decades_back > 0.0 && last / two_decades_back >= 10.0;
}

enum class Extremum { minimum, maximum };

BoundEstimate scan_bound(const Fn& fn, double lo, double hi, Extremum which,
                         int probe_decades) {
  const double width = hi - lo;
  const double sign = (which == Extremum::minimum) ? 1.0 : -1.0;
  auto objective = [&](double p) { return sign * fn(p); };

  double best_p = 0.0, best_v = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= kScanGrid; ++i) {
    double p = lo + width * i / (kScanGrid + 1);
    double v = objective(p);
    if (std::isnan(v)) throw NumericError("bound scan failed at p = " + std::to_string(p));
    if (v < best_v) {
      best_v = v;
      best_p = p;
    }
  }

  const double cell = width / (kScanGrid + 1);
  double a = std::max(lo + width * 1e-12, best_p - cell);
  double b = std::min(hi - width * 1e-12, best_p + cell);
  auto [gp, gv] = golden_min(objective, a, b, kGoldenTolerance);
  if (gv < best_v) {
    best_v = gv;
    best_p = gp;
  }

  BoundEstimate est;
  est.lo_probes = probe_endpoint(fn, lo, width, +1, probe_decades);
  est.hi_probes = probe_endpoint(fn, hi, width, -1, probe_decades);
  est.value = sign * best_v;
  est.arg = best_p;

  if (which == Extremum::maximum) {
    if (probes_diverge(est.lo_probes) || probes_diverge(est.hi_probes)) {
      est.unbounded = true;
      const auto& src =
          probes_diverge(est.lo_probes) ? est.lo_probes : est.hi_probes;
      est.value = src.back().value;
      est.arg = src.back().p;
      return est;
    }
    for (const auto& pr : est.lo_probes) {
      if (pr.value > est.value) {
        est.value = pr.value;
        est.arg = pr.p;
      }
    }
    for (const auto& pr : est.hi_probes) {
      if (pr.value > est.value) {
        est.value = pr.value;
        est.arg = pr.p;
      }
    }
  } else {
    for (const auto& pr : est.lo_probes) {
      if (pr.value < est.value) {
        est.value = pr.value;
        est.arg = pr.p;
      }
    }
    for (const auto& pr : est.hi_probes) {
      if (pr.value < est.value) {
        est.value = pr.value;
        est.arg = pr.p;
      }
    }
  }
  return est;
}

int probe_depth(const LossFunction& lf) {
  // Differenced derivatives drown in rounding noise past ~1e-6 of the edge.
  return lf.has_closed_derivatives() ? 12 : 6;
}

}  // namespace

double log_curvature(double p) {
  double u = p * p + (1.0 - p) * (1.0 - p);
  return p * (1.0 - p) / (u * std::sqrt(u));
}

double curvature(const LossFunction& lf, double p) {
  if (!(p > lf.p_lo() && p < lf.p_hi())) {
    throw std::invalid_argument("curvature requires an interior point");
  }
  double d01 = lf.derivative(0, 1, p), d11 = lf.derivative(1, 1, p);
  double d02 = lf.derivative(0, 2, p), d12 = lf.derivative(1, 2, p);
  double speed2 = d01 * d01 + d11 * d11;
  if (!(speed2 > 0.0) || !std::isfinite(speed2) || !std::isfinite(d02) ||
      !std::isfinite(d12)) {
    throw NumericError("vanishing or non-finite derivative pair at p = " +
                       std::to_string(p));
  }
  return (d01 * d12 - d11 * d02) / (speed2 * std::sqrt(speed2));
}

double curvature_ratio(const LossFunction& lf, double p) {
  return curvature(lf, p) / log_curvature(p);
}

BoundEstimate mixability_constant(const LossFunction& lf) {
  auto fn = [&lf](double p) { return curvature_ratio(lf, p); };
  return scan_bound(fn, lf.p_lo(), lf.p_hi(), Extremum::minimum, probe_depth(lf));
}

BoundEstimate fundamentality_constant(const LossFunction& lf) {
  auto fn = [&lf](double p) { return curvature_ratio(lf, p); };
  return scan_bound(fn, lf.p_lo(), lf.p_hi(), Extremum::maximum, probe_depth(lf));
}

double criterion_function(const LossFunction& lf, double p) {
  if (!(p > lf.p_lo() && p < lf.p_hi())) {
    throw std::invalid_argument("criterion function requires an interior point");
  }
  double d = lf.derivative(0, 1, p);
  if (!std::isfinite(d)) throw NumericError("derivative failure at p = " + std::to_string(p));
  return (1.0 - p) * d;
}

BoundEstimate criterion_infimum(const LossFunction& lf) {
  auto fn = [&lf](double p) { return criterion_function(lf, p); };
  return scan_bound(fn, lf.p_lo(), lf.p_hi(), Extremum::minimum, probe_depth(lf));
}

BoundEstimate criterion_supremum(const LossFunction& lf) {
  auto fn = [&lf](double p) { return criterion_function(lf, p); };
  return scan_bound(fn, lf.p_lo(), lf.p_hi(), Extremum::maximum, probe_depth(lf));
}

DegreeResult degree(const LossFunction& lf, int max_order) {
  if (max_order < 1 || max_order > 6) {
    throw std::invalid_argument("degree max_order must be 1..6");
  }
  DegreeResult result;
  result.max_order = max_order;
  const bool closed = lf.has_closed_derivatives();
  double scale0 = 1.0, scale1 = 1.0;
  for (int k = 1; k <= max_order; ++k) {
    double d0 = lf.derivative(0, k, lf.p_lo());
    double d1 = lf.derivative(1, k, lf.p_hi());
    result.lambda0_derivatives.push_back(d0);
    result.lambda1_derivatives.push_back(d1);
    scale0 = std::max(scale0, std::abs(d0));
    scale1 = std::max(scale1, std::abs(d1));
    double tol0 = closed ? 1e-7 : 1e-3 * scale0;
    double tol1 = closed ? 1e-7 : 1e-3 * scale1;
    if (std::abs(d0) > tol0 && std::abs(d1) > tol1) {
      result.degree = k;
      return result;
    }
  }
  result.exceeded = true;
  return result;
}

bool is_eta_mixable(const LossFunction& lf, double eta, int grid_points) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const int n = std::max(grid_points, 16);
  const double lo = lf.p_lo(), hi = lf.p_hi();
  std::vector<double> u(n), v(n);
  for (int i = 0; i < n; ++i) {
    double p = lo + (hi - lo) * i / (n - 1);
    u[i] = std::exp(-eta * lf.lambda0(p));
    v[i] = std::exp(-eta * lf.lambda1(p));
  }
  // u decreases along the curve.  Concavity of the upper boundary: every
  // point sits on or above every chord through its neighbours; checking a
  // few dyadic chord widths makes shallow convex dents detectable.
  const double tol = 1e-10;
  for (int span = 1; span < n / 2; span *= 4) {
    for (int i = span; i + span < n; ++i) {
      double ul = u[i - span], ur = u[i + span];
      if (ul == ur) continue;
      double w = (u[i] - ul) / (ur - ul);
      double chord = v[i - span] + w * (v[i + span] - v[i - span]);
      if (v[i] < chord - tol) return false;
    }
  }
  return true;
}

LossFunction truncate(const LossFunction& lf, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must be in (0, 0.5)");
  const double lo = eps, hi = 1.0 - eps;
  auto clamp = [lo, hi](double p) { return std::clamp(p, lo, hi); };
  LossBundle b;
  b.name = lf.name() + "@" + std::to_string(eps);
  b.lambda0 = [lf, clamp](double p) { return lf.lambda0(clamp(p)); };
  b.lambda1 = [lf, clamp](double p) { return lf.lambda1(clamp(p)); };
  b.derivative = [lf, clamp](int branch, int order, double p) {
    return lf.derivative(branch, order, clamp(p));
  };
  b.p_lo = lo;
  b.p_hi = hi;
  return LossFunction(std::move(b));
}

double equivalence_factor(const LossFunction& lf, const LossFunction& lg, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must be in (0, 0.5)");
  const double lo = std::max({eps, lf.p_lo(), lg.p_lo()});
  const double hi = std::min({1.0 - eps, lf.p_hi(), lg.p_hi()});
  if (!(lo < hi)) throw std::invalid_argument("empty comparison interval");

  auto ratio = [&](double p) {
    double ka = curvature(lf, p), kb = curvature(lg, p);
    if (ka <= 0.0 || kb <= 0.0) {
      throw NumericError("nonpositive curvature at p = " + std::to_string(p));
    }
    return std::max(ka / kb, kb / ka);
  };

  // closed interval: include the ends (clamped evaluation handles truncated
  // losses whose domain edge coincides with eps)
  double best = 0.0, best_p = lo;
  const int n = kScanGrid;
  for (int i = 0; i <= n + 1; ++i) {
    double p = lo + (hi - lo) * i / (n + 1);
    p = std::clamp(p, std::nextafter(lf.p_lo(), 1.0), std::nextafter(lf.p_hi(), 0.0));
    p = std::clamp(p, std::nextafter(lg.p_lo(), 1.0), std::nextafter(lg.p_hi(), 0.0));
    double v = ratio(p);
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  const double cell = (hi - lo) / (n + 1);
  double a = std::max(lo + (hi - lo) * 1e-12, best_p - cell);
  double b = std::min(hi - (hi - lo) * 1e-12, best_p + cell);
  auto [gp, gv] = golden_min([&](double p) { return -ratio(p); }, a, b, kGoldenTolerance);
  (void)gp;
  return std::max(best, -gv);
}

CurvatureProfile curvature_profile(const LossFunction& lf, int points) {
  CurvatureProfile prof;
  const double lo = lf.p_lo(), hi = lf.p_hi();
  for (int i = 1; i <= points; ++i) {
    double p = lo + (hi - lo) * i / (points + 1);
    prof.p.push_back(p);
    prof.curvature.push_back(curvature(lf, p));
    prof.ratio.push_back(prof.curvature.back() / log_curvature(p));
  }
  return prof;
}

}  // namespace lossgeom
