#include "lossgeom/reparameterize.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "lossgeom/interp.hpp"

namespace lossgeom {

namespace {

constexpr int kDenseSamples = 2001;

struct Tables {
  PchipInterpolator lambda0, lambda1;
  double p_lo, p_hi;
};

}  // namespace

LossFunction reparameterize(const std::vector<CurvePoint>& curve) {
  const size_t n = curve.size();
  if (n < 3) throw std::invalid_argument("reparameterize: need at least 3 curve points");

  // Exp space: u = e^-x decreasing, v = e^-y increasing; infinities map to 0.
  std::vector<double> u(n), v(n);
  for (size_t i = 0; i < n; ++i) {
    if (std::isnan(curve[i].x) || std::isnan(curve[i].y) || curve[i].x < 0 || curve[i].y < 0) {
      throw std::invalid_argument("reparameterize: losses must be nonnegative");
    }
    u[i] = std::exp(-curve[i].x);
    v[i] = std::exp(-curve[i].y);
  }
  for (size_t i = 1; i < n; ++i) {
    if (!(u[i] < u[i - 1]) || !(v[i] > v[i - 1])) {
      throw std::invalid_argument("reparameterize: curve is not strictly monotone");
    }
  }

  // Parametric spline over cumulative chord length (robust to very uneven
  // sampling, e.g. curves recorded against a distorted index).
  std::vector<double> t(n, 0.0);
  for (size_t i = 1; i < n; ++i) {
    t[i] = t[i - 1] + std::hypot(u[i] - u[i - 1], v[i] - v[i - 1]);
  }
  CubicSpline su(t, u), sv(std::move(t), v);

  std::vector<double> pd, xd, yd;
  pd.reserve(kDenseSamples);
  xd.reserve(kDenseSamples);
  yd.reserve(kDenseSamples);
  double prev_p = -1.0;
  size_t rejected = 0;
  for (int i = 0; i < kDenseSamples; ++i) {
    double ti = su.front() + (su.back() - su.front()) * i / (kDenseSamples - 1);
    double ui = su.value(ti), vi = sv.value(ti);
    double du = su.derivative(ti), dv = sv.derivative(ti);
    // tangent slope of the original curve: s = (u dv) / (v du); the proper
    // index p = 1/(1-s) rewritten without intermediate infinities:
    double denom = vi * du - ui * dv;
    if (!(denom < 0.0)) {
      throw std::invalid_argument("reparameterize: nonnegative tangent slope encountered");
    }
    double p = vi * du / denom;
    double x = -std::log(ui), y = -std::log(vi);
    if (!std::isfinite(x) || !std::isfinite(y)) continue;  // exact curve endpoints
    if (p <= prev_p + 1e-14) {
      ++rejected;
      continue;
    }
    prev_p = p;
    pd.push_back(p);
    xd.push_back(x);
    yd.push_back(y);
  }
  if (rejected > kDenseSamples / 20 || pd.size() < 16) {
    throw std::invalid_argument("reparameterize: recovered index is not monotone");
  }

  auto tables = std::make_shared<const Tables>(Tables{
      PchipInterpolator(pd, xd), PchipInterpolator(pd, yd), pd.front(), pd.back()});

  LossBundle b;
  b.name = "reparameterized";
  b.p_lo = tables->p_lo;
  b.p_hi = tables->p_hi;
  b.lambda0 = [tables](double p) {
    return tables->lambda0.value(std::clamp(p, tables->p_lo, tables->p_hi));
  };
  b.lambda1 = [tables](double p) {
    return tables->lambda1.value(std::clamp(p, tables->p_lo, tables->p_hi));
  };
  // first derivatives straight from the interpolant; higher orders fall back
  // to differencing the evaluators
  b.derivative = [tables](int branch, int order, double p) {
    if (order != 1) return std::numeric_limits<double>::quiet_NaN();
    double pc = std::clamp(p, tables->p_lo, tables->p_hi);
    return branch == 0 ? tables->lambda0.derivative(pc) : tables->lambda1.derivative(pc);
  };
  return LossFunction(std::move(b));
}

}  // namespace lossgeom
