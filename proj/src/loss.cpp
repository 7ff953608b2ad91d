#include "lossgeom/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lossgeom/errors.hpp"
#include "lossgeom/expr.hpp"
#include "lossgeom/numdiff.hpp"

namespace lossgeom {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// log loss: lambda0 = -ln(1-p), lambda1 = -ln p
double log_derivative(int branch, int order, double p) {
  double f = factorial(order - 1);
  if (branch == 0) return f / std::pow(1.0 - p, order);
  double sign = (order % 2 == 0) ? 1.0 : -1.0;
  return sign * f / std::pow(p, order);
}

double brier_derivative(int branch, int order, double p) {
  if (order == 1) return branch == 0 ? 2.0 * p : -2.0 * (1.0 - p);
  if (order == 2) return 2.0;
  return 0.0;
}

// spherical loss: lambda0 = 1 - (1-p)/sqrt(u), lambda1 = 1 - p/sqrt(u),
// u = p^2 + (1-p)^2.  Closed forms to order 4; numeric beyond.
double spherical_derivative(int branch, int order, double p) {
  const double u = p * p + (1.0 - p) * (1.0 - p);
  const double ru = std::sqrt(u);
  const double q = 2.0 * p - 1.0;
  const double u32 = u * ru, u52 = u * u * ru, u72 = u * u * u * ru,
               u92 = u * u * u * u * ru;
  if (branch == 0) {
    switch (order) {
      case 1:
        return p / u32;
      case 2:
        return (-4.0 * p * p + p + 1.0) / u52;
      case 3:
        return 3.0 * (5.0 * (1.0 - p) * q * q * q + 3.0 * q * (4.0 * p - 3.0) * u - 2.0 * u * u) / u72;
      case 4:
        return 3.0 *
               (35.0 * (p - 1.0) * q * q * q * q - 20.0 * q * q * (5.0 * p - 4.0) * u +
                12.0 * (5.0 * p - 3.0) * u * u) /
               u92;
    }
  } else {
    switch (order) {
      case 1:
        return (p - 1.0) / u32;
      case 2:
        return (-4.0 * p * p + 7.0 * p - 2.0) / u52;
      case 3:
        return 3.0 * (5.0 * p * q * q * q - 3.0 * q * (4.0 * p - 1.0) * u + 2.0 * u * u) / u72;
      case 4:
        return 3.0 *
               (-35.0 * p * q * q * q * q + 12.0 * (2.0 - 5.0 * p) * u * u +
                20.0 * q * q * (5.0 * p - 1.0) * u) /
               u92;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();  // order > 4: numeric fallback
}

void check_probability(double p, double lo, double hi) {
  if (!(p >= lo && p <= hi)) {
    throw std::invalid_argument("prediction outside [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  }
}

}  // namespace

LossFunction::LossFunction(LossBundle bundle)
    : impl_(std::make_shared<const LossBundle>(std::move(bundle))) {
  if (!impl_->lambda0 || !impl_->lambda1) {
    throw std::invalid_argument("loss function requires both branch evaluators");
  }
  if (!(impl_->p_lo >= 0.0 && impl_->p_hi <= 1.0 && impl_->p_lo < impl_->p_hi)) {
    throw std::invalid_argument("invalid loss index interval");
  }
}

double LossFunction::loss(double p, int y) const {
  check_probability(p, 0.0, 1.0);
  if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
  return y == 0 ? lambda0(p) : lambda1(p);
}

double LossFunction::derivative(int branch, int order, double p) const {
  if (branch != 0 && branch != 1) throw std::invalid_argument("branch must be 0 or 1");
  if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
  check_probability(p, impl_->p_lo, impl_->p_hi);
  if (impl_->derivative) {
    double d = impl_->derivative(branch, order, p);
    if (!std::isnan(d)) return d;
    // fall through to numeric when the closed form does not cover this order
  }
  const auto& fn = branch == 0 ? impl_->lambda0 : impl_->lambda1;
  return interval_derivative(fn, p, order, impl_->p_lo, impl_->p_hi);
}

LossFunction log_loss() {
  LossBundle b;
  b.name = "log";
  b.lambda0 = [](double p) { return -std::log1p(-p); };
  b.lambda1 = [](double p) { return -std::log(p); };
  b.derivative = log_derivative;
  return LossFunction(std::move(b));
}

LossFunction brier_loss() {
  LossBundle b;
  b.name = "brier";
  b.lambda0 = [](double p) { return p * p; };
  b.lambda1 = [](double p) { return (1.0 - p) * (1.0 - p); };
  b.derivative = brier_derivative;
  return LossFunction(std::move(b));
}

LossFunction spherical_loss() {
  LossBundle b;
  b.name = "spherical";
  // cancellation-free forms: 1 - (1-p)/sqrt(u) = p^2 / (sqrt(u)(sqrt(u)+1-p))
  b.lambda0 = [](double p) {
    double u = p * p + (1.0 - p) * (1.0 - p);
    double ru = std::sqrt(u);
    return p * p / (ru * (ru + 1.0 - p));
  };
  b.lambda1 = [](double p) {
    double u = p * p + (1.0 - p) * (1.0 - p);
    double ru = std::sqrt(u);
    return (1.0 - p) * (1.0 - p) / (ru * (ru + p));
  };
  b.derivative = spherical_derivative;
  return LossFunction(std::move(b));
}

std::optional<LossFunction> builtin_loss(std::string_view name) {
  if (name == "log") return log_loss();
  if (name == "brier") return brier_loss();
  if (name == "spherical") return spherical_loss();
  return std::nullopt;
}

double expected_loss(const LossFunction& lf, double p, double q) {
  check_probability(p, 0.0, 1.0);
  double t1 = (p == 0.0) ? 0.0 : p * lf.lambda1(q);
  double t0 = (p == 1.0) ? 0.0 : (1.0 - p) * lf.lambda0(q);
  return t1 + t0;
}

PropernessReport check_proper(const LossFunction& lf, int grid_size) {
  if (grid_size < 3) throw std::invalid_argument("grid_size must be >= 3");
  PropernessReport report;
  report.grid_size = grid_size;
  report.proper = true;
  report.strict = true;

  const int n = grid_size;
  std::vector<double> grid(n), l0(n), l1(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i + 1) / (n + 1);
    l0[i] = lf.lambda0(grid[i]);
    l1[i] = lf.lambda1(grid[i]);
  }

  for (int ip = 0; ip < n; ++ip) {
    const double p = grid[ip];
    const double base = p * l1[ip] + (1.0 - p) * l0[ip];
    for (int iq = 0; iq < n; ++iq) {
      if (iq == ip) continue;
      const double e = p * l1[iq] + (1.0 - p) * l0[iq];
      if (!(e >= base - properness_tolerance)) {
        report.proper = false;
        report.strict = false;
        report.witness = PropernessWitness{p, grid[iq], base - e};
        return report;
      }
      if (report.strict && !(e > base + properness_tolerance)) {
        report.strict = false;
        report.witness = PropernessWitness{p, grid[iq], base - e};
      }
    }
  }
  if (report.proper && report.strict) report.witness.reset();
  return report;
}

double slope_identity_residual(const LossFunction& lf, double p) {
  if (!(p > lf.p_lo() && p < lf.p_hi())) {
    throw std::invalid_argument("slope identity requires an interior point");
  }
  double d0 = lf.derivative(0, 1, p);
  double d1 = lf.derivative(1, 1, p);
  if (d0 == 0.0 || !std::isfinite(d0) || !std::isfinite(d1)) {
    throw NumericError("derivative evaluation failed in slope identity");
  }
  return d1 / d0 - (p - 1.0) / p;
}

LossInvariantError::LossInvariantError(InvariantViolation v)
    : std::runtime_error("loss invariant violated: " + v.invariant + " at p = " +
                         std::to_string(v.witness_p) + " (" + v.message + ")"),
      violation_(std::move(v)) {}

std::optional<InvariantViolation> validate_loss(const LossFunction& lf, int grid_points) {
  const int n = std::max(grid_points, 3);
  const double lo = lf.p_lo(), hi = lf.p_hi();
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * i / (n - 1);

  std::vector<double> v0(n), v1(n);
  for (int i = 0; i < n; ++i) {
    v0[i] = lf.lambda0(grid[i]);
    v1[i] = lf.lambda1(grid[i]);
    bool interior = i > 0 && i < n - 1;
    if (std::isnan(v0[i]) || (interior && !std::isfinite(v0[i]))) {
      return InvariantViolation{"lambda0_finite", grid[i], "lambda0 not finite"};
    }
    if (std::isnan(v1[i]) || (interior && !std::isfinite(v1[i]))) {
      return InvariantViolation{"lambda1_finite", grid[i], "lambda1 not finite"};
    }
  }

  const double tol = 1e-9;
  for (int i = 1; i < n; ++i) {
    if (v0[i] < v0[i - 1] - tol) {
      return InvariantViolation{"lambda0_nondecreasing", grid[i], "lambda0 decreases"};
    }
    if (v1[i] > v1[i - 1] + tol) {
      return InvariantViolation{"lambda1_nonincreasing", grid[i], "lambda1 increases"};
    }
  }
  if (!(std::abs(v0.front()) <= tol)) {
    return InvariantViolation{"lambda0_zero_at_lo", lo, "lambda0 does not vanish at the left edge"};
  }
  if (!(std::abs(v1.back()) <= tol)) {
    return InvariantViolation{"lambda1_zero_at_hi", hi, "lambda1 does not vanish at the right edge"};
  }
  for (int i = 0; i < n; ++i) {
    if (v0[i] < -tol || v1[i] < -tol) {
      return InvariantViolation{"nonnegative", grid[i], "negative loss value"};
    }
  }
  return std::nullopt;
}

LossFunction parse_loss(std::string_view text) {
  dsl::LossSpec spec = dsl::parse_loss_spec(text);
  LossBundle b;
  b.name = "custom";
  b.lambda0 = [ast = spec.lambda0](double p) { return dsl::eval(*ast, p); };
  b.lambda1 = [ast = spec.lambda1](double p) { return dsl::eval(*ast, p); };
  LossFunction lf(std::move(b));
  if (auto violation = validate_loss(lf)) throw LossInvariantError(*violation);
  return lf;
}

}  // namespace lossgeom
