#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace lossgeom {

inline constexpr double infinite_loss = std::numeric_limits<double>::infinity();

// Evaluators and metadata backing a LossFunction.  lambda0 is the loss when
// the outcome is 0, lambda1 when it is 1; both take the prediction p.
// `derivative(branch, order, p)` may be empty, in which case derivatives are
// computed by finite differences of the evaluators (one-sided at the edges
// of [p_lo, p_hi]).
struct LossBundle {
  std::string name;
  std::function<double(double)> lambda0;
  std::function<double(double)> lambda1;
  std::function<double(int, int, double)> derivative;
  double p_lo = 0.0;
  double p_hi = 1.0;
};

// A binary loss function identified with the pair (lambda0, lambda1).
// Immutable; cheap to copy and safe to share across threads.
class LossFunction {
 public:
  explicit LossFunction(LossBundle bundle);

  const std::string& name() const { return impl_->name; }

  // Index interval the loss is defined on ([0,1] unless truncated).
  double p_lo() const { return impl_->p_lo; }
  double p_hi() const { return impl_->p_hi; }

  double lambda0(double p) const { return impl_->lambda0(p); }
  double lambda1(double p) const { return impl_->lambda1(p); }

  // lambda_y(p); +infinity is a value, not an error.
  double loss(double p, int y) const;

  // k-th derivative of the branch at p, one-sided at the domain edges.
  double derivative(int branch, int order, double p) const;

  // True when derivatives come from closed forms rather than differencing;
  // closed forms stay trustworthy arbitrarily close to the endpoints.
  bool has_closed_derivatives() const { return static_cast<bool>(impl_->derivative); }

 private:
  std::shared_ptr<const LossBundle> impl_;
};

LossFunction log_loss();
LossFunction brier_loss();
LossFunction spherical_loss();

// Builtin lookup by name ("log", "brier", "spherical"); nullopt if unknown.
std::optional<LossFunction> builtin_loss(std::string_view name);

// p * lambda1(q) + (1-p) * lambda0(q), with the 0 * inf = 0 convention.
double expected_loss(const LossFunction& lf, double p, double q);

struct PropernessWitness {
  double p = 0.0;
  double q = 0.0;
  double margin = 0.0;  // expected_loss(p,p) - expected_loss(p,q)
};

struct PropernessReport {
  bool proper = false;
  bool strict = false;
  std::optional<PropernessWitness> witness;
  int grid_size = 0;
};

// Grid search over interior (p, q) pairs: proper iff q = p minimizes the
// expected loss within tolerance for every grid p; strict iff every other q
// loses by more than the tolerance.
PropernessReport check_proper(const LossFunction& lf, int grid_size);

inline constexpr double properness_tolerance = 1e-9;

// lambda1'(p)/lambda0'(p) - (p-1)/p; near zero for smooth proper losses.
double slope_identity_residual(const LossFunction& lf, double p);

struct InvariantViolation {
  std::string invariant;
  double witness_p = 0.0;
  std::string message;
};

class LossInvariantError : public std::runtime_error {
 public:
  explicit LossInvariantError(InvariantViolation v);
  const InvariantViolation& violation() const { return violation_; }

 private:
  InvariantViolation violation_;
};

// Checks the LossFunction invariants on a sampling grid: finiteness on the
// interior, monotone branches, lambda0(lo) = lambda1(hi) = 0, nonnegativity.
std::optional<InvariantViolation> validate_loss(const LossFunction& lf,
                                                int grid_points = 1001);

// Builds a loss from DSL text ("lambda0 = ...; lambda1 = ...").  Derivatives
// are numeric.  Throws dsl::ParseError on syntax errors and
// LossInvariantError when the parsed loss violates the invariants.
LossFunction parse_loss(std::string_view text);

}  // namespace lossgeom
