#pragma once

#include <vector>

#include "lossgeom/loss.hpp"

namespace lossgeom {

// Signed curvature of the log-loss prediction curve (the reference scale
// against which other losses are measured): p(1-p) / (p^2+(1-p)^2)^{3/2}.
double log_curvature(double p);

// Signed curvature of the prediction curve (lambda0(p), lambda1(p)):
//   (l0' l1'' - l1' l0'') / (l0'^2 + l1'^2)^{3/2}
// Requires an interior p with a nonvanishing derivative pair.
double curvature(const LossFunction& lf, double p);

// r(p) = curvature(lf, p) / log_curvature(p).
double curvature_ratio(const LossFunction& lf, double p);

struct EndpointProbe {
  double p = 0.0;
  double value = 0.0;
};

// An infimum or supremum over the open index interval, with diagnostics of
// the behaviour toward the endpoints.
struct BoundEstimate {
  bool unbounded = false;
  double value = 0.0;  // meaningful when !unbounded
  double arg = 0.0;    // p attaining the bound (last probe when unbounded)
  std::vector<EndpointProbe> lo_probes;  // ordered approaching p_lo
  std::vector<EndpointProbe> hi_probes;  // ordered approaching p_hi
};

// inf_p r(p): the largest eta for which the loss is eta-mixable.
BoundEstimate mixability_constant(const LossFunction& lf);

// sup_p r(p): finite exactly for the fundamental (log-like) losses.
BoundEstimate fundamentality_constant(const LossFunction& lf);

// (1-p) * lambda0'(p); equals (-p) * lambda1'(p) for proper losses.
double criterion_function(const LossFunction& lf, double p);

// inf/sup of the criterion function (the second route to the same verdicts:
// fundamental iff the inf is positive, mixable iff the sup is finite).
BoundEstimate criterion_infimum(const LossFunction& lf);
BoundEstimate criterion_supremum(const LossFunction& lf);

struct DegreeResult {
  int degree = 0;         // valid when !exceeded
  bool exceeded = false;  // nothing found up to max_order: report "> max_order"
  int max_order = 0;
  std::vector<double> lambda0_derivatives;  // one-sided at p_lo, orders 1..k
  std::vector<double> lambda1_derivatives;  // one-sided at p_hi
};

// Smallest k <= max_order with lambda0^(k)(lo) != 0 and lambda1^(k)(hi) != 0.
DegreeResult degree(const LossFunction& lf, int max_order);

// Maps the prediction curve through (e^{-eta l0}, e^{-eta l1}) on a dense
// grid and checks concavity of the boundary by chord comparison (at several
// chord widths; a concave curve passes all of them).
bool is_eta_mixable(const LossFunction& lf, double eta, int grid_points = 4097);

// Loss with predictions clamped to [eps, 1-eps] before evaluation; the
// prediction set becomes the restricted arc.
LossFunction truncate(const LossFunction& lf, double eps);

// max(sup k_lf/k_lg, sup k_lg/k_lf) over [eps, 1-eps].
double equivalence_factor(const LossFunction& lf, const LossFunction& lg, double eps);

struct CurvatureProfile {
  std::vector<double> p;
  std::vector<double> curvature;
  std::vector<double> ratio;
};

CurvatureProfile curvature_profile(const LossFunction& lf, int points = 99);

}  // namespace lossgeom
