#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lossgeom/loss.hpp"
#include "lossgeom/prediction.hpp"

namespace lossgeom {

// A finite weighted family of prediction algorithms: the computable
// reference class standing in for the (incomputable) ideal predictor.
struct ExpertPool {
  std::vector<PredictionAlgorithm> experts;
  std::vector<double> weights;
};

// Equal-weight pool helper.
ExpertPool uniform_pool(std::vector<PredictionAlgorithm> experts);

// weights positive and summing to 1 (tolerance 1e-12); throws otherwise.
void validate_pool(const ExpertPool& pool);

// Online aggregating mixture state: L = -(1/eta) ln sum_i w_i e^{-eta L_i},
// maintained in log space so that expert losses of order 1e7 do not
// underflow.  Experts whose loss reaches infinity drop out (weight e^-inf).
class MixtureAccumulator {
 public:
  MixtureAccumulator(std::vector<double> weights, double eta);

  // Mixture totals if the next label were 0 / 1, given each expert's
  // potential losses for this step.
  SuperpredictionPoint preview(std::span<const SuperpredictionPoint> expert_increments) const;

  void commit(std::span<const SuperpredictionPoint> expert_increments, int label);

  double value() const { return value_; }
  const std::vector<double>& expert_losses() const { return expert_loss_; }

 private:
  double mixture_value(std::span<const double> losses) const;

  double eta_;
  std::vector<double> log_weight_;
  std::vector<double> expert_loss_;
  double value_ = 0.0;
};

struct MixtureTrace {
  std::string loss_name;
  double eta = 0.0;
  std::vector<double> values;                    // [0..T], values[0] = 0
  std::vector<SuperpredictionPoint> increments;  // per step (both labels)
  std::vector<double> expert_losses;             // final cumulative per expert

  double final_value() const { return values.back(); }
};

// Aggregating-Algorithm superloss mixture of the pool over sigma.  Requires
// eta <= mixability_constant(lf) + 1e-9 (otherwise the mixture may fail the
// superloss property and the call is rejected up front).
MixtureTrace aa_mixture(const ExpertPool& pool, const LossFunction& lf, double eta,
                        const DataSequence& sigma);

// eta defaulting to the loss's mixability constant.
double default_eta(const LossFunction& lf);

// Pool-relative randomness deficiency samples: D(T) = Loss_F(T) - mixture(T).
struct DeficiencyTrace {
  std::string loss_name;
  std::vector<int64_t> steps;
  std::vector<double> values;

  double final_value() const { return values.back(); }
};

DeficiencyTrace deficiency(const PredictionAlgorithm& F, const ExpertPool& pool,
                           const LossFunction& lf, double eta, const DataSequence& sigma);

struct GrowthFit {
  double exponent = 0.0;   // slope of ln D over ln T
  double amplitude = 0.0;  // exp(intercept)
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;  // RMS residual of the log-log fit
};

enum class FitStatus {
  ok,
  bounded_signal,  // nonpositive deficiencies or no variation in the tail
};

struct GrowthFitResult {
  FitStatus status = FitStatus::bounded_signal;
  GrowthFit fit;
};

// Deficiency variation below this many loss units counts as bounded.
inline constexpr double bounded_deficiency_threshold = 0.5;

// Least-squares line on (ln T, ln D) over the last tail_fraction of steps.
// Needs at least 100 tail samples; signals boundedness instead of fitting
// when the tail is flat or touches zero.
GrowthFitResult fit_growth(const DeficiencyTrace& trace, double tail_fraction);

struct RandomnessVerdict {
  bool bounded = false;
  std::optional<GrowthFit> fit;  // present for growing traces when fittable
};

// bounded iff the deficiency varies by less than the threshold over the
// last half of the trace.
RandomnessVerdict randomness_verdict(const DeficiencyTrace& trace);

}  // namespace lossgeom
