#include "lossgeom/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lossgeom/errors.hpp"
#include "lossgeom/geometry.hpp"

namespace lossgeom {

ExpertPool uniform_pool(std::vector<PredictionAlgorithm> experts) {
  ExpertPool pool;
  pool.weights.assign(experts.size(), 1.0 / static_cast<double>(experts.size()));
  pool.experts = std::move(experts);
  return pool;
}

void validate_pool(const ExpertPool& pool) {
  if (pool.experts.empty()) throw std::invalid_argument("expert pool is empty");
  if (pool.experts.size() != pool.weights.size()) {
    throw std::invalid_argument("pool weights do not match experts");
  }
  double sum = 0.0;
  for (double w : pool.weights) {
    if (!(w > 0.0)) throw std::invalid_argument("pool weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("pool weights must sum to 1");
  }
}

MixtureAccumulator::MixtureAccumulator(std::vector<double> weights, double eta)
    : eta_(eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  log_weight_.reserve(weights.size());
  for (double w : weights) log_weight_.push_back(std::log(w));
  expert_loss_.assign(weights.size(), 0.0);
}

double MixtureAccumulator::mixture_value(std::span<const double> losses) const {
  // max-shifted log-sum-exp of log w_i - eta * L_i
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < losses.size(); ++i) {
    double s = log_weight_[i] - eta_ * losses[i];
    best = std::max(best, s);
  }
  if (best == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();  // every expert is infinite
  }
  double acc = 0.0;
  for (size_t i = 0; i < losses.size(); ++i) {
    double s = log_weight_[i] - eta_ * losses[i];
    if (s != -std::numeric_limits<double>::infinity()) acc += std::exp(s - best);
  }
  return -(best + std::log(acc)) / eta_;
}

SuperpredictionPoint MixtureAccumulator::preview(
    std::span<const SuperpredictionPoint> expert_increments) const {
  const size_t n = expert_loss_.size();
  if (expert_increments.size() != n) {
    throw std::invalid_argument("increment count does not match pool size");
  }
  std::vector<double> next(n);
  for (size_t i = 0; i < n; ++i) next[i] = expert_loss_[i] + expert_increments[i].a;
  double if0 = mixture_value(next);
  for (size_t i = 0; i < n; ++i) next[i] = expert_loss_[i] + expert_increments[i].b;
  double if1 = mixture_value(next);
  return {if0, if1};
}

void MixtureAccumulator::commit(std::span<const SuperpredictionPoint> expert_increments,
                                int label) {
  const size_t n = expert_loss_.size();
  if (expert_increments.size() != n) {
    throw std::invalid_argument("increment count does not match pool size");
  }
  for (size_t i = 0; i < n; ++i) {
    expert_loss_[i] += label == 0 ? expert_increments[i].a : expert_increments[i].b;
  }
  value_ = mixture_value(expert_loss_);
}

MixtureTrace aa_mixture(const ExpertPool& pool, const LossFunction& lf, double eta,
                        const DataSequence& sigma) {
  validate_pool(pool);
  double eta_max = mixability_constant(lf).value;
  if (!(eta <= eta_max + 1e-9)) {
    throw NumericError("eta = " + std::to_string(eta) + " exceeds the mixability constant " +
                       std::to_string(eta_max) + " of " + lf.name());
  }

  MixtureTrace trace;
  trace.loss_name = lf.name();
  trace.eta = eta;
  const size_t T = sigma.size();
  trace.values.reserve(T + 1);
  trace.increments.reserve(T);
  trace.values.push_back(0.0);

  MixtureAccumulator acc(pool.weights, eta);
  std::vector<SuperpredictionPoint> inc(pool.experts.size());
  std::span<const Observation> items(sigma.items);
  for (size_t t = 0; t < T; ++t) {
    for (size_t i = 0; i < pool.experts.size(); ++i) {
      double p = pool.experts[i].predict(items.first(t), sigma.items[t].object);
      inc[i] = {lf.lambda0(p), lf.lambda1(p)};
    }
    SuperpredictionPoint next = acc.preview(inc);
    double prev = trace.values.back();
    trace.increments.push_back({next.a - prev, next.b - prev});
    acc.commit(inc, sigma.items[t].label);
    trace.values.push_back(acc.value());
  }
  trace.expert_losses = acc.expert_losses();
  return trace;
}

double default_eta(const LossFunction& lf) { return mixability_constant(lf).value; }

DeficiencyTrace deficiency(const PredictionAlgorithm& F, const ExpertPool& pool,
                           const LossFunction& lf, double eta, const DataSequence& sigma) {
  LossTrace loss = cumulative_loss(F, sigma, lf);
  MixtureTrace mixture = aa_mixture(pool, lf, eta, sigma);
  DeficiencyTrace trace;
  trace.loss_name = lf.name();
  trace.steps.resize(sigma.size() + 1);
  std::iota(trace.steps.begin(), trace.steps.end(), int64_t{0});
  trace.values.resize(sigma.size() + 1);
  for (size_t t = 0; t < trace.values.size(); ++t) {
    trace.values[t] = loss.cumulative[t] - mixture.values[t];
  }
  return trace;
}

GrowthFitResult fit_growth(const DeficiencyTrace& trace, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("tail_fraction must be in (0, 1]");
  }
  if (trace.steps.size() != trace.values.size() || trace.steps.empty()) {
    throw std::invalid_argument("malformed deficiency trace");
  }
  const double t_max = static_cast<double>(trace.steps.back());
  const double cutoff = t_max * (1.0 - tail_fraction);

  std::vector<double> ts, ds;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    if (trace.steps[i] < 1) continue;
    if (static_cast<double>(trace.steps[i]) <= cutoff) continue;
    ts.push_back(static_cast<double>(trace.steps[i]));
    ds.push_back(trace.values[i]);
  }
  if (ts.size() < 100) {
    throw std::invalid_argument("growth fit needs at least 100 tail samples");
  }

  double lo = ds[0], hi = ds[0];
  bool nonpositive = false;
  for (double d : ds) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    if (!(d > 0.0)) nonpositive = true;
  }
  if (nonpositive || hi - lo < bounded_deficiency_threshold) {
    return {FitStatus::bounded_signal, {}};
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    double x = std::log(ts[i]), y = std::log(ds[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    double r = std::log(ds[i]) - (slope * std::log(ts[i]) + intercept);
    ss += r * r;
  }

  GrowthFitResult result;
  result.status = FitStatus::ok;
  result.fit.exponent = slope;
  result.fit.amplitude = std::exp(intercept);
  result.fit.t_lo = ts.front();
  result.fit.t_hi = ts.back();
  result.fit.residual = std::sqrt(ss / n);
  return result;
}

RandomnessVerdict randomness_verdict(const DeficiencyTrace& trace) {
  if (trace.steps.empty() || trace.steps.size() != trace.values.size()) {
    throw std::invalid_argument("malformed deficiency trace");
  }
  const double t_max = static_cast<double>(trace.steps.back());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    if (static_cast<double>(trace.steps[i]) < 0.5 * t_max) continue;
    lo = std::min(lo, trace.values[i]);
    hi = std::max(hi, trace.values[i]);
  }
  RandomnessVerdict verdict;
  if (hi - lo < bounded_deficiency_threshold) {
    verdict.bounded = true;
    return verdict;
  }
  verdict.bounded = false;
  try {
    GrowthFitResult fit = fit_growth(trace, 0.5);
    if (fit.status == FitStatus::ok) {
      verdict.fit = fit.fit;
    } else {
      verdict.bounded = true;  // flat or nonpositive tail after all
    }
  } catch (const std::invalid_argument&) {
    // too few samples to fit; verdict stands without an exponent
  }
  return verdict;
}

}  // namespace lossgeom
