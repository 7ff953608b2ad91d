#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lossgeom/loss.hpp"

namespace lossgeom {

struct Observation {
  int32_t object = 0;
  int32_t label = 0;  // 0 or 1
  auto operator<=>(const Observation&) const = default;
};

// An (object, label) stream over a finite object space {0, ..., space-1}.
struct DataSequence {
  std::vector<Observation> items;
  int32_t object_space = 1;

  size_t size() const { return items.size(); }
};

DataSequence all_zeros_sequence(size_t length);
DataSequence sequence_from_labels(const std::vector<int>& labels);

// Reads "label" or "object,label" lines; '#' starts a comment, blank lines
// are skipped.  Throws ConfigError with the offending line number.
DataSequence read_label_sequence(std::istream& in);
DataSequence read_label_sequence_file(const std::string& path);

void write_label_sequence(std::ostream& out, const DataSequence& sigma);

// A deterministic prediction strategy: given the history prefix and the next
// object, produce the probability that its label is 1.
class PredictionAlgorithm {
 public:
  using PredictFn = std::function<double(std::span<const Observation>, int32_t)>;

  PredictionAlgorithm(std::string name, PredictFn fn);

  double predict(std::span<const Observation> history, int32_t next_object) const;
  const std::string& name() const { return impl_->name; }

 private:
  struct Impl {
    std::string name;
    PredictFn fn;
  };
  std::shared_ptr<const Impl> impl_;
};

PredictionAlgorithm constant_predictor(double p);

// Laplace rule: (ones + 1) / (t + 1) at step t, i.e. (ones + 1)/(|history| + 2).
PredictionAlgorithm laplace_predictor();

// p_t = (t+1)^(-1/k - eps) at step t = 1, 2, ...; strictly decreasing, in (0,1).
PredictionAlgorithm power_predictor(int k, double eps);

// Plays probabilities[t] at step t; repeats the last entry past the end.
PredictionAlgorithm table_predictor(std::vector<double> probabilities);
PredictionAlgorithm table_predictor_from_file(const std::string& path);

// Wraps a predictor, clamping its output to [eps, 1-eps].
PredictionAlgorithm clamped_predictor(PredictionAlgorithm base, double eps);

// A pair of extended-real losses: a if the outcome is 0, b if it is 1.
struct SuperpredictionPoint {
  double a = 0.0;
  double b = 0.0;
};

struct LossTrace {
  std::string loss_name;
  std::vector<double> cumulative;                // [0..T], cumulative[0] = 0
  std::vector<double> predictions;               // per step
  std::vector<SuperpredictionPoint> increments;  // per step: both potential losses

  double final_loss() const { return cumulative.back(); }
};

// Cumulative loss of F on sigma under lf, with infinity + a = infinity.
LossTrace cumulative_loss(const PredictionAlgorithm& F, const DataSequence& sigma,
                          const LossFunction& lf);

// True iff some p has lambda0(p) <= a and lambda1(p) <= b (within 1e-9),
// located by bisection over the monotone branch lambda0.
bool is_superprediction(const LossFunction& lf, SuperpredictionPoint pt);

// The affine map from the proof of the deficiency inequality: an
// eta-mixable-loss superprediction (a, b) observed at prediction p becomes
// the log-loss superprediction
//   (eta a - ln(1-p) - eta lambda0(p), eta b - ln p - eta lambda1(p)).
SuperpredictionPoint thm1_transform(const LossFunction& lf, double eta, double p,
                                    SuperpredictionPoint pt);

// Product over steps of the probability F assigned to the realized label.
double induced_measure(const PredictionAlgorithm& F, const DataSequence& sigma);

// A process defined on a prefix-closed tree of sequences.  Children of a
// node come in (object, 0)/(object, 1) sibling pairs.
class ProcessTree {
 public:
  void set(std::vector<Observation> node, double value);
  std::optional<double> value(const std::vector<Observation>& node) const;
  const std::map<std::vector<Observation>, double>& nodes() const { return values_; }

 private:
  std::map<std::vector<Observation>, double> values_;
};

struct SuperlossViolation {
  std::vector<Observation> node;
  int32_t object = 0;
  SuperpredictionPoint increment;
};

struct SuperlossCheck {
  bool ok = false;
  std::optional<SuperlossViolation> violation;
};

// Checks that every increment pair of the process is a superprediction
// under lf.  Throws if the tree is not prefix-closed or a label sibling is
// missing.
SuperlossCheck verify_superloss(const ProcessTree& process, const LossFunction& lf);

// Expands a realized trace into a process tree carrying, at every step, the
// values for both potential labels.
ProcessTree to_process_tree(const LossTrace& trace, const DataSequence& sigma);

}  // namespace lossgeom
