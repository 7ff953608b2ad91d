#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lossgeom/complexity.hpp"
#include "lossgeom/geometry.hpp"

namespace lossgeom {

// One CLI invocation's worth of settings.  Loadable from a JSON config file
// (keys: experiment, loss, loss2, algorithm, pool, data, horizon, epsilon,
// eta, output, seed); inline flags override file values.
struct ExperimentConfig {
  std::string experiment;
  std::string loss_spec;
  std::string loss2_spec;
  std::string algorithm_spec;
  std::string pool_spec;
  std::string data_path;
  int64_t horizon = 0;
  double epsilon = 0.0;
  std::optional<double> eta;
  std::string out_dir = ".";
  uint64_t seed = 1;
};

ExperimentConfig load_config_file(const std::string& path);

// builtin name | "@file" with DSL text | inline DSL text
LossFunction resolve_loss(const std::string& spec);

// "constant:P" | "laplace" | "power:K:EPS" | "table:PATH"
PredictionAlgorithm resolve_algorithm(const std::string& spec);

// ';'-separated algorithm specs, each optionally "spec@weight"; weights must
// either all be given (summing to 1) or all omitted (uniform).
ExpertPool resolve_pool(const std::string& spec);

// Shortest decimal that re-parses to the same double; "inf"/"-inf"/"nan".
std::string format_double(double v);
double parse_double(const std::string& text);

struct AnalysisReport {
  std::string loss_name;
  PropernessReport properness;
  DegreeResult degree;
  BoundEstimate eta;
  BoundEstimate fundamentality;
  BoundEstimate criterion_inf;
  BoundEstimate criterion_sup;
  bool mixable = false;
  bool fundamental = false;
  CurvatureProfile profile;
};

// Runs the full geometric analysis.  The curvature-ratio route and the
// criterion-function route must agree on both verdicts; disagreement is a
// numeric failure.
AnalysisReport analyze_loss(const LossFunction& lf);

// Writes analysis.json and curvature.csv under out_dir.
void write_analysis_report(const AnalysisReport& report, const std::string& out_dir);

struct Theorem2Report {
  std::string loss_name;
  int degree = 0;
  double epsilon = 0.0;
  int64_t horizon = 0;
  double eta = 0.0;
  double predicted_exponent = 0.0;   // 1 - 1/k - eps
  double predicted_amplitude = 0.0;  // k / (k - 1 - k eps)
  RandomnessVerdict verdict_lambda;
  RandomnessVerdict verdict_log;
  double final_loss_lambda = 0.0;
  double final_loss_log = 0.0;
  double final_deficiency_lambda = 0.0;
  double final_deficiency_log = 0.0;
  double thm1_constant = 0.0;  // max_T (eta D_lambda - D_log), clamped at 0
  DeficiencyTrace trace_lambda;
  DeficiencyTrace trace_log;
  std::vector<double> loss_lambda_samples;  // cumulative losses at the trace steps
  std::vector<double> loss_log_samples;
};

// The degree-k counterexample run: all-zero labels, F = power_predictor
// (k from the loss's degree), pool = {constant 0}, judged under the loss
// itself and under log loss.
Theorem2Report run_theorem2(const LossFunction& lf, double epsilon, int64_t horizon);

// Writes theorem2_trace.csv (T,loss_lambda,loss_log,deficiency_lambda,
// deficiency_log) and theorem2_report.json under out_dir.
void write_theorem2_report(const Theorem2Report& report, const std::string& out_dir);

struct DeficiencyReport {
  std::string loss_name;
  double eta = 0.0;
  LossTrace loss;
  MixtureTrace mixture;
  DeficiencyTrace trace;
  RandomnessVerdict verdict;
};

DeficiencyReport run_deficiency(const PredictionAlgorithm& F, const ExpertPool& pool,
                                const LossFunction& lf, std::optional<double> eta,
                                const DataSequence& sigma);

// Writes deficiency_trace.csv (T,loss_F,mixture_loss,deficiency) and
// verdict.json under out_dir.
void write_deficiency_report(const DeficiencyReport& report, const std::string& out_dir);

struct CompareTruncatedReport {
  std::string loss_a, loss_b;
  double epsilon = 0.0;
  double factor = 0.0;  // equivalence factor over [eps, 1-eps]
  double eta_a = 0.0, eta_b = 0.0;
  double additive_a = 0.0;  // max_T (D_a - factor D_b), clamped at 0
  double additive_b = 0.0;  // max_T (D_b - factor D_a), clamped at 0
  double max_deficiency_a = 0.0, max_deficiency_b = 0.0;
  DeficiencyTrace trace_a, trace_b;
};

// Clamps the predictor to [eps, 1-eps], truncates both losses, and compares
// the two deficiency traces against the equivalence factor.
CompareTruncatedReport run_compare_truncated(const LossFunction& lf, const LossFunction& lg,
                                             double eps, const PredictionAlgorithm& F,
                                             const ExpertPool& pool, const DataSequence& sigma);

void write_compare_report(const CompareTruncatedReport& report, const std::string& out_dir);

// Quick internal consistency battery; prints one line per check and returns
// the number of failures.
int run_selftest(std::ostream& out);

}  // namespace lossgeom
