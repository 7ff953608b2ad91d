// Command-line front end: loss analysis, the degree-k counterexample
// experiment, deficiency runs on data files, and truncation comparisons.

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lossgeom/errors.hpp"
#include "lossgeom/experiments.hpp"
#include "lossgeom/expr.hpp"

namespace {

using lossgeom::ExperimentConfig;

// exit codes: 0 success, 1 usage/config error, 2 numeric failure
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

struct Flags {
  std::string config_path;
  std::string loss, loss2, algorithm, pool, data, out;
  int64_t horizon = 0;
  double epsilon = 0.0;
  double eta = 0.0;
  uint64_t seed = 0;
};

void add_common(CLI::App* sub, Flags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file (flags override it)");
  sub->add_option("--loss", flags.loss, "builtin name (log|brier|spherical), DSL text, or @file");
  sub->add_option("--out", flags.out, "output directory (default \".\")");
  sub->add_option("--seed", flags.seed, "seed for randomized sweeps");
}

ExperimentConfig merge(const CLI::App* sub, const Flags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = lossgeom::load_config_file(flags.config_path);
  auto given = [sub](const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--loss")) cfg.loss_spec = flags.loss;
  if (given("--loss2")) cfg.loss2_spec = flags.loss2;
  if (given("--algorithm")) cfg.algorithm_spec = flags.algorithm;
  if (given("--pool")) cfg.pool_spec = flags.pool;
  if (given("--data")) cfg.data_path = flags.data;
  if (given("--horizon")) cfg.horizon = flags.horizon;
  if (given("--eps")) cfg.epsilon = flags.epsilon;
  if (given("--eta")) cfg.eta = flags.eta;
  if (given("--out")) cfg.out_dir = flags.out;
  if (given("--seed")) cfg.seed = flags.seed;
  return cfg;
}

lossgeom::DataSequence load_data(const ExperimentConfig& cfg) {
  if (cfg.data_path.empty()) throw lossgeom::ConfigError("no data file given (--data)");
  lossgeom::DataSequence sigma = lossgeom::read_label_sequence_file(cfg.data_path);
  if (cfg.horizon > 0 && static_cast<size_t>(cfg.horizon) < sigma.size()) {
    sigma.items.resize(static_cast<size_t>(cfg.horizon));
  }
  if (sigma.items.empty()) throw lossgeom::ConfigError("data file is empty");
  return sigma;
}

int cmd_analyze(const ExperimentConfig& cfg) {
  lossgeom::LossFunction lf = lossgeom::resolve_loss(cfg.loss_spec);
  lossgeom::AnalysisReport report = lossgeom::analyze_loss(lf);
  lossgeom::write_analysis_report(report, cfg.out_dir);
  std::cout << "loss " << report.loss_name << ": proper=" << (report.properness.proper ? "yes" : "no")
            << " strict=" << (report.properness.strict ? "yes" : "no") << " degree=";
  if (report.degree.exceeded) {
    std::cout << "> " << report.degree.max_order;
  } else {
    std::cout << report.degree.degree;
  }
  std::cout << " eta=" << lossgeom::format_double(report.eta.value) << " H="
            << (report.fundamentality.unbounded ? "unbounded"
                                                : lossgeom::format_double(report.fundamentality.value))
            << " mixable=" << (report.mixable ? "yes" : "no")
            << " fundamental=" << (report.fundamental ? "yes" : "no") << '\n';
  std::cout << "wrote " << cfg.out_dir << "/analysis.json, curvature.csv\n";
  return kExitOk;
}

int cmd_theorem2(const ExperimentConfig& cfg) {
  lossgeom::LossFunction lf = lossgeom::resolve_loss(cfg.loss_spec);
  int64_t horizon = cfg.horizon > 0 ? cfg.horizon : 1000000;
  lossgeom::Theorem2Report report = lossgeom::run_theorem2(lf, cfg.epsilon, horizon);
  lossgeom::write_theorem2_report(report, cfg.out_dir);
  std::cout << "theorem2 " << report.loss_name << " k=" << report.degree
            << " eps=" << report.epsilon << " T=" << report.horizon << '\n';
  std::cout << "  verdict under " << report.loss_name << ": "
            << (report.verdict_lambda.bounded ? "bounded" : "growing")
            << " (final deficiency " << lossgeom::format_double(report.final_deficiency_lambda)
            << ")\n";
  std::cout << "  verdict under log: " << (report.verdict_log.bounded ? "bounded" : "growing");
  if (report.verdict_log.fit) {
    std::cout << " alpha=" << lossgeom::format_double(report.verdict_log.fit->exponent)
              << " amplitude=" << lossgeom::format_double(report.verdict_log.fit->amplitude)
              << " (predicted " << lossgeom::format_double(report.predicted_exponent) << ", "
              << lossgeom::format_double(report.predicted_amplitude) << ")";
  }
  std::cout << "\nwrote " << cfg.out_dir << "/theorem2_trace.csv, theorem2_report.json\n";
  return kExitOk;
}

int cmd_deficiency(const ExperimentConfig& cfg) {
  lossgeom::LossFunction lf = lossgeom::resolve_loss(cfg.loss_spec);
  lossgeom::PredictionAlgorithm F = lossgeom::resolve_algorithm(cfg.algorithm_spec);
  lossgeom::ExpertPool pool = lossgeom::resolve_pool(cfg.pool_spec);
  lossgeom::DataSequence sigma = load_data(cfg);
  lossgeom::DeficiencyReport report = lossgeom::run_deficiency(F, pool, lf, cfg.eta, sigma);
  lossgeom::write_deficiency_report(report, cfg.out_dir);
  std::cout << "deficiency of " << F.name() << " under " << report.loss_name << " over "
            << sigma.size() << " steps: final "
            << lossgeom::format_double(report.trace.final_value()) << ", verdict "
            << (report.verdict.bounded ? "bounded" : "growing") << '\n';
  std::cout << "wrote " << cfg.out_dir << "/deficiency_trace.csv, verdict.json\n";
  return kExitOk;
}

int cmd_compare(const ExperimentConfig& cfg) {
  lossgeom::LossFunction lf = lossgeom::resolve_loss(cfg.loss_spec);
  if (cfg.loss2_spec.empty()) throw lossgeom::ConfigError("compare-truncated needs --loss2");
  lossgeom::LossFunction lg = lossgeom::resolve_loss(cfg.loss2_spec);
  lossgeom::PredictionAlgorithm F = lossgeom::resolve_algorithm(cfg.algorithm_spec);
  lossgeom::ExpertPool pool = lossgeom::resolve_pool(cfg.pool_spec);
  lossgeom::DataSequence sigma = load_data(cfg);
  lossgeom::CompareTruncatedReport report =
      lossgeom::run_compare_truncated(lf, lg, cfg.epsilon, F, pool, sigma);
  lossgeom::write_compare_report(report, cfg.out_dir);
  std::cout << "equivalence factor(" << report.loss_a << ", " << report.loss_b << ", eps="
            << report.epsilon << ") = " << lossgeom::format_double(report.factor) << '\n';
  std::cout << "  additive constants: " << lossgeom::format_double(report.additive_a) << ", "
            << lossgeom::format_double(report.additive_b) << '\n';
  std::cout << "wrote " << cfg.out_dir << "/compare_report.json and trace CSVs\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric analysis of binary proper losses and pool-relative randomness deficiency"};
  app.require_subcommand(1);

  Flags flags;
  CLI::App* analyze = app.add_subcommand("analyze", "propriety, degree, mixability and fundamentality of a loss");
  add_common(analyze, flags);

  CLI::App* theorem2 = app.add_subcommand(
      "theorem2", "all-zeros run of the power predictor: bounded under the loss, growing under log");
  add_common(theorem2, flags);
  theorem2->add_option("--eps", flags.epsilon, "predictor exponent offset, in (0, 1-1/k)");
  theorem2->add_option("--horizon", flags.horizon, "number of steps (default 1e6)");

  CLI::App* deficiency = app.add_subcommand("deficiency", "pool-relative deficiency of a predictor on a data file");
  add_common(deficiency, flags);
  deficiency->add_option("--algorithm", flags.algorithm, "predictor spec (constant:P | laplace | power:K:EPS | table:PATH)");
  deficiency->add_option("--pool", flags.pool, "';'-separated expert specs, optionally spec@weight");
  deficiency->add_option("--data", flags.data, "label sequence file");
  deficiency->add_option("--eta", flags.eta, "mixture eta (default: mixability constant)");
  deficiency->add_option("--horizon", flags.horizon, "truncate the data to this many steps");

  CLI::App* compare = app.add_subcommand("compare-truncated", "deficiency comparison of two truncated losses");
  add_common(compare, flags);
  compare->add_option("--loss2", flags.loss2, "second loss");
  compare->add_option("--eps", flags.epsilon, "truncation level, in (0, 0.5)");
  compare->add_option("--algorithm", flags.algorithm, "predictor spec");
  compare->add_option("--pool", flags.pool, "expert pool spec");
  compare->add_option("--data", flags.data, "label sequence file");
  compare->add_option("--horizon", flags.horizon, "truncate the data to this many steps");

  CLI::App* selftest = app.add_subcommand("selftest", "run the internal consistency battery");
  (void)selftest;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    ExperimentConfig cfg = merge(sub, flags);
    if (sub == analyze) return cmd_analyze(cfg);
    if (sub == theorem2) return cmd_theorem2(cfg);
    if (sub == deficiency) return cmd_deficiency(cfg);
    if (sub == compare) return cmd_compare(cfg);
    int failures = lossgeom::run_selftest(std::cout);
    if (failures == 0) {
      std::cout << "selftest: all checks passed\n";
      return kExitOk;
    }
    std::cout << "selftest: " << failures << " check(s) failed\n";
    return kExitNumeric;
  } catch (const lossgeom::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const lossgeom::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lossgeom::dsl::ParseError& e) {
    std::cerr << "loss DSL error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lossgeom::LossInvariantError& e) {
    std::cerr << "invalid loss: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
