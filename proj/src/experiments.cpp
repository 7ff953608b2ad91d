#include "lossgeom/experiments.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lossgeom/errors.hpp"

namespace lossgeom {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kVerdictThreshold = 1e-6;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::ofstream open_output(const std::string& out_dir, const std::string& file) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path path = std::filesystem::path(out_dir) / file;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

// numbers that may be infinite are emitted as strings JSON cannot hold
ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

ordered_json bound_to_json(const BoundEstimate& b) {
  if (b.unbounded) return "unbounded";
  return b.value;
}

ordered_json verdict_to_json(const RandomnessVerdict& v) {
  ordered_json j;
  j["verdict"] = v.bounded ? "bounded" : "growing";
  if (v.fit) {
    j["fit"] = {{"exponent", v.fit->exponent},
                {"amplitude", v.fit->amplitude},
                {"t_lo", v.fit->t_lo},
                {"t_hi", v.fit->t_hi},
                {"residual", v.fit->residual}};
  }
  return j;
}

// steps recorded in memory (dense enough for tail fits) and steps written to
// disk (coarser): everything up to 1000, then geometric
struct StepThinner {
  explicit StepThinner(double factor) : factor_(factor) {}
  bool want(int64_t t) {
    if (t <= 1000) return true;
    if (t >= next_) {
      while (next_ <= t) next_ = std::max(next_ + 1, static_cast<int64_t>(next_ * factor_));
      return true;
    }
    return false;
  }
  double factor_;
  int64_t next_ = 1001;
};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad number '" + text + "'");
  }
  return v;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "experiment") {
        cfg.experiment = value.get<std::string>();
      } else if (key == "loss") {
        cfg.loss_spec = value.get<std::string>();
      } else if (key == "loss2") {
        cfg.loss2_spec = value.get<std::string>();
      } else if (key == "algorithm") {
        if (value.is_string()) {
          cfg.algorithm_spec = value.get<std::string>();
        } else if (value.is_object()) {
          std::string name = value.at("name").get<std::string>();
          if (name == "constant") {
            cfg.algorithm_spec = "constant:" + format_double(value.at("p").get<double>());
          } else if (name == "laplace") {
            cfg.algorithm_spec = "laplace";
          } else if (name == "power") {
            cfg.algorithm_spec = "power:" + std::to_string(value.at("k").get<int>()) + ":" +
                                 format_double(value.at("eps").get<double>());
          } else if (name == "table") {
            cfg.algorithm_spec = "table:" + value.at("path").get<std::string>();
          } else {
            throw ConfigError("unknown algorithm name '" + name + "'");
          }
        } else {
          throw ConfigError("algorithm must be a string or object");
        }
      } else if (key == "pool") {
        if (value.is_string()) {
          cfg.pool_spec = value.get<std::string>();
        } else if (value.is_array()) {
          std::string spec;
          for (const auto& entry : value) {
            if (!spec.empty()) spec += ';';
            if (entry.is_string()) {
              spec += entry.get<std::string>();
            } else {
              spec += entry.at("algorithm").get<std::string>();
              if (entry.contains("weight")) {
                spec += "@" + format_double(entry.at("weight").get<double>());
              }
            }
          }
          cfg.pool_spec = spec;
        } else {
          throw ConfigError("pool must be a string or array");
        }
      } else if (key == "data") {
        cfg.data_path = value.get<std::string>();
      } else if (key == "horizon") {
        cfg.horizon = value.get<int64_t>();
      } else if (key == "epsilon") {
        cfg.epsilon = value.get<double>();
      } else if (key == "eta") {
        cfg.eta = value.get<double>();
      } else if (key == "output") {
        cfg.out_dir = value.get<std::string>();
      } else if (key == "seed") {
        cfg.seed = value.get<uint64_t>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  return cfg;
}

LossFunction resolve_loss(const std::string& spec) {
  if (spec.empty()) throw ConfigError("no loss specified");
  if (spec[0] == '@') {
    std::ifstream in(spec.substr(1));
    if (!in) throw ConfigError("cannot open loss file '" + spec.substr(1) + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_loss(buffer.str());
  }
  if (auto builtin = builtin_loss(spec)) return *builtin;
  return parse_loss(spec);
}

PredictionAlgorithm resolve_algorithm(const std::string& spec) {
  std::vector<std::string> parts = split(trim(spec), ':');
  const std::string& kind = parts[0];
  try {
    if (kind == "constant" && parts.size() == 2) {
      return constant_predictor(parse_double(parts[1]));
    }
    if (kind == "laplace" && parts.size() == 1) return laplace_predictor();
    if (kind == "power" && parts.size() == 3) {
      return power_predictor(std::stoi(parts[1]), parse_double(parts[2]));
    }
    if (kind == "table" && parts.size() == 2) return table_predictor_from_file(parts[1]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("algorithm '" + spec + "': " + e.what());
  }
  throw ConfigError("bad algorithm spec '" + spec + "' (want constant:P | laplace | power:K:EPS | table:PATH)");
}

ExpertPool resolve_pool(const std::string& spec) {
  if (trim(spec).empty()) throw ConfigError("no pool specified");
  ExpertPool pool;
  std::vector<std::optional<double>> weights;
  for (const std::string& raw : split(spec, ';')) {
    std::string entry = trim(raw);
    if (entry.empty()) throw ConfigError("empty pool entry");
    size_t at = entry.rfind('@');
    std::optional<double> weight;
    if (at != std::string::npos) {
      weight = parse_double(entry.substr(at + 1));
      entry = trim(entry.substr(0, at));
    }
    pool.experts.push_back(resolve_algorithm(entry));
    weights.push_back(weight);
  }
  bool any = false, all = true;
  for (const auto& w : weights) {
    any = any || w.has_value();
    all = all && w.has_value();
  }
  if (any && !all) throw ConfigError("give weights for all pool entries or none");
  if (!any) {
    pool.weights.assign(pool.experts.size(), 1.0 / static_cast<double>(pool.experts.size()));
  } else {
    for (const auto& w : weights) pool.weights.push_back(*w);
  }
  try {
    validate_pool(pool);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("pool: ") + e.what());
  }
  return pool;
}

AnalysisReport analyze_loss(const LossFunction& lf) {
  AnalysisReport r;
  r.loss_name = lf.name();
  r.properness = check_proper(lf, 101);
  r.degree = degree(lf, 6);
  r.eta = mixability_constant(lf);
  r.fundamentality = fundamentality_constant(lf);
  r.criterion_inf = criterion_infimum(lf);
  r.criterion_sup = criterion_supremum(lf);
  r.mixable = r.eta.value > kVerdictThreshold;
  r.fundamental = !r.fundamentality.unbounded;

  // second route through the criterion function must agree
  bool mixable_b = !r.criterion_sup.unbounded;
  bool fundamental_b = r.criterion_inf.value > kVerdictThreshold;
  if (r.mixable != mixable_b || r.fundamental != fundamental_b) {
    throw NumericError("curvature-ratio and criterion-function routes disagree for '" +
                       lf.name() + "'");
  }
  if (r.fundamental && !r.mixable) {
    throw NumericError("inconsistent verdicts: fundamental but not mixable");
  }
  r.profile = curvature_profile(lf, 99);
  return r;
}

void write_analysis_report(const AnalysisReport& report, const std::string& out_dir) {
  ordered_json j;
  j["loss"] = report.loss_name;
  j["proper"] = report.properness.proper;
  j["strict"] = report.properness.strict;
  if (report.degree.exceeded) {
    j["degree"] = "> " + std::to_string(report.degree.max_order);
  } else {
    j["degree"] = report.degree.degree;
  }
  j["eta"] = report.eta.value;
  j["eta_argmin"] = report.eta.arg;
  j["H"] = bound_to_json(report.fundamentality);
  j["H_argmax"] = report.fundamentality.arg;
  j["criterion_inf"] = report.criterion_inf.value;
  j["criterion_sup"] = bound_to_json(report.criterion_sup);
  j["mixable"] = report.mixable;
  j["fundamental"] = report.fundamental;

  auto jf = open_output(out_dir, "analysis.json");
  jf << j.dump(2) << '\n';

  auto cf = open_output(out_dir, "curvature.csv");
  cf << "p,curvature,ratio\n";
  for (size_t i = 0; i < report.profile.p.size(); ++i) {
    cf << format_double(report.profile.p[i]) << ',' << format_double(report.profile.curvature[i])
       << ',' << format_double(report.profile.ratio[i]) << '\n';
  }
}

Theorem2Report run_theorem2(const LossFunction& lf, double epsilon, int64_t horizon) {
  DegreeResult deg = degree(lf, 6);
  if (deg.exceeded || deg.degree < 2) {
    throw ConfigError("theorem2 needs a loss of degree k >= 2 (detected " +
                      (deg.exceeded ? "> " + std::to_string(deg.max_order)
                                    : std::to_string(deg.degree)) +
                      ")");
  }
  const int k = deg.degree;
  if (!(epsilon > 0.0 && epsilon < 1.0 - 1.0 / k)) {
    throw ConfigError("epsilon must lie in (0, 1 - 1/k) = (0, " +
                      format_double(1.0 - 1.0 / k) + ")");
  }
  if (horizon < 1) throw ConfigError("horizon must be >= 1");

  Theorem2Report report;
  report.loss_name = lf.name();
  report.degree = k;
  report.epsilon = epsilon;
  report.horizon = horizon;
  report.predicted_exponent = 1.0 - 1.0 / k - epsilon;
  report.predicted_amplitude = static_cast<double>(k) / (k - 1 - k * epsilon);

  const LossFunction log_lf = log_loss();
  const double eta_lambda = default_eta(lf);
  const double eta_log = default_eta(log_lf);
  report.eta = eta_lambda;

  // pool = {constant 0}; on the all-zero sequence its increments never vary
  MixtureAccumulator mix_lambda({1.0}, eta_lambda);
  MixtureAccumulator mix_log({1.0}, eta_log);
  const SuperpredictionPoint inc_lambda{lf.lambda0(0.0), lf.lambda1(0.0)};
  const SuperpredictionPoint inc_log{log_lf.lambda0(0.0), log_lf.lambda1(0.0)};

  const double exponent = -(1.0 / k + epsilon);
  double loss_lambda = 0.0, loss_log = 0.0;
  double thm1_c = 0.0;

  report.trace_lambda.loss_name = lf.name();
  report.trace_log.loss_name = log_lf.name();
  auto record = [&](int64_t t) {
    double d_lambda = loss_lambda - mix_lambda.value();
    double d_log = loss_log - mix_log.value();
    report.trace_lambda.steps.push_back(t);
    report.trace_lambda.values.push_back(d_lambda);
    report.trace_log.steps.push_back(t);
    report.trace_log.values.push_back(d_log);
    report.loss_lambda_samples.push_back(loss_lambda);
    report.loss_log_samples.push_back(loss_log);
    thm1_c = std::max(thm1_c, eta_lambda * d_lambda - d_log);
  };

  StepThinner memory_thinner(1.002);
  record(0);
  for (int64_t t = 1; t <= horizon; ++t) {
    const double p = std::pow(static_cast<double>(t) + 1.0, exponent);
    loss_lambda += lf.lambda0(p);
    loss_log += -std::log1p(-p);
    mix_lambda.commit({&inc_lambda, 1}, 0);
    mix_log.commit({&inc_log, 1}, 0);
    if (memory_thinner.want(t) || t == horizon) record(t);
  }

  report.final_loss_lambda = loss_lambda;
  report.final_loss_log = loss_log;
  report.final_deficiency_lambda = report.trace_lambda.values.back();
  report.final_deficiency_log = report.trace_log.values.back();
  report.thm1_constant = thm1_c;
  report.verdict_lambda = randomness_verdict(report.trace_lambda);
  report.verdict_log = randomness_verdict(report.trace_log);
  return report;
}

void write_theorem2_report(const Theorem2Report& report, const std::string& out_dir) {
  // the in-memory traces are denser than the file needs; re-thin on emission
  auto csv = open_output(out_dir, "theorem2_trace.csv");
  csv << "T,loss_lambda,loss_log,deficiency_lambda,deficiency_log\n";
  StepThinner file_thinner(1.01);
  const auto& tl = report.trace_lambda;
  const auto& tg = report.trace_log;
  for (size_t i = 0; i < tl.steps.size(); ++i) {
    int64_t t = tl.steps[i];
    if (!file_thinner.want(t) && t != report.horizon) continue;
    csv << t << ',' << format_double(report.loss_lambda_samples[i]) << ','
        << format_double(report.loss_log_samples[i]) << ',' << format_double(tl.values[i]) << ','
        << format_double(tg.values[i]) << '\n';
  }

  ordered_json j;
  j["loss"] = report.loss_name;
  j["degree"] = report.degree;
  j["epsilon"] = report.epsilon;
  j["horizon"] = report.horizon;
  j["eta"] = report.eta;
  j["predicted_exponent"] = report.predicted_exponent;
  j["predicted_amplitude"] = report.predicted_amplitude;
  j["lambda"] = verdict_to_json(report.verdict_lambda);
  j["log"] = verdict_to_json(report.verdict_log);
  j["final_loss_lambda"] = json_number(report.final_loss_lambda);
  j["final_loss_log"] = json_number(report.final_loss_log);
  j["final_deficiency_lambda"] = json_number(report.final_deficiency_lambda);
  j["final_deficiency_log"] = json_number(report.final_deficiency_log);
  j["thm1_constant"] = report.thm1_constant;
  auto jf = open_output(out_dir, "theorem2_report.json");
  jf << j.dump(2) << '\n';
}

DeficiencyReport run_deficiency(const PredictionAlgorithm& F, const ExpertPool& pool,
                                const LossFunction& lf, std::optional<double> eta,
                                const DataSequence& sigma) {
  DeficiencyReport report;
  report.loss_name = lf.name();
  report.eta = eta.value_or(default_eta(lf));
  report.loss = cumulative_loss(F, sigma, lf);
  report.mixture = aa_mixture(pool, lf, report.eta, sigma);
  report.trace.loss_name = lf.name();
  report.trace.steps.resize(sigma.size() + 1);
  report.trace.values.resize(sigma.size() + 1);
  for (size_t t = 0; t <= sigma.size(); ++t) {
    report.trace.steps[t] = static_cast<int64_t>(t);
    report.trace.values[t] = report.loss.cumulative[t] - report.mixture.values[t];
  }
  report.verdict = randomness_verdict(report.trace);
  return report;
}

void write_deficiency_report(const DeficiencyReport& report, const std::string& out_dir) {
  auto csv = open_output(out_dir, "deficiency_trace.csv");
  csv << "T,loss_F,mixture_loss,deficiency\n";
  StepThinner thinner(1.01);
  const int64_t last = report.trace.steps.back();
  for (size_t i = 0; i < report.trace.steps.size(); ++i) {
    int64_t t = report.trace.steps[i];
    if (!thinner.want(t) && t != last) continue;
    csv << t << ',' << format_double(report.loss.cumulative[i]) << ','
        << format_double(report.mixture.values[i]) << ',' << format_double(report.trace.values[i])
        << '\n';
  }

  ordered_json j;
  j["loss"] = report.loss_name;
  j["eta"] = report.eta;
  j["steps"] = report.trace.steps.back();
  j["final_loss"] = json_number(report.loss.final_loss());
  j["final_mixture"] = json_number(report.mixture.final_value());
  j["final_deficiency"] = json_number(report.trace.final_value());
  j.update(verdict_to_json(report.verdict));
  auto jf = open_output(out_dir, "verdict.json");
  jf << j.dump(2) << '\n';
}

CompareTruncatedReport run_compare_truncated(const LossFunction& lf, const LossFunction& lg,
                                             double eps, const PredictionAlgorithm& F,
                                             const ExpertPool& pool, const DataSequence& sigma) {
  CompareTruncatedReport report;
  report.loss_a = lf.name();
  report.loss_b = lg.name();
  report.epsilon = eps;
  report.factor = equivalence_factor(lf, lg, eps);

  LossFunction lt = truncate(lf, eps), gt = truncate(lg, eps);
  PredictionAlgorithm clamped = clamped_predictor(F, eps);
  report.eta_a = default_eta(lt);
  report.eta_b = default_eta(gt);
  report.trace_a = deficiency(clamped, pool, lt, report.eta_a, sigma);
  report.trace_b = deficiency(clamped, pool, gt, report.eta_b, sigma);

  double ca = 0.0, cb = 0.0, ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < report.trace_a.values.size(); ++i) {
    double da = report.trace_a.values[i], db = report.trace_b.values[i];
    ca = std::max(ca, da - report.factor * db);
    cb = std::max(cb, db - report.factor * da);
    ma = std::max(ma, da);
    mb = std::max(mb, db);
  }
  report.additive_a = ca;
  report.additive_b = cb;
  report.max_deficiency_a = ma;
  report.max_deficiency_b = mb;
  return report;
}

void write_compare_report(const CompareTruncatedReport& report, const std::string& out_dir) {
  ordered_json j;
  j["loss_a"] = report.loss_a;
  j["loss_b"] = report.loss_b;
  j["epsilon"] = report.epsilon;
  j["factor"] = report.factor;
  j["eta_a"] = report.eta_a;
  j["eta_b"] = report.eta_b;
  j["additive_a"] = report.additive_a;
  j["additive_b"] = report.additive_b;
  j["max_deficiency_a"] = json_number(report.max_deficiency_a);
  j["max_deficiency_b"] = json_number(report.max_deficiency_b);
  auto jf = open_output(out_dir, "compare_report.json");
  jf << j.dump(2) << '\n';

  auto write_trace = [&](const DeficiencyTrace& trace, const std::string& file) {
    auto csv = open_output(out_dir, file);
    csv << "T,deficiency\n";
    StepThinner thinner(1.01);
    const int64_t last = trace.steps.back();
    for (size_t i = 0; i < trace.steps.size(); ++i) {
      if (!thinner.want(trace.steps[i]) && trace.steps[i] != last) continue;
      csv << trace.steps[i] << ',' << format_double(trace.values[i]) << '\n';
    }
  };
  write_trace(report.trace_a, "compare_trace_a.csv");
  write_trace(report.trace_b, "compare_trace_b.csv");
}

int run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    out << (ok ? "PASS " : "FAIL ") << what << '\n';
    if (!ok) ++failures;
  };

  {
    AnalysisReport log_report = analyze_loss(log_loss());
    check(log_report.degree.degree == 1 && std::abs(log_report.eta.value - 1.0) < 1e-6 &&
              !log_report.fundamentality.unbounded &&
              std::abs(log_report.fundamentality.value - 1.0) < 1e-6 && log_report.fundamental,
          "analyze(log): degree 1, eta = H = 1, fundamental");
    AnalysisReport brier_report = analyze_loss(brier_loss());
    check(brier_report.degree.degree == 2 && std::abs(brier_report.eta.value - 2.0) < 1e-4 &&
              brier_report.fundamentality.unbounded && !brier_report.fundamental &&
              brier_report.mixable,
          "analyze(brier): degree 2, eta = 2, H unbounded");
    AnalysisReport spher_report = analyze_loss(spherical_loss());
    check(spher_report.degree.degree == 2 &&
              std::abs(spher_report.eta.value - std::sqrt(2.0)) < 1e-4 &&
              spher_report.fundamentality.unbounded && !spher_report.fundamental,
          "analyze(spherical): degree 2, eta = sqrt(2), H unbounded");
  }

  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.2, 0.8);
    bool ok = true;
    for (int rep = 0; rep < 20 && ok; ++rep) {
      PredictionAlgorithm F =
          rep % 2 == 0 ? constant_predictor(unif(rng)) : laplace_predictor();
      std::vector<int> labels(60);
      for (auto& y : labels) y = rng() % 2;
      DataSequence sigma = sequence_from_labels(labels);
      double measure = induced_measure(F, sigma);
      double loss = cumulative_loss(F, sigma, log_loss()).final_loss();
      ok = std::abs(-std::log(measure) - loss) <= 1e-9;
    }
    check(ok, "identity: -ln induced_measure = cumulative log loss");
  }

  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    bool ok = true;
    for (const LossFunction& lf : {log_loss(), brier_loss(), spherical_loss()}) {
      double eta = default_eta(lf);
      for (int rep = 0; rep < 5 && ok; ++rep) {
        ExpertPool pool = uniform_pool({constant_predictor(unif(rng)), laplace_predictor()});
        std::vector<int> labels(100);
        for (auto& y : labels) y = rng() % 2;
        DataSequence sigma = sequence_from_labels(labels);
        MixtureTrace mixture = aa_mixture(pool, lf, eta, sigma);
        LossTrace as_trace;
        as_trace.loss_name = mixture.loss_name;
        as_trace.cumulative = mixture.values;
        as_trace.increments = mixture.increments;
        as_trace.predictions.assign(sigma.size(), 0.0);
        ok = verify_superloss(to_process_tree(as_trace, sigma), lf).ok;
      }
    }
    check(ok, "mixtures are superloss processes at eta = eta_lambda");
  }

  {
    LossFunction parsed = parse_loss("lambda0 = p^2; lambda1 = (1-p)^2");
    bool ok = true;
    for (double p : {0.2, 0.5, 0.8}) {
      ok = ok && std::abs(curvature(parsed, p) - curvature(brier_loss(), p)) < 1e-4;
    }
    check(ok, "DSL brier curvature matches builtin");
  }

  {
    Theorem2Report t2 = run_theorem2(brier_loss(), 0.1, 20000);
    check(t2.verdict_lambda.bounded && !t2.verdict_log.bounded,
          "theorem2(brier, 0.1): bounded under brier, growing under log");
  }

  return failures;
}

}  // namespace lossgeom
