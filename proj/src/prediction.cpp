#include "lossgeom/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lossgeom/errors.hpp"

namespace lossgeom {

namespace {

constexpr double kLossTolerance = 1e-9;
constexpr double kBisectTolerance = 1e-12;

int parse_int_field(const std::string& field, size_t line_no, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
  }
}

}  // namespace

DataSequence all_zeros_sequence(size_t length) {
  DataSequence s;
  s.items.assign(length, Observation{0, 0});
  return s;
}

DataSequence sequence_from_labels(const std::vector<int>& labels) {
  DataSequence s;
  s.items.reserve(labels.size());
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
    s.items.push_back({0, y});
  }
  return s;
}

DataSequence read_label_sequence(std::istream& in) {
  DataSequence s;
  std::string line;
  size_t line_no = 0;
  int32_t max_object = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    if (line[begin] == '#') continue;
    size_t end = line.find_last_not_of(" \t\r");
    std::string body = line.substr(begin, end - begin + 1);

    Observation obs;
    size_t comma = body.find(',');
    if (comma == std::string::npos) {
      obs.label = parse_int_field(body, line_no, "label");
    } else {
      obs.object = parse_int_field(body.substr(0, comma), line_no, "object");
      obs.label = parse_int_field(body.substr(comma + 1), line_no, "label");
    }
    if (obs.label != 0 && obs.label != 1) {
      throw ConfigError("line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    if (obs.object < 0) {
      throw ConfigError("line " + std::to_string(line_no) + ": object must be >= 0");
    }
    max_object = std::max(max_object, obs.object);
    s.items.push_back(obs);
  }
  s.object_space = max_object + 1;
  return s;
}

DataSequence read_label_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  return read_label_sequence(in);
}

void write_label_sequence(std::ostream& out, const DataSequence& sigma) {
  for (const auto& obs : sigma.items) {
    if (obs.object == 0) {
      out << obs.label << '\n';
    } else {
      out << obs.object << ',' << obs.label << '\n';
    }
  }
}

PredictionAlgorithm::PredictionAlgorithm(std::string name, PredictFn fn)
    : impl_(std::make_shared<const Impl>(Impl{std::move(name), std::move(fn)})) {
  if (!impl_->fn) throw std::invalid_argument("prediction algorithm requires a predict function");
}

double PredictionAlgorithm::predict(std::span<const Observation> history,
                                    int32_t next_object) const {
  double p = impl_->fn(history, next_object);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw NumericError("algorithm '" + impl_->name + "' predicted outside [0,1]");
  }
  return p;
}

PredictionAlgorithm constant_predictor(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("constant prediction outside [0,1]");
  std::ostringstream name;
  name << "constant(" << p << ")";
  return {name.str(), [p](std::span<const Observation>, int32_t) { return p; }};
}

PredictionAlgorithm laplace_predictor() {
  return {"laplace", [](std::span<const Observation> history, int32_t) {
            size_t ones = 0;
            for (const auto& obs : history) ones += obs.label;
            return (static_cast<double>(ones) + 1.0) / (static_cast<double>(history.size()) + 2.0);
          }};
}

PredictionAlgorithm power_predictor(int k, double eps) {
  if (k < 1) throw std::invalid_argument("power predictor needs k >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("power predictor needs eps > 0");
  std::ostringstream name;
  name << "power(" << k << "," << eps << ")";
  const double exponent = -(1.0 / k + eps);
  return {name.str(), [exponent](std::span<const Observation> history, int32_t) {
            // step t = history length + 1; shifted base avoids p_1 = 1
            return std::pow(static_cast<double>(history.size()) + 2.0, exponent);
          }};
}

PredictionAlgorithm table_predictor(std::vector<double> probabilities) {
  if (probabilities.empty()) throw std::invalid_argument("table predictor needs entries");
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("table entry outside [0,1]");
  }
  auto table = std::make_shared<const std::vector<double>>(std::move(probabilities));
  return {"table[" + std::to_string(table->size()) + "]",
          [table](std::span<const Observation> history, int32_t) {
            size_t t = std::min(history.size(), table->size() - 1);
            return (*table)[t];
          }};
}

PredictionAlgorithm table_predictor_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file '" + path + "'");
  std::vector<double> probs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    try {
      probs.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ConfigError("line " + std::to_string(line_no) + ": bad probability '" + line + "'");
    }
  }
  if (probs.empty()) throw ConfigError("table file '" + path + "' has no entries");
  return table_predictor(std::move(probs));
}

PredictionAlgorithm clamped_predictor(PredictionAlgorithm base, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must be in (0, 0.5)");
  std::string name = base.name() + "@" + std::to_string(eps);
  return {std::move(name), [base, eps](std::span<const Observation> history, int32_t x) {
            return std::clamp(base.predict(history, x), eps, 1.0 - eps);
          }};
}

LossTrace cumulative_loss(const PredictionAlgorithm& F, const DataSequence& sigma,
                          const LossFunction& lf) {
  LossTrace trace;
  trace.loss_name = lf.name();
  const size_t T = sigma.size();
  trace.cumulative.reserve(T + 1);
  trace.predictions.reserve(T);
  trace.increments.reserve(T);
  trace.cumulative.push_back(0.0);
  std::span<const Observation> items(sigma.items);
  for (size_t t = 0; t < T; ++t) {
    double p = F.predict(items.first(t), sigma.items[t].object);
    double l0 = lf.lambda0(p), l1 = lf.lambda1(p);
    trace.predictions.push_back(p);
    trace.increments.push_back({l0, l1});
    double step = sigma.items[t].label == 0 ? l0 : l1;
    trace.cumulative.push_back(trace.cumulative.back() + step);
  }
  return trace;
}

bool is_superprediction(const LossFunction& lf, SuperpredictionPoint pt) {
  if (std::isnan(pt.a) || std::isnan(pt.b)) return false;
  const double a = pt.a + kLossTolerance;
  const double b = pt.b + kLossTolerance;
  double lo = lf.p_lo(), hi = lf.p_hi();
  if (lf.lambda0(lo) > a) return false;
  double p_star = hi;
  if (lf.lambda0(hi) > a) {
    // invariant: lambda0(lo) <= a < lambda0(hi)
    while (hi - lo > kBisectTolerance) {
      double mid = 0.5 * (lo + hi);
      if (lf.lambda0(mid) <= a) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    p_star = lo;
  }
  return lf.lambda1(p_star) <= b;
}

SuperpredictionPoint thm1_transform(const LossFunction& lf, double eta, double p,
                                    SuperpredictionPoint pt) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("thm1_transform requires p in (0,1)");
  }
  return {eta * pt.a - std::log1p(-p) - eta * lf.lambda0(p),
          eta * pt.b - std::log(p) - eta * lf.lambda1(p)};
}

double induced_measure(const PredictionAlgorithm& F, const DataSequence& sigma) {
  double product = 1.0;
  std::span<const Observation> items(sigma.items);
  for (size_t t = 0; t < sigma.size(); ++t) {
    double p = F.predict(items.first(t), sigma.items[t].object);
    product *= sigma.items[t].label == 1 ? p : 1.0 - p;
  }
  return product;
}

void ProcessTree::set(std::vector<Observation> node, double value) {
  values_[std::move(node)] = value;
}

std::optional<double> ProcessTree::value(const std::vector<Observation>& node) const {
  auto it = values_.find(node);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

SuperlossCheck verify_superloss(const ProcessTree& process, const LossFunction& lf) {
  const auto& nodes = process.nodes();
  for (const auto& [key, value] : nodes) {
    (void)value;
    if (key.empty()) continue;
    std::vector<Observation> parent(key.begin(), key.end() - 1);
    if (!process.value(parent)) {
      throw std::invalid_argument("process tree is not prefix-closed");
    }
    Observation last = key.back();
    std::vector<Observation> sibling = parent;
    sibling.push_back({last.object, 1 - last.label});
    if (!process.value(sibling)) {
      throw std::invalid_argument("process tree is missing a label sibling");
    }
  }

  for (const auto& [key, value] : nodes) {
    if (key.empty()) continue;
    if (key.back().label != 0) continue;  // handle each (node, object) pair once
    std::vector<Observation> parent(key.begin(), key.end() - 1);
    double base = *process.value(parent);
    std::vector<Observation> sibling = parent;
    sibling.push_back({key.back().object, 1});
    double v1 = *process.value(sibling);
    SuperpredictionPoint increment{value - base, v1 - base};
    if (!is_superprediction(lf, increment)) {
      return {false, SuperlossViolation{parent, key.back().object, increment}};
    }
  }
  return {true, std::nullopt};
}

ProcessTree to_process_tree(const LossTrace& trace, const DataSequence& sigma) {
  if (trace.increments.size() != sigma.size() ||
      trace.cumulative.size() != sigma.size() + 1) {
    throw std::invalid_argument("trace does not match the sequence");
  }
  ProcessTree tree;
  std::vector<Observation> prefix;
  tree.set(prefix, trace.cumulative[0]);
  for (size_t t = 0; t < sigma.size(); ++t) {
    const Observation& obs = sigma.items[t];
    double base = trace.cumulative[t];
    std::vector<Observation> child0 = prefix, child1 = prefix;
    child0.push_back({obs.object, 0});
    child1.push_back({obs.object, 1});
    tree.set(std::move(child0), base + trace.increments[t].a);
    tree.set(std::move(child1), base + trace.increments[t].b);
    prefix.push_back(obs);
  }
  return tree;
}

}  // namespace lossgeom
