#include "crossfuse/metrics.h"

#include <nlohmann/json.hpp>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double F1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

MetricsReport ComputeMetrics(std::span<const int> predictions,
                             std::span<const int> gold,
                             const std::vector<std::string>& class_list) {
  if (predictions.size() != gold.size()) {
    throw DimensionError("metrics: " + std::to_string(predictions.size()) +
                         " predictions vs " + std::to_string(gold.size()) +
                         " gold labels");
  }
  if (gold.empty()) throw DimensionError("metrics: empty input");
  const std::size_t c = class_list.size();
  MetricsReport r;
  r.total = gold.size();
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i];
    const int p = predictions[i];
    if (g < 0 || static_cast<std::size_t>(g) >= c || p < 0 ||
        static_cast<std::size_t>(p) >= c) {
      throw IndexError("metrics: label out of range at position " +
                       std::to_string(i));
    }
    ++r.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
    if (g == p) ++correct;
  }
  r.accuracy = Ratio(correct, r.total);

  std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t predicted = 0, support = 0;
    for (std::size_t j = 0; j < c; ++j) {
      predicted += r.confusion[j][k];
      support += r.confusion[k][j];
    }
    const std::size_t tp = r.confusion[k][k];
    tp_sum += tp;
    fp_sum += predicted - tp;
    fn_sum += support - tp;
    ClassMetrics m;
    m.name = class_list[k];
    m.precision = Ratio(tp, predicted);
    m.recall = Ratio(tp, support);
    m.f1 = F1(m.precision, m.recall);
    m.support = support;
    r.macro_f1 += m.f1;
    r.weighted_f1 += m.f1 * static_cast<double>(support);
    r.per_class.push_back(m);
  }
  r.macro_f1 /= static_cast<double>(c);
  r.weighted_f1 /= static_cast<double>(r.total);
  r.micro_f1 = F1(Ratio(tp_sum, tp_sum + fp_sum), Ratio(tp_sum, tp_sum + fn_sum));
  return r;
}

void to_json(nlohmann::json& j, const ClassMetrics& m) {
  j = nlohmann::json{{"name", m.name},
                     {"precision", m.precision},
                     {"recall", m.recall},
                     {"f1", m.f1},
                     {"support", m.support}};
}

void from_json(const nlohmann::json& j, ClassMetrics& m) {
  j.at("name").get_to(m.name);
  j.at("precision").get_to(m.precision);
  j.at("recall").get_to(m.recall);
  j.at("f1").get_to(m.f1);
  j.at("support").get_to(m.support);
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = nlohmann::json{{"total", r.total},
                     {"accuracy", r.accuracy},
                     {"micro_f1", r.micro_f1},
                     {"macro_f1", r.macro_f1},
                     {"weighted_f1", r.weighted_f1},
                     {"per_class", r.per_class},
                     {"confusion", r.confusion}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  j.at("total").get_to(r.total);
  j.at("accuracy").get_to(r.accuracy);
  j.at("micro_f1").get_to(r.micro_f1);
  j.at("macro_f1").get_to(r.macro_f1);
  j.at("weighted_f1").get_to(r.weighted_f1);
  j.at("per_class").get_to(r.per_class);
  j.at("confusion").get_to(r.confusion);
}

}  // namespace crossfuse
