#ifndef CROSSFUSE_METRICS_H_
#define CROSSFUSE_METRICS_H_

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace crossfuse {

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
};

struct MetricsReport {
  std::size_t total = 0;
  double accuracy = 0.0;
  double micro_f1 = 0.0;  // from pooled TP/FP/FN
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  // confusion[gold][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

// F1 is 0 for a class whose precision + recall is 0; precision is 0 for a
// never-predicted class. Throws DimensionError on length mismatch or empty
// input and IndexError on labels outside class_list.
MetricsReport ComputeMetrics(std::span<const int> predictions,
                             std::span<const int> gold,
                             const std::vector<std::string>& class_list);

void to_json(nlohmann::json& j, const ClassMetrics& m);
void from_json(const nlohmann::json& j, ClassMetrics& m);
void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

}  // namespace crossfuse

#endif  // CROSSFUSE_METRICS_H_
