#ifndef CROSSFUSE_GRADCHECK_H_
#define CROSSFUSE_GRADCHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crossfuse/tensor.h"

namespace crossfuse {

// Central-difference gradient of a scalar function of the parameters:
// (f(theta + eps) - f(theta - eps)) / (2 eps), one coordinate at a time.
// Parameter values are restored exactly after each probe.
std::vector<Tensor> FiniteDiffGrad(const std::function<double()>& f,
                                   std::span<Parameter* const> params,
                                   double eps = 1e-6);

// Same, but only probes the listed flat coordinates of each parameter
// (coords[p] for params[p]); other entries of the result are zero.
std::vector<Tensor> FiniteDiffGrad(
    const std::function<double()>& f, std::span<Parameter* const> params,
    const std::vector<std::vector<std::size_t>>& coords, double eps = 1e-6);

// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
// gradient is ~0 from dominating through round-off.
double RelativeError(double analytic, double numeric, double floor = 1e-6);

struct ParamGradError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::vector<ParamGradError> per_param;
  double max_rel_error = 0.0;
  std::string worst_param;

  bool Passed(double tolerance) const { return max_rel_error < tolerance; }
};

// Compares analytic gradients (params[i]->grad) with numeric ones.
GradCheckReport CompareGradients(std::span<Parameter* const> params,
                                 const std::vector<Tensor>& numeric,
                                 const std::vector<std::vector<std::size_t>>* coords = nullptr,
                                 double floor = 1e-6);

}  // namespace crossfuse

#endif  // CROSSFUSE_GRADCHECK_H_
