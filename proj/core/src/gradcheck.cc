#include "crossfuse/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

double Probe(const std::function<double()>& f, Parameter& p, std::size_t k,
             double eps) {
  const double saved = p.value[k];
  p.value[k] = saved + eps;
  const double up = f();
  p.value[k] = saved - eps;
  const double down = f();
  p.value[k] = saved;
  return (up - down) / (2.0 * eps);
}

}  // namespace

std::vector<Tensor> FiniteDiffGrad(const std::function<double()>& f,
                                   std::span<Parameter* const> params,
                                   double eps) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (Parameter* p : params) {
    Tensor g(p->value.shape());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = Probe(f, *p, k, eps);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<Tensor> FiniteDiffGrad(
    const std::function<double()>& f, std::span<Parameter* const> params,
    const std::vector<std::vector<std::size_t>>& coords, double eps) {
  if (coords.size() != params.size()) {
    throw DimensionError("finite differences: one coordinate list per parameter");
  }
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor g(params[i]->value.shape());
    for (std::size_t k : coords[i]) g[k] = Probe(f, *params[i], k, eps);
    out.push_back(std::move(g));
  }
  return out;
}

double RelativeError(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport CompareGradients(
    std::span<Parameter* const> params, const std::vector<Tensor>& numeric,
    const std::vector<std::vector<std::size_t>>* coords, double floor) {
  if (numeric.size() != params.size()) {
    throw DimensionError("gradient comparison: parameter count mismatch");
  }
  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    ParamGradError e;
    e.name = p.name;
    auto check = [&](std::size_t k) {
      const double err = RelativeError(p.grad[k], numeric[i][k], floor);
      ++e.checked;
      if (err > e.max_rel_error || e.checked == 1) {
        e.max_rel_error = err;
        e.worst_index = k;
        e.analytic = p.grad[k];
        e.numeric = numeric[i][k];
      }
    };
    if (coords) {
      for (std::size_t k : (*coords)[i]) check(k);
    } else {
      for (std::size_t k = 0; k < p.grad.size(); ++k) check(k);
    }
    if (report.worst_param.empty() || e.max_rel_error > report.max_rel_error) {
      report.max_rel_error = e.max_rel_error;
      report.worst_param = e.name;
    }
    report.per_param.push_back(std::move(e));
  }
  return report;
}

}  // namespace crossfuse
