#include "crossfuse/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

void CheckDense(const Tensor& x, const Parameter& w, const Parameter& b) {
  if (x.rank() != 1 || w.value.rank() != 2 || x.size() != w.value.rows() ||
      b.value.rank() != 1 || b.value.size() != w.value.cols()) {
    throw DimensionError("dense: input " + ShapeString(x.shape()) +
                         " does not conform to weight " +
                         ShapeString(w.value.shape()) + " and bias " +
                         ShapeString(b.value.shape()));
  }
}

}  // namespace

Tensor Dense(const Tensor& x, const Parameter& w, const Parameter& b) {
  CheckDense(x, w, b);
  const std::size_t n_in = w.value.rows();
  const std::size_t n_out = w.value.cols();
  Tensor y = b.value;
  const double* wd = w.value.values().data();
  for (std::size_t i = 0; i < n_in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = wd + i * n_out;
    for (std::size_t j = 0; j < n_out; ++j) y[j] += xi * row[j];
  }
  return y;
}

Tensor DenseBackward(const Tensor& x, Parameter& w, Parameter& b,
                     const Tensor& dy) {
  CheckDense(x, w, b);
  if (dy.shape() != b.value.shape()) {
    throw DimensionError("dense backward: upstream " + ShapeString(dy.shape()) +
                         " vs output " + ShapeString(b.value.shape()));
  }
  const std::size_t n_in = w.value.rows();
  const std::size_t n_out = w.value.cols();
  for (std::size_t j = 0; j < n_out; ++j) b.grad[j] += dy[j];
  Tensor dx({n_in});
  const double* wd = w.value.values().data();
  double* gd = w.grad.values().data();
  for (std::size_t i = 0; i < n_in; ++i) {
    const double xi = x[i];
    const double* row = wd + i * n_out;
    double* grow = gd + i * n_out;
    double acc = 0.0;
    for (std::size_t j = 0; j < n_out; ++j) {
      grow[j] += xi * dy[j];
      acc += row[j] * dy[j];
    }
    dx[i] = acc;
  }
  return dx;
}

Tensor Relu(const Tensor& x) {
  Tensor y = x;
  // NaN passes through so divergence surfaces in the loss.
  for (double& v : y.values()) v = v < 0.0 ? 0.0 : v;
  return y;
}

Tensor ReluBackward(const Tensor& x, const Tensor& dy) {
  if (x.shape() != dy.shape()) throw DimensionError("relu backward: shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) dx[i] = 0.0;
  }
  return dx;
}

Tensor Sigmoid(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double z = std::exp(v);
      v = z / (1.0 + z);
    }
  }
  return y;
}

Tensor SigmoidBackward(const Tensor& y, const Tensor& dy) {
  if (y.shape() != dy.shape()) throw DimensionError("sigmoid backward: shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] *= y[i] * (1.0 - y[i]);
  return dx;
}

Tensor Softmax(const Tensor& logits) {
  Tensor p = logits;
  const double mx = *std::max_element(p.values().begin(), p.values().end());
  double sum = 0.0;
  for (double& v : p.values()) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p.values()) v /= sum;
  return p;
}

LossAndGrad SoftmaxCrossEntropy(const Tensor& logits, int label) {
  if (logits.rank() != 1) throw DimensionError("cross entropy: logits must be a vector");
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw IndexError("cross entropy: label " + std::to_string(label) +
                     " out of range for " + std::to_string(logits.size()) +
                     " classes");
  }
  const auto vals = logits.values();
  const double mx = *std::max_element(vals.begin(), vals.end());
  double sum = 0.0;
  for (double v : vals) sum += std::exp(v - mx);
  const double log_z = mx + std::log(sum);
  LossAndGrad out;
  out.loss = log_z - logits[label];
  out.grad = Tensor(logits.shape());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.grad[i] = std::exp(logits[i] - log_z);
  }
  out.grad[label] -= 1.0;
  return out;
}

DropoutResult Dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("dropout rate must be in [0, 1), got " +
                         std::to_string(rate));
  }
  DropoutResult out{x, Tensor(x.shape(), 1.0)};
  if (!training || rate == 0.0) return out;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.Uniform() < rate ? 0.0 : keep_scale;
    out.mask[i] = m;
    out.output[i] = x[i] * m;
  }
  return out;
}

Tensor DropoutBackward(const Tensor& mask, const Tensor& dy) {
  return Hadamard(mask, dy);
}

Tensor Hadamard(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("hadamard: " + ShapeString(a.shape()) + " vs " +
                         ShapeString(b.shape()));
  }
  Tensor y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b[i];
  return y;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: " + ShapeString(a.shape()) + " vs " +
                         ShapeString(b.shape()));
  }
  Tensor y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

Tensor Concat(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1) throw DimensionError("concat: vectors only");
  std::vector<double> data(a.data());
  data.insert(data.end(), b.data().begin(), b.data().end());
  return Tensor::Vector(std::move(data));
}

std::pair<Tensor, Tensor> Split(const Tensor& x, std::size_t head) {
  if (x.rank() != 1 || head == 0 || head >= x.size()) {
    throw DimensionError("split: cannot split " + ShapeString(x.shape()) +
                         " at " + std::to_string(head));
  }
  const auto& d = x.data();
  return {Tensor::Vector(std::vector<double>(d.begin(), d.begin() + head)),
          Tensor::Vector(std::vector<double>(d.begin() + head, d.end()))};
}

void SgdStep(std::span<Parameter* const> params, double lr) {
  for (Parameter* p : params) {
    auto v = p->value.values();
    auto g = p->grad.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
    p->ZeroGrad();
  }
}

void GlorotUniform(Parameter& w, Rng& rng) {
  const double fan = static_cast<double>(w.value.rows() + w.value.cols());
  const double a = std::sqrt(6.0 / fan);
  for (double& v : w.value.values()) v = rng.Uniform(-a, a);
}

void InitParameters(std::span<Parameter* const> params, std::uint64_t seed) {
  const Rng base(seed);
  for (Parameter* p : params) {
    if (p->value.rank() == 2) {
      Rng rng = base.Derive(HashString(p->name));
      GlorotUniform(*p, rng);
    } else {
      p->value.Fill(0.0);
    }
    p->ZeroGrad();
  }
}

}  // namespace crossfuse
