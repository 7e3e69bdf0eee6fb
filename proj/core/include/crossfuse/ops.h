#ifndef CROSSFUSE_OPS_H_
#define CROSSFUSE_OPS_H_

// Differentiable building blocks. Every layer is a pair of free functions:
// a pure forward and a backward that takes the forward's inputs (or outputs)
// plus the upstream gradient, accumulates parameter gradients in place and
// returns the gradient with respect to its input.

#include <span>
#include <vector>

#include "crossfuse/rng.h"
#include "crossfuse/tensor.h"

namespace crossfuse {

// y = W^T x + b with W stored as [n_in x n_out].
Tensor Dense(const Tensor& x, const Parameter& w, const Parameter& b);
Tensor DenseBackward(const Tensor& x, Parameter& w, Parameter& b,
                     const Tensor& dy);

Tensor Relu(const Tensor& x);
// Subgradient at exactly 0 is 0.
Tensor ReluBackward(const Tensor& x, const Tensor& dy);

Tensor Sigmoid(const Tensor& x);
// Takes the sigmoid *output* y; dx = dy * y * (1 - y).
Tensor SigmoidBackward(const Tensor& y, const Tensor& dy);

struct LossAndGrad {
  double loss = 0.0;
  Tensor grad;  // d loss / d logits
};

// -log softmax(logits)[label], with max subtraction.
LossAndGrad SoftmaxCrossEntropy(const Tensor& logits, int label);
// Softmax probabilities of a logit vector.
Tensor Softmax(const Tensor& logits);

struct DropoutResult {
  Tensor output;
  Tensor mask;  // 0 or 1/(1-rate) per element; all ones in evaluation mode
};

// Inverted dropout. Throws ParameterError unless 0 <= rate < 1.
DropoutResult Dropout(const Tensor& x, double rate, Rng& rng, bool training);
Tensor DropoutBackward(const Tensor& mask, const Tensor& dy);

Tensor Hadamard(const Tensor& a, const Tensor& b);
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Concat(const Tensor& a, const Tensor& b);
// Inverse of Concat: first `head` elements and the rest.
std::pair<Tensor, Tensor> Split(const Tensor& x, std::size_t head);

// value <- value - lr * grad for every parameter, then grads are zeroed.
void SgdStep(std::span<Parameter* const> params, double lr);

// Uniform(-a, a) with a = sqrt(6 / (n_in + n_out)) for a [n_in x n_out]
// weight.
void GlorotUniform(Parameter& w, Rng& rng);

// Rank-2 parameters get GlorotUniform from a stream keyed by (seed, name);
// rank-1 parameters (biases) are zeroed. A parameter's initial value thus
// depends only on the seed and its name and shape.
void InitParameters(std::span<Parameter* const> params, std::uint64_t seed);

}  // namespace crossfuse

#endif  // CROSSFUSE_OPS_H_
