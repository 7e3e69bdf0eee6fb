#include "crossfuse/encoders.h"

#include <map>

#include "crossfuse/errors.h"
#include "crossfuse/ops.h"

namespace crossfuse {

ToyImageEncoder::ToyImageEncoder(const ImageEncoderConfig& config)
    : config_(config),
      weight_("image_encoder.weight", {config.input_dim(), config.out_dim}),
      bias_("image_encoder.bias", {config.out_dim}) {}

ToyImageEncoder::Trace ToyImageEncoder::Forward(const ImageInput& img) const {
  if (img.height != config_.height || img.width != config_.width ||
      img.channels != config_.channels) {
    throw DimensionError(
        "image encoder expects " + std::to_string(config_.height) + "x" +
        std::to_string(config_.width) + "x" + std::to_string(config_.channels) +
        ", got " + std::to_string(img.height) + "x" + std::to_string(img.width) +
        "x" + std::to_string(img.channels));
  }
  Trace t;
  t.input = Tensor::Vector(img.pixels);
  t.pre = Dense(t.input, weight_, bias_);
  t.output = Relu(t.pre);
  return t;
}

void ToyImageEncoder::Backward(const Trace& trace, const Tensor& d_out) {
  DenseBackward(trace.input, weight_, bias_, ReluBackward(trace.pre, d_out));
}

SparseCounts BagOfWords(const std::vector<std::string>& tokens,
                        std::size_t buckets) {
  std::map<std::size_t, double> counts;
  for (const auto& tok : tokens) counts[HashToken(tok) % buckets] += 1.0;
  return SparseCounts(counts.begin(), counts.end());
}

ToyTextEncoder::ToyTextEncoder(const TextEncoderConfig& config)
    : config_(config),
      weight_("text_encoder.weight", {config.vocab_buckets, config.out_dim}),
      bias_("text_encoder.bias", {config.out_dim}) {}

ToyTextEncoder::Trace ToyTextEncoder::Forward(const TextInput& text) const {
  Trace t;
  t.counts = BagOfWords(text.tokens, config_.vocab_buckets);
  // Sparse dense(): only the rows of hashed buckets contribute.
  t.pre = bias_.value;
  const std::size_t d = config_.out_dim;
  for (const auto& [bucket, count] : t.counts) {
    const double* row = weight_.value.values().data() + bucket * d;
    for (std::size_t j = 0; j < d; ++j) t.pre[j] += count * row[j];
  }
  t.output = Relu(t.pre);
  return t;
}

void ToyTextEncoder::Backward(const Trace& trace, const Tensor& d_out) {
  const Tensor d_pre = ReluBackward(trace.pre, d_out);
  const std::size_t d = config_.out_dim;
  for (std::size_t j = 0; j < d; ++j) bias_.grad[j] += d_pre[j];
  for (const auto& [bucket, count] : trace.counts) {
    double* row = weight_.grad.values().data() + bucket * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += count * d_pre[j];
  }
}

}  // namespace crossfuse
