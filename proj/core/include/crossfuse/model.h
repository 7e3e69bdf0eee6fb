#ifndef CROSSFUSE_MODEL_H_
#define CROSSFUSE_MODEL_H_

// A trainable classifier over samples: optional toy encoders in front of
// either the single-head fusion network or the two-head network. Modalities
// without an encoder are read from the sample's precomputed vector.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crossfuse/dataset.h"
#include "crossfuse/encoders.h"
#include "crossfuse/fusion.h"
#include "crossfuse/gradcheck.h"
#include "crossfuse/image.h"
#include "crossfuse/multilabel.h"

namespace crossfuse {

enum class ModelKind { kFusion, kDual };

struct ModelSpec {
  ModelKind kind = ModelKind::kFusion;
  FusionConfig fusion;
  DualHeadConfig dual;
  std::optional<ImageEncoderConfig> image_encoder;
  std::optional<TextEncoderConfig> text_encoder;
  AugmentConfig augment;  // raw images, before the image encoder

  std::size_t num_heads() const { return kind == ModelKind::kDual ? 2 : 1; }
  std::size_t num_classes() const {
    return kind == ModelKind::kDual ? dual.num_classes : fusion.num_classes;
  }
  std::size_t image_dim() const {
    return kind == ModelKind::kDual ? dual.image_dim : fusion.image_dim;
  }
  std::size_t text_dim() const {
    return kind == ModelKind::kDual ? dual.text_dim : fusion.text_dim;
  }
  // Checks the active network config and that encoder outputs and crop size
  // line up with it. Throws ConfigError.
  void Validate() const;
};

void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);

class Model {
 public:
  explicit Model(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t num_heads() const { return spec_.num_heads(); }
  std::vector<Parameter*> parameters();
  // Name-keyed initialization; see InitParameters.
  void Init(std::uint64_t seed);

  // Evaluation-mode logits, one tensor per head. The image representation is
  // taken from `image_from` and the text one from `text_from`.
  std::vector<Tensor> Logits(const Sample& image_from,
                             const Sample& text_from) const;
  std::vector<Tensor> Logits(const Sample& s) const { return Logits(s, s); }
  std::vector<int> Predict(const Sample& s) const;
  // Evaluation-mode loss summed over heads.
  double Loss(const Sample& s, std::span<const int> labels) const;

  // Training-mode forward and backward. Gradients of grad_scale * loss are
  // accumulated into the parameters; returns the unscaled loss summed over
  // heads.
  double Accumulate(const Sample& image_from, const Sample& text_from,
                    std::span<const int> labels, double grad_scale, Rng& rng);
  // Training-mode loss only. `rng` is taken by value, so repeated calls with
  // the same generator see identical dropout masks and crops.
  double TrainingLoss(const Sample& image_from, const Sample& text_from,
                      std::span<const int> labels, Rng rng) const;

  std::vector<Tensor> Snapshot();
  void Restore(const std::vector<Tensor>& values);

 private:
  struct Encoded {
    Tensor f, e;
    std::optional<ToyImageEncoder::Trace> image_trace;
    std::optional<ToyTextEncoder::Trace> text_trace;
  };
  struct Pass {
    Encoded enc;
    std::optional<FusionTrace> fusion;
    std::optional<DualTrace> dual;
    std::vector<LossAndGrad> losses;  // one per head
  };
  Encoded Encode(const Sample& image_from, const Sample& text_from, Rng& rng,
                 bool training) const;
  Pass TrainingPass(const Sample& image_from, const Sample& text_from,
                    std::span<const int> labels, Rng& rng) const;
  void CheckLabels(std::span<const int> labels) const;

  ModelSpec spec_;
  std::optional<ToyImageEncoder> image_encoder_;
  std::optional<ToyTextEncoder> text_encoder_;
  FusionParams fusion_;
  DualHeadParams dual_;
};

struct ModelGradCheckOptions {
  double eps = 1e-5;
  double floor = 1e-6;
  std::uint64_t seed = 0;  // dropout and crop draws
  // Runs after backprop and before the comparison; tests use it to corrupt
  // a gradient on purpose.
  std::function<void(std::span<Parameter* const>)> after_backward;
};

// Backprop vs central differences of the training-mode loss of one example,
// over every parameter coordinate.
GradCheckReport CheckModelGradients(Model& model, const Sample& sample,
                                    std::span<const int> labels,
                                    const ModelGradCheckOptions& options = {});

}  // namespace crossfuse

#endif  // CROSSFUSE_MODEL_H_
