#ifndef CROSSFUSE_MULTILABEL_H_
#define CROSSFUSE_MULTILABEL_H_

// Two-head classifier predicting separate image and text labels.
//
//   kCross:     both heads read the cross-attended joint [a_v * f~ | a_e * e~].
//   kSelf:      image head reads g_v * f~, text head reads g_e * e~, with
//               g_v = sigmoid(W''_v^T f + b''_v) and g_e from e.
//   kSelfCross: image head reads g_v * f~ + (1 - g_v) * e~, text head reads
//               g_e * e~ + (1 - g_e) * f~.

#include <string>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "crossfuse/fusion.h"

namespace crossfuse {

enum class DualVariant { kCross, kSelf, kSelfCross };

std::string ToString(DualVariant v);
DualVariant ParseDualVariant(const std::string& s);

struct DualHeadConfig {
  std::size_t image_dim = 64;
  std::size_t text_dim = kDefaultTextDim;
  std::size_t k = 100;
  std::size_t hidden = 0;  // 0 means K
  DualVariant variant = DualVariant::kSelfCross;
  double dropout_rate = 0.5;
  std::size_t num_classes = 2;

  std::size_t head_input_dim() const {
    return variant == DualVariant::kCross ? 2 * k : k;
  }
  std::size_t hidden_dim() const { return hidden ? hidden : k; }
  void Validate() const;
};

void to_json(nlohmann::json& j, const DualHeadConfig& c);
void from_json(const nlohmann::json& j, DualHeadConfig& c);

struct DualHeadParams {
  DualHeadParams() = default;
  explicit DualHeadParams(const DualHeadConfig& config);
  std::vector<Parameter*> parameters();

  Parameter proj_image_w, proj_image_b, proj_text_w, proj_text_b;
  // kCross: image gate from e, text gate from f. Otherwise the self masks
  // (image gate from f, text gate from e).
  Gate image_gate;
  Gate text_gate;
  HeadParams image_head;
  HeadParams text_head;
};

// gamma_v = sigmoid(W''_v^T f + b''_v), gamma_e from e.
MaskPair SelfMasks(const Tensor& f, const Tensor& e,
                   const DualHeadParams& params);

// 1 - gamma, elementwise.
std::pair<Tensor, Tensor> InverseMasks(const Tensor& gamma_v,
                                       const Tensor& gamma_e);

// f'' = gamma_v * f~ + (1 - gamma_v) * e~;  e'' = gamma_e * e~ + (1 - gamma_e) * f~.
std::pair<Tensor, Tensor> SelfCrossFeatures(const Tensor& image_proj,
                                            const Tensor& text_proj,
                                            const Tensor& gamma_v,
                                            const Tensor& gamma_e);

struct DualTrace {
  Tensor f, e;
  Projection proj;
  MaskPair masks;
  Tensor image_features;  // input of the image head
  Tensor text_features;   // input of the text head
  HeadTrace image_head;
  HeadTrace text_head;

  const Tensor& image_logits() const { return image_head.logits; }
  const Tensor& text_logits() const { return text_head.logits; }
};

DualTrace DualForward(const Tensor& f, const Tensor& e,
                      const DualHeadParams& params,
                      const DualHeadConfig& config, Rng& rng, bool training);
// Accumulates gradients for d(loss_image + loss_text); returns (dL/df, dL/de).
std::pair<Tensor, Tensor> DualBackward(const DualTrace& trace,
                                       DualHeadParams& params,
                                       const DualHeadConfig& config,
                                       const Tensor& d_image_logits,
                                       const Tensor& d_text_logits);

}  // namespace crossfuse

#endif  // CROSSFUSE_MULTILABEL_H_
