#ifndef CROSSFUSE_FUSION_H_
#define CROSSFUSE_FUSION_H_

// Attention-gated fusion of an image feature f (length D_f) and a text
// embedding e (length D_e):
//
//   f~ = ReLU(W_v^T f + b_v)          e~ = ReLU(W_e^T e + b_e)     (length K)
//   image gate, text gate  = sigmoid masks (see AttentionMode)
//   joint = [gate_v * f~ | gate_e * e~]   (or their sum)
//   joint <- sigmoid(W_s^T joint + b_s) * joint    (optional self-attention)
//   logits = W_2^T ReLU(W_1^T dropout(joint) + b_1) + b_2
//
// Gate sources per mode:
//   kCross: image gate from the raw text embedding e, text gate from the raw
//           image feature f. Each modality is blocked by the other one.
//   kCo:    both gates from [f | e], separate weights.
//   kSelf:  image gate from f, text gate from e.
//   kNone:  no gating (plain feature fusion).

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crossfuse/encoders.h"
#include "crossfuse/ops.h"
#include "crossfuse/rng.h"
#include "crossfuse/tensor.h"

namespace crossfuse {

enum class FuseMode { kConcat, kAdd };
enum class AttentionMode { kCross, kCo, kNone, kSelf };

std::string ToString(FuseMode mode);
std::string ToString(AttentionMode mode);
FuseMode ParseFuseMode(const std::string& s);
AttentionMode ParseAttentionMode(const std::string& s);

struct FusionConfig {
  std::size_t image_dim = 64;               // D_f
  std::size_t text_dim = kDefaultTextDim;   // D_e
  std::size_t k = 100;
  std::size_t hidden = 0;  // head hidden width; 0 means K
  FuseMode fuse_mode = FuseMode::kConcat;
  AttentionMode attention_mode = AttentionMode::kCross;
  bool self_attention_on_joint = true;
  double dropout_rate = 0.5;
  std::size_t num_classes = 2;

  std::size_t joint_dim() const {
    return fuse_mode == FuseMode::kConcat ? 2 * k : k;
  }
  std::size_t hidden_dim() const { return hidden ? hidden : k; }
  // Throws ConfigError on K = 0, zero dims, < 2 classes or bad dropout.
  void Validate() const;
};

void to_json(nlohmann::json& j, const FusionConfig& c);
void from_json(const nlohmann::json& j, FusionConfig& c);

// Two-layer classifier head: dropout -> dense -> ReLU -> dense.
struct HeadParams {
  HeadParams() = default;
  HeadParams(const std::string& prefix, std::size_t in, std::size_t hidden,
             std::size_t classes);
  std::vector<Parameter*> parameters() { return {&w1, &b1, &w2, &b2}; }

  Parameter w1, b1, w2, b2;
};

struct HeadTrace {
  Tensor input;
  Tensor dropout_mask;
  Tensor dropped;
  Tensor hidden_pre;
  Tensor hidden;
  Tensor logits;
};

HeadTrace HeadForward(const Tensor& x, const HeadParams& head,
                      double dropout_rate, Rng& rng, bool training);
// Returns d loss / d input.
Tensor HeadBackward(const HeadTrace& trace, HeadParams& head,
                    const Tensor& d_logits);

// sigmoid(W^T src + b) gate.
struct Gate {
  Parameter w, b;
};

Gate MakeGate(const std::string& name, std::size_t in, std::size_t out);
Tensor GateForward(const Tensor& src, const Gate& g);
// Backward through mask = sigmoid(W^T src + b); returns d src.
Tensor GateBackward(const Tensor& src, const Tensor& mask, Gate& g,
                    const Tensor& d_mask);

struct FusionParams {
  FusionParams() = default;
  explicit FusionParams(const FusionConfig& config);
  // Active parameters only (mask and joint-attention weights exist only
  // when the config uses them).
  std::vector<Parameter*> parameters();

  Parameter proj_image_w, proj_image_b;  // W_v, b_v  [D_f x K]
  Parameter proj_text_w, proj_text_b;    // W_e, b_e  [D_e x K]
  std::optional<Gate> image_gate;        // mask applied to f~
  std::optional<Gate> text_gate;         // mask applied to e~
  std::optional<Gate> joint_gate;        // self-attention on joint vector
  HeadParams head;
};

struct Projection {
  Tensor image_pre, text_pre;
  Tensor image, text;  // f~, e~
};

// f~ = ReLU(W_v^T f + b_v), e~ = ReLU(W_e^T e + b_e).
Projection Project(const Tensor& f, const Tensor& e, const Parameter& wv,
                   const Parameter& bv, const Parameter& we,
                   const Parameter& be);
Projection Project(const Tensor& f, const Tensor& e, const FusionParams& p);

struct MaskPair {
  Tensor for_image;
  Tensor for_text;
};

// Image mask from e only, text mask from f only. Gates must map
// D_e -> K and D_f -> K respectively.
MaskPair CrossAttentionMasks(const Tensor& f, const Tensor& e,
                             const Gate& image_gate, const Gate& text_gate);
// Both masks from [f | e]; gates map D_f + D_e -> K.
MaskPair CoAttentionMasks(const Tensor& f, const Tensor& e,
                          const Gate& image_gate, const Gate& text_gate);
// Each mask from its own modality; gates map D_f -> K and D_e -> K.
MaskPair SelfMasks(const Tensor& f, const Tensor& e, const Gate& image_gate,
                   const Gate& text_gate);

// sigmoid(W^T x + b) * x.
struct SelfAttentionTrace {
  Tensor gate;
  Tensor output;
};
SelfAttentionTrace SelfAttention(const Tensor& x, const Gate& gate);
Tensor SelfAttentionBackward(const Tensor& x, const SelfAttentionTrace& trace,
                             Gate& gate, const Tensor& d_out);

struct FusionTrace {
  Tensor f, e;
  Projection proj;
  MaskPair masks;  // empty tensors when attention is kNone
  Tensor image_gated, text_gated;
  Tensor joint;
  std::optional<SelfAttentionTrace> joint_attention;
  Tensor joint_out;
  HeadTrace head;

  const Tensor& logits() const { return head.logits; }
};

// Full forward pass. `rng` drives dropout in training mode only.
FusionTrace FuseForward(const Tensor& f, const Tensor& e,
                        const FusionParams& params, const FusionConfig& config,
                        Rng& rng, bool training);
// Evaluation-mode logits.
Tensor FuseLogits(const Tensor& f, const Tensor& e, const FusionParams& params,
                  const FusionConfig& config);
// Accumulates all parameter gradients; returns (dL/df, dL/de).
std::pair<Tensor, Tensor> FuseBackward(const FusionTrace& trace,
                                       FusionParams& params,
                                       const FusionConfig& config,
                                       const Tensor& d_logits);

// Argmax; ties go to the lowest index.
int Predict(const Tensor& logits);

}  // namespace crossfuse

#endif  // CROSSFUSE_FUSION_H_
