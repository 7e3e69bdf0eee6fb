#include "crossfuse/fusion.h"

#include <nlohmann/json.hpp>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

const FusionConfig& Validated(const FusionConfig& c) {
  c.Validate();
  return c;
}

void AccumulateInto(Tensor& acc, const Tensor& d) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
}

}  // namespace

Gate MakeGate(const std::string& name, std::size_t in, std::size_t out) {
  return Gate{Parameter(name + ".weight", {in, out}),
              Parameter(name + ".bias", {out})};
}

Tensor GateForward(const Tensor& src, const Gate& g) {
  return Sigmoid(Dense(src, g.w, g.b));
}

// Backward through mask = sigmoid(W^T src + b); returns d src.
Tensor GateBackward(const Tensor& src, const Tensor& mask, Gate& g,
                    const Tensor& d_mask) {
  return DenseBackward(src, g.w, g.b, SigmoidBackward(mask, d_mask));
}

std::string ToString(FuseMode mode) {
  return mode == FuseMode::kConcat ? "concat" : "add";
}

std::string ToString(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kCross: return "cross";
    case AttentionMode::kCo: return "co";
    case AttentionMode::kNone: return "none";
    case AttentionMode::kSelf: return "self";
  }
  return "?";
}

FuseMode ParseFuseMode(const std::string& s) {
  if (s == "concat") return FuseMode::kConcat;
  if (s == "add") return FuseMode::kAdd;
  throw ConfigError("fuse_mode must be concat|add, got '" + s + "'");
}

AttentionMode ParseAttentionMode(const std::string& s) {
  if (s == "cross") return AttentionMode::kCross;
  if (s == "co") return AttentionMode::kCo;
  if (s == "none") return AttentionMode::kNone;
  if (s == "self") return AttentionMode::kSelf;
  throw ConfigError("attention_mode must be cross|co|none|self, got '" + s + "'");
}

void FusionConfig::Validate() const {
  if (k == 0) throw ConfigError("fusion.k must be >= 1");
  if (image_dim == 0 || text_dim == 0) {
    throw ConfigError("fusion image_dim/text_dim must be positive");
  }
  if (num_classes < 2) throw ConfigError("fusion.num_classes must be >= 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("fusion.dropout_rate must be in [0, 1)");
  }
}

void to_json(nlohmann::json& j, const FusionConfig& c) {
  j = nlohmann::json{{"image_dim", c.image_dim},
                     {"text_dim", c.text_dim},
                     {"k", c.k},
                     {"hidden", c.hidden_dim()},
                     {"fuse_mode", ToString(c.fuse_mode)},
                     {"attention_mode", ToString(c.attention_mode)},
                     {"self_attention_on_joint", c.self_attention_on_joint},
                     {"dropout_rate", c.dropout_rate},
                     {"num_classes", c.num_classes}};
}

void from_json(const nlohmann::json& j, FusionConfig& c) {
  c.image_dim = j.value("image_dim", c.image_dim);
  c.text_dim = j.value("text_dim", c.text_dim);
  c.k = j.value("k", c.k);
  c.hidden = j.value("hidden", c.hidden);
  if (j.contains("fuse_mode")) {
    c.fuse_mode = ParseFuseMode(j.at("fuse_mode").get<std::string>());
  }
  if (j.contains("attention_mode")) {
    c.attention_mode =
        ParseAttentionMode(j.at("attention_mode").get<std::string>());
  }
  c.self_attention_on_joint =
      j.value("self_attention_on_joint", c.self_attention_on_joint);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.num_classes = j.value("num_classes", c.num_classes);
}

HeadParams::HeadParams(const std::string& prefix, std::size_t in,
                       std::size_t hidden, std::size_t classes)
    : w1(prefix + ".layer1.weight", {in, hidden}),
      b1(prefix + ".layer1.bias", {hidden}),
      w2(prefix + ".layer2.weight", {hidden, classes}),
      b2(prefix + ".layer2.bias", {classes}) {}

HeadTrace HeadForward(const Tensor& x, const HeadParams& head,
                      double dropout_rate, Rng& rng, bool training) {
  HeadTrace t;
  t.input = x;
  auto dropped = Dropout(x, dropout_rate, rng, training);
  t.dropped = std::move(dropped.output);
  t.dropout_mask = std::move(dropped.mask);
  t.hidden_pre = Dense(t.dropped, head.w1, head.b1);
  t.hidden = Relu(t.hidden_pre);
  t.logits = Dense(t.hidden, head.w2, head.b2);
  return t;
}

Tensor HeadBackward(const HeadTrace& t, HeadParams& head,
                    const Tensor& d_logits) {
  Tensor d_hidden = DenseBackward(t.hidden, head.w2, head.b2, d_logits);
  Tensor d_dropped = DenseBackward(t.dropped, head.w1, head.b1,
                                   ReluBackward(t.hidden_pre, d_hidden));
  return DropoutBackward(t.dropout_mask, d_dropped);
}

FusionParams::FusionParams(const FusionConfig& c)
    : proj_image_w("proj_image.weight", {Validated(c).image_dim, c.k}),
      proj_image_b("proj_image.bias", {c.k}),
      proj_text_w("proj_text.weight", {c.text_dim, c.k}),
      proj_text_b("proj_text.bias", {c.k}),
      head("head", c.joint_dim(), c.hidden_dim(), c.num_classes) {
  switch (c.attention_mode) {
    case AttentionMode::kCross:
      image_gate = MakeGate("image_mask", c.text_dim, c.k);
      text_gate = MakeGate("text_mask", c.image_dim, c.k);
      break;
    case AttentionMode::kCo:
      image_gate = MakeGate("image_mask", c.image_dim + c.text_dim, c.k);
      text_gate = MakeGate("text_mask", c.image_dim + c.text_dim, c.k);
      break;
    case AttentionMode::kSelf:
      image_gate = MakeGate("image_mask", c.image_dim, c.k);
      text_gate = MakeGate("text_mask", c.text_dim, c.k);
      break;
    case AttentionMode::kNone:
      break;
  }
  if (c.self_attention_on_joint) {
    joint_gate = MakeGate("joint_attention", c.joint_dim(), c.joint_dim());
  }
}

std::vector<Parameter*> FusionParams::parameters() {
  std::vector<Parameter*> out = {&proj_image_w, &proj_image_b, &proj_text_w,
                                 &proj_text_b};
  for (auto* g : {&image_gate, &text_gate, &joint_gate}) {
    if (*g) {
      out.push_back(&(*g)->w);
      out.push_back(&(*g)->b);
    }
  }
  for (Parameter* p : head.parameters()) out.push_back(p);
  return out;
}

Projection Project(const Tensor& f, const Tensor& e, const Parameter& wv,
                   const Parameter& bv, const Parameter& we,
                   const Parameter& be) {
  Projection p;
  p.image_pre = Dense(f, wv, bv);
  p.text_pre = Dense(e, we, be);
  p.image = Relu(p.image_pre);
  p.text = Relu(p.text_pre);
  return p;
}

Projection Project(const Tensor& f, const Tensor& e, const FusionParams& p) {
  return Project(f, e, p.proj_image_w, p.proj_image_b, p.proj_text_w,
                 p.proj_text_b);
}

MaskPair CrossAttentionMasks(const Tensor& f, const Tensor& e,
                             const Gate& image_gate, const Gate& text_gate) {
  return {GateForward(e, image_gate), GateForward(f, text_gate)};
}

MaskPair CoAttentionMasks(const Tensor& f, const Tensor& e,
                          const Gate& image_gate, const Gate& text_gate) {
  const Tensor fe = Concat(f, e);
  return {GateForward(fe, image_gate), GateForward(fe, text_gate)};
}

MaskPair SelfMasks(const Tensor& f, const Tensor& e, const Gate& image_gate,
                   const Gate& text_gate) {
  return {GateForward(f, image_gate), GateForward(e, text_gate)};
}

SelfAttentionTrace SelfAttention(const Tensor& x, const Gate& gate) {
  SelfAttentionTrace t;
  t.gate = GateForward(x, gate);
  t.output = Hadamard(t.gate, x);
  return t;
}

Tensor SelfAttentionBackward(const Tensor& x, const SelfAttentionTrace& t,
                             Gate& gate, const Tensor& d_out) {
  Tensor dx = Hadamard(d_out, t.gate);
  AccumulateInto(dx, GateBackward(x, t.gate, gate, Hadamard(d_out, x)));
  return dx;
}

FusionTrace FuseForward(const Tensor& f, const Tensor& e,
                        const FusionParams& params, const FusionConfig& config,
                        Rng& rng, bool training) {
  FusionTrace t;
  t.f = f;
  t.e = e;
  t.proj = Project(f, e, params);
  switch (config.attention_mode) {
    case AttentionMode::kCross:
      t.masks = CrossAttentionMasks(f, e, *params.image_gate, *params.text_gate);
      break;
    case AttentionMode::kCo:
      t.masks = CoAttentionMasks(f, e, *params.image_gate, *params.text_gate);
      break;
    case AttentionMode::kSelf:
      t.masks = SelfMasks(f, e, *params.image_gate, *params.text_gate);
      break;
    case AttentionMode::kNone:
      break;
  }
  if (config.attention_mode == AttentionMode::kNone) {
    t.image_gated = t.proj.image;
    t.text_gated = t.proj.text;
  } else {
    t.image_gated = Hadamard(t.masks.for_image, t.proj.image);
    t.text_gated = Hadamard(t.masks.for_text, t.proj.text);
  }
  t.joint = config.fuse_mode == FuseMode::kConcat
                ? Concat(t.image_gated, t.text_gated)
                : Add(t.image_gated, t.text_gated);
  if (config.self_attention_on_joint) {
    t.joint_attention = SelfAttention(t.joint, *params.joint_gate);
    t.joint_out = t.joint_attention->output;
  } else {
    t.joint_out = t.joint;
  }
  t.head = HeadForward(t.joint_out, params.head, config.dropout_rate, rng,
                       training);
  return t;
}

Tensor FuseLogits(const Tensor& f, const Tensor& e, const FusionParams& params,
                  const FusionConfig& config) {
  Rng unused(0);
  return FuseForward(f, e, params, config, unused, false).head.logits;
}

std::pair<Tensor, Tensor> FuseBackward(const FusionTrace& t,
                                       FusionParams& params,
                                       const FusionConfig& config,
                                       const Tensor& d_logits) {
  Tensor d_joint_out = HeadBackward(t.head, params.head, d_logits);
  Tensor d_joint = t.joint_attention
                       ? SelfAttentionBackward(t.joint, *t.joint_attention,
                                               *params.joint_gate, d_joint_out)
                       : d_joint_out;

  Tensor d_image_gated, d_text_gated;
  if (config.fuse_mode == FuseMode::kConcat) {
    std::tie(d_image_gated, d_text_gated) = Split(d_joint, config.k);
  } else {
    d_image_gated = d_joint;
    d_text_gated = d_joint;
  }

  Tensor df(t.f.shape());
  Tensor de(t.e.shape());
  Tensor d_image_proj, d_text_proj;
  if (config.attention_mode == AttentionMode::kNone) {
    d_image_proj = d_image_gated;
    d_text_proj = d_text_gated;
  } else {
    d_image_proj = Hadamard(d_image_gated, t.masks.for_image);
    d_text_proj = Hadamard(d_text_gated, t.masks.for_text);
    const Tensor d_mask_image = Hadamard(d_image_gated, t.proj.image);
    const Tensor d_mask_text = Hadamard(d_text_gated, t.proj.text);
    switch (config.attention_mode) {
      case AttentionMode::kCross:
        AccumulateInto(de, GateBackward(t.e, t.masks.for_image,
                                        *params.image_gate, d_mask_image));
        AccumulateInto(df, GateBackward(t.f, t.masks.for_text,
                                        *params.text_gate, d_mask_text));
        break;
      case AttentionMode::kSelf:
        AccumulateInto(df, GateBackward(t.f, t.masks.for_image,
                                        *params.image_gate, d_mask_image));
        AccumulateInto(de, GateBackward(t.e, t.masks.for_text,
                                        *params.text_gate, d_mask_text));
        break;
      case AttentionMode::kCo: {
        const Tensor fe = Concat(t.f, t.e);
        Tensor d_fe = GateBackward(fe, t.masks.for_image, *params.image_gate,
                                   d_mask_image);
        AccumulateInto(d_fe, GateBackward(fe, t.masks.for_text,
                                          *params.text_gate, d_mask_text));
        auto [d_f_part, d_e_part] = Split(d_fe, t.f.size());
        AccumulateInto(df, d_f_part);
        AccumulateInto(de, d_e_part);
        break;
      }
      case AttentionMode::kNone:
        break;
    }
  }

  AccumulateInto(df, DenseBackward(t.f, params.proj_image_w, params.proj_image_b,
                                   ReluBackward(t.proj.image_pre, d_image_proj)));
  AccumulateInto(de, DenseBackward(t.e, params.proj_text_w, params.proj_text_b,
                                   ReluBackward(t.proj.text_pre, d_text_proj)));
  return {df, de};
}

int Predict(const Tensor& logits) {
  int best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace crossfuse
