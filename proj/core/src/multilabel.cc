#include "crossfuse/multilabel.h"

#include <nlohmann/json.hpp>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

const DualHeadConfig& Validated(const DualHeadConfig& c) {
  c.Validate();
  return c;
}

void AccumulateInto(Tensor& acc, const Tensor& d) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
}

}  // namespace

std::string ToString(DualVariant v) {
  switch (v) {
    case DualVariant::kCross: return "cross";
    case DualVariant::kSelf: return "self";
    case DualVariant::kSelfCross: return "self_cross";
  }
  return "?";
}

DualVariant ParseDualVariant(const std::string& s) {
  if (s == "cross") return DualVariant::kCross;
  if (s == "self") return DualVariant::kSelf;
  if (s == "self_cross") return DualVariant::kSelfCross;
  throw ConfigError("dual variant must be cross|self|self_cross, got '" + s + "'");
}

void DualHeadConfig::Validate() const {
  if (k == 0) throw ConfigError("dual.k must be >= 1");
  if (image_dim == 0 || text_dim == 0) {
    throw ConfigError("dual image_dim/text_dim must be positive");
  }
  if (num_classes < 2) throw ConfigError("dual.num_classes must be >= 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dual.dropout_rate must be in [0, 1)");
  }
}

void to_json(nlohmann::json& j, const DualHeadConfig& c) {
  j = nlohmann::json{{"image_dim", c.image_dim},
                     {"text_dim", c.text_dim},
                     {"k", c.k},
                     {"hidden", c.hidden_dim()},
                     {"variant", ToString(c.variant)},
                     {"dropout_rate", c.dropout_rate},
                     {"num_classes", c.num_classes}};
}

void from_json(const nlohmann::json& j, DualHeadConfig& c) {
  c.image_dim = j.value("image_dim", c.image_dim);
  c.text_dim = j.value("text_dim", c.text_dim);
  c.k = j.value("k", c.k);
  c.hidden = j.value("hidden", c.hidden);
  if (j.contains("variant")) {
    c.variant = ParseDualVariant(j.at("variant").get<std::string>());
  }
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.num_classes = j.value("num_classes", c.num_classes);
}

DualHeadParams::DualHeadParams(const DualHeadConfig& c)
    : proj_image_w("proj_image.weight", {Validated(c).image_dim, c.k}),
      proj_image_b("proj_image.bias", {c.k}),
      proj_text_w("proj_text.weight", {c.text_dim, c.k}),
      proj_text_b("proj_text.bias", {c.k}),
      image_gate(c.variant == DualVariant::kCross
                     ? MakeGate("image_mask", c.text_dim, c.k)
                     : MakeGate("image_self_mask", c.image_dim, c.k)),
      text_gate(c.variant == DualVariant::kCross
                    ? MakeGate("text_mask", c.image_dim, c.k)
                    : MakeGate("text_self_mask", c.text_dim, c.k)),
      image_head("image_head", c.head_input_dim(), c.hidden_dim(),
                 c.num_classes),
      text_head("text_head", c.head_input_dim(), c.hidden_dim(),
                c.num_classes) {}

std::vector<Parameter*> DualHeadParams::parameters() {
  std::vector<Parameter*> out = {&proj_image_w, &proj_image_b, &proj_text_w,
                                 &proj_text_b,  &image_gate.w, &image_gate.b,
                                 &text_gate.w,  &text_gate.b};
  for (Parameter* p : image_head.parameters()) out.push_back(p);
  for (Parameter* p : text_head.parameters()) out.push_back(p);
  return out;
}

MaskPair SelfMasks(const Tensor& f, const Tensor& e,
                   const DualHeadParams& params) {
  return SelfMasks(f, e, params.image_gate, params.text_gate);
}

std::pair<Tensor, Tensor> InverseMasks(const Tensor& gamma_v,
                                       const Tensor& gamma_e) {
  Tensor inv_v = gamma_v;
  Tensor inv_e = gamma_e;
  for (double& v : inv_v.values()) v = 1.0 - v;
  for (double& v : inv_e.values()) v = 1.0 - v;
  return {inv_v, inv_e};
}

std::pair<Tensor, Tensor> SelfCrossFeatures(const Tensor& image_proj,
                                            const Tensor& text_proj,
                                            const Tensor& gamma_v,
                                            const Tensor& gamma_e) {
  CheckSameVector(image_proj, text_proj, "self-cross features");
  CheckSameVector(image_proj, gamma_v, "self-cross features");
  CheckSameVector(image_proj, gamma_e, "self-cross features");
  const auto [inv_v, inv_e] = InverseMasks(gamma_v, gamma_e);
  Tensor f2(image_proj.shape());
  Tensor e2(text_proj.shape());
  for (std::size_t k = 0; k < f2.size(); ++k) {
    f2[k] = gamma_v[k] * image_proj[k] + inv_v[k] * text_proj[k];
    e2[k] = gamma_e[k] * text_proj[k] + inv_e[k] * image_proj[k];
  }
  return {f2, e2};
}

DualTrace DualForward(const Tensor& f, const Tensor& e,
                      const DualHeadParams& params,
                      const DualHeadConfig& config, Rng& rng, bool training) {
  DualTrace t;
  t.f = f;
  t.e = e;
  t.proj = Project(f, e, params.proj_image_w, params.proj_image_b,
                   params.proj_text_w, params.proj_text_b);
  switch (config.variant) {
    case DualVariant::kCross: {
      t.masks = CrossAttentionMasks(f, e, params.image_gate, params.text_gate);
      Tensor joint = Concat(Hadamard(t.masks.for_image, t.proj.image),
                            Hadamard(t.masks.for_text, t.proj.text));
      t.image_features = joint;
      t.text_features = std::move(joint);
      break;
    }
    case DualVariant::kSelf:
      t.masks = SelfMasks(f, e, params);
      t.image_features = Hadamard(t.masks.for_image, t.proj.image);
      t.text_features = Hadamard(t.masks.for_text, t.proj.text);
      break;
    case DualVariant::kSelfCross:
      t.masks = SelfMasks(f, e, params);
      std::tie(t.image_features, t.text_features) = SelfCrossFeatures(
          t.proj.image, t.proj.text, t.masks.for_image, t.masks.for_text);
      break;
  }
  t.image_head = HeadForward(t.image_features, params.image_head,
                             config.dropout_rate, rng, training);
  t.text_head = HeadForward(t.text_features, params.text_head,
                            config.dropout_rate, rng, training);
  return t;
}

std::pair<Tensor, Tensor> DualBackward(const DualTrace& t,
                                       DualHeadParams& params,
                                       const DualHeadConfig& config,
                                       const Tensor& d_image_logits,
                                       const Tensor& d_text_logits) {
  const Tensor d_img_feat = HeadBackward(t.image_head, params.image_head,
                                         d_image_logits);
  const Tensor d_txt_feat = HeadBackward(t.text_head, params.text_head,
                                         d_text_logits);
  const std::size_t k = config.k;
  Tensor d_img_proj({k});
  Tensor d_txt_proj({k});
  Tensor d_gamma_v({k});
  Tensor d_gamma_e({k});
  Tensor df(t.f.shape());
  Tensor de(t.e.shape());

  const Tensor& fp = t.proj.image;
  const Tensor& ep = t.proj.text;
  const Tensor& gv = t.masks.for_image;
  const Tensor& ge = t.masks.for_text;

  switch (config.variant) {
    case DualVariant::kCross: {
      Tensor d_joint = Add(d_img_feat, d_txt_feat);
      auto [d_fa, d_ea] = Split(d_joint, k);
      for (std::size_t i = 0; i < k; ++i) {
        d_img_proj[i] = d_fa[i] * gv[i];
        d_txt_proj[i] = d_ea[i] * ge[i];
        d_gamma_v[i] = d_fa[i] * fp[i];
        d_gamma_e[i] = d_ea[i] * ep[i];
      }
      AccumulateInto(de, GateBackward(t.e, gv, params.image_gate, d_gamma_v));
      AccumulateInto(df, GateBackward(t.f, ge, params.text_gate, d_gamma_e));
      break;
    }
    case DualVariant::kSelf:
      for (std::size_t i = 0; i < k; ++i) {
        d_img_proj[i] = d_img_feat[i] * gv[i];
        d_txt_proj[i] = d_txt_feat[i] * ge[i];
        d_gamma_v[i] = d_img_feat[i] * fp[i];
        d_gamma_e[i] = d_txt_feat[i] * ep[i];
      }
      AccumulateInto(df, GateBackward(t.f, gv, params.image_gate, d_gamma_v));
      AccumulateInto(de, GateBackward(t.e, ge, params.text_gate, d_gamma_e));
      break;
    case DualVariant::kSelfCross:
      for (std::size_t i = 0; i < k; ++i) {
        // f'' = gv fp + (1 - gv) ep ; e'' = ge ep + (1 - ge) fp
        d_img_proj[i] = d_img_feat[i] * gv[i] + d_txt_feat[i] * (1.0 - ge[i]);
        d_txt_proj[i] = d_img_feat[i] * (1.0 - gv[i]) + d_txt_feat[i] * ge[i];
        d_gamma_v[i] = d_img_feat[i] * (fp[i] - ep[i]);
        d_gamma_e[i] = d_txt_feat[i] * (ep[i] - fp[i]);
      }
      AccumulateInto(df, GateBackward(t.f, gv, params.image_gate, d_gamma_v));
      AccumulateInto(de, GateBackward(t.e, ge, params.text_gate, d_gamma_e));
      break;
  }

  AccumulateInto(df, DenseBackward(t.f, params.proj_image_w, params.proj_image_b,
                                   ReluBackward(t.proj.image_pre, d_img_proj)));
  AccumulateInto(de, DenseBackward(t.e, params.proj_text_w, params.proj_text_b,
                                   ReluBackward(t.proj.text_pre, d_txt_proj)));
  return {df, de};
}

}  // namespace crossfuse
