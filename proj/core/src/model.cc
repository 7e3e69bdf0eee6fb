#include "crossfuse/model.h"

#include <nlohmann/json.hpp>

#include "crossfuse/errors.h"
#include "crossfuse/ops.h"

namespace crossfuse {
namespace {

const ModelSpec& Validated(const ModelSpec& s) {
  s.Validate();
  return s;
}

}  // namespace

void ModelSpec::Validate() const {
  if (kind == ModelKind::kDual) {
    dual.Validate();
  } else {
    fusion.Validate();
  }
  if (image_encoder) {
    if (image_encoder->out_dim != image_dim()) {
      throw ConfigError("image_encoder.out_dim (" +
                        std::to_string(image_encoder->out_dim) +
                        ") must equal image_dim (" + std::to_string(image_dim()) +
                        ")");
    }
    if (augment.crop > augment.resize_short) {
      throw ConfigError("augment.crop must not exceed augment.resize_short");
    }
    if (image_encoder->height != augment.crop ||
        image_encoder->width != augment.crop) {
      throw ConfigError("image_encoder height/width must equal augment.crop (" +
                        std::to_string(augment.crop) + ")");
    }
    if (image_encoder->channels == 0) {
      throw ConfigError("image_encoder.channels must be positive");
    }
  }
  if (text_encoder) {
    if (text_encoder->out_dim != text_dim()) {
      throw ConfigError("text_encoder.out_dim (" +
                        std::to_string(text_encoder->out_dim) +
                        ") must equal text_dim (" + std::to_string(text_dim()) +
                        ")");
    }
    if (text_encoder->vocab_buckets == 0) {
      throw ConfigError("text_encoder.vocab_buckets must be positive");
    }
  }
}

void to_json(nlohmann::json& j, const ModelSpec& s) {
  j = nlohmann::json::object();
  if (s.kind == ModelKind::kDual) {
    j["kind"] = "dual";
    j["dual"] = s.dual;
  } else {
    j["kind"] = "fusion";
    j["fusion"] = s.fusion;
  }
  if (s.image_encoder) {
    j["image_encoder"] = {{"height", s.image_encoder->height},
                          {"width", s.image_encoder->width},
                          {"channels", s.image_encoder->channels},
                          {"out_dim", s.image_encoder->out_dim}};
    j["augment"] = {{"resize_short", s.augment.resize_short},
                    {"crop", s.augment.crop}};
  }
  if (s.text_encoder) {
    j["text_encoder"] = {{"vocab_buckets", s.text_encoder->vocab_buckets},
                         {"out_dim", s.text_encoder->out_dim}};
  }
}

void from_json(const nlohmann::json& j, ModelSpec& s) {
  const std::string kind = j.value("kind", std::string("fusion"));
  if (kind == "dual") {
    s.kind = ModelKind::kDual;
  } else if (kind == "fusion") {
    s.kind = ModelKind::kFusion;
  } else {
    throw ConfigError("model.kind must be fusion|dual, got '" + kind + "'");
  }
  if (j.contains("fusion")) j.at("fusion").get_to(s.fusion);
  if (j.contains("dual")) j.at("dual").get_to(s.dual);
  if (j.contains("image_encoder")) {
    const auto& e = j.at("image_encoder");
    ImageEncoderConfig c;
    c.height = e.value("height", c.height);
    c.width = e.value("width", c.width);
    c.channels = e.value("channels", c.channels);
    c.out_dim = e.value("out_dim", c.out_dim);
    s.image_encoder = c;
  }
  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    s.augment.resize_short = a.value("resize_short", s.augment.resize_short);
    s.augment.crop = a.value("crop", s.augment.crop);
  }
  if (j.contains("text_encoder")) {
    const auto& e = j.at("text_encoder");
    TextEncoderConfig c;
    c.vocab_buckets = e.value("vocab_buckets", c.vocab_buckets);
    c.out_dim = e.value("out_dim", c.out_dim);
    s.text_encoder = c;
  }
}

Model::Model(const ModelSpec& spec) : spec_(Validated(spec)) {
  if (spec_.image_encoder) image_encoder_.emplace(*spec_.image_encoder);
  if (spec_.text_encoder) text_encoder_.emplace(*spec_.text_encoder);
  if (spec_.kind == ModelKind::kDual) {
    dual_ = DualHeadParams(spec_.dual);
  } else {
    fusion_ = FusionParams(spec_.fusion);
  }
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  if (image_encoder_) {
    for (Parameter* p : image_encoder_->parameters()) out.push_back(p);
  }
  if (text_encoder_) {
    for (Parameter* p : text_encoder_->parameters()) out.push_back(p);
  }
  const auto net = spec_.kind == ModelKind::kDual ? dual_.parameters()
                                                  : fusion_.parameters();
  out.insert(out.end(), net.begin(), net.end());
  return out;
}

void Model::Init(std::uint64_t seed) { InitParameters(parameters(), seed); }

Model::Encoded Model::Encode(const Sample& image_from, const Sample& text_from,
                             Rng& rng, bool training) const {
  Encoded out;
  if (image_encoder_) {
    if (!image_from.image) {
      throw DimensionError("sample '" + image_from.id + "' has no raw image");
    }
    const ImageInput img =
        AugmentImage(*image_from.image, rng, spec_.augment, training);
    out.image_trace = image_encoder_->Forward(img);
    out.f = out.image_trace->output;
  } else {
    if (!image_from.image_vec) {
      throw DimensionError("sample '" + image_from.id + "' has no image_vec");
    }
    out.f = Tensor::Vector(*image_from.image_vec);
  }
  if (text_encoder_) {
    if (!text_from.text) {
      throw DimensionError("sample '" + text_from.id + "' has no text");
    }
    out.text_trace = text_encoder_->Forward(*text_from.text);
    out.e = out.text_trace->output;
  } else {
    if (!text_from.text_vec) {
      throw DimensionError("sample '" + text_from.id + "' has no text_vec");
    }
    out.e = Tensor::Vector(*text_from.text_vec);
  }
  return out;
}

void Model::CheckLabels(std::span<const int> labels) const {
  if (labels.size() != num_heads()) {
    throw DimensionError("model has " + std::to_string(num_heads()) +
                         " heads but got " + std::to_string(labels.size()) +
                         " labels");
  }
}

std::vector<Tensor> Model::Logits(const Sample& image_from,
                                  const Sample& text_from) const {
  Rng unused(0);
  const Encoded enc = Encode(image_from, text_from, unused, false);
  if (spec_.kind == ModelKind::kDual) {
    const DualTrace t = DualForward(enc.f, enc.e, dual_, spec_.dual, unused, false);
    return {t.image_logits(), t.text_logits()};
  }
  return {FuseLogits(enc.f, enc.e, fusion_, spec_.fusion)};
}

std::vector<int> Model::Predict(const Sample& s) const {
  std::vector<int> out;
  for (const Tensor& logits : Logits(s)) out.push_back(crossfuse::Predict(logits));
  return out;
}

double Model::Loss(const Sample& s, std::span<const int> labels) const {
  CheckLabels(labels);
  const auto logits = Logits(s);
  double loss = 0.0;
  for (std::size_t h = 0; h < logits.size(); ++h) {
    loss += SoftmaxCrossEntropy(logits[h], labels[h]).loss;
  }
  return loss;
}

Model::Pass Model::TrainingPass(const Sample& image_from,
                                const Sample& text_from,
                                std::span<const int> labels, Rng& rng) const {
  CheckLabels(labels);
  Pass p;
  p.enc = Encode(image_from, text_from, rng, true);
  if (spec_.kind == ModelKind::kDual) {
    p.dual = DualForward(p.enc.f, p.enc.e, dual_, spec_.dual, rng, true);
    p.losses.push_back(SoftmaxCrossEntropy(p.dual->image_logits(), labels[0]));
    p.losses.push_back(SoftmaxCrossEntropy(p.dual->text_logits(), labels[1]));
  } else {
    p.fusion = FuseForward(p.enc.f, p.enc.e, fusion_, spec_.fusion, rng, true);
    p.losses.push_back(SoftmaxCrossEntropy(p.fusion->logits(), labels[0]));
  }
  return p;
}

double Model::TrainingLoss(const Sample& image_from, const Sample& text_from,
                           std::span<const int> labels, Rng rng) const {
  double loss = 0.0;
  for (const auto& l : TrainingPass(image_from, text_from, labels, rng).losses) {
    loss += l.loss;
  }
  return loss;
}

double Model::Accumulate(const Sample& image_from, const Sample& text_from,
                         std::span<const int> labels, double grad_scale,
                         Rng& rng) {
  Pass p = TrainingPass(image_from, text_from, labels, rng);
  double loss = 0.0;
  for (auto& l : p.losses) {
    loss += l.loss;
    for (double& g : l.grad.values()) g *= grad_scale;
  }
  std::pair<Tensor, Tensor> d_inputs;
  if (p.dual) {
    d_inputs = DualBackward(*p.dual, dual_, spec_.dual, p.losses[0].grad,
                            p.losses[1].grad);
  } else {
    d_inputs = FuseBackward(*p.fusion, fusion_, spec_.fusion, p.losses[0].grad);
  }
  if (image_encoder_) image_encoder_->Backward(*p.enc.image_trace, d_inputs.first);
  if (text_encoder_) text_encoder_->Backward(*p.enc.text_trace, d_inputs.second);
  return loss;
}

std::vector<Tensor> Model::Snapshot() {
  std::vector<Tensor> out;
  for (Parameter* p : parameters()) out.push_back(p->value);
  return out;
}

void Model::Restore(const std::vector<Tensor>& values) {
  auto params = parameters();
  if (values.size() != params.size()) {
    throw DimensionError("restore: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].shape() != params[i]->value.shape()) {
      throw DimensionError("restore: shape mismatch for " + params[i]->name);
    }
    params[i]->value = values[i];
  }
}

GradCheckReport CheckModelGradients(Model& model, const Sample& sample,
                                    std::span<const int> labels,
                                    const ModelGradCheckOptions& options) {
  const Rng rng(options.seed);
  auto params = model.parameters();
  for (Parameter* p : params) p->ZeroGrad();
  Rng step_rng = rng;
  model.Accumulate(sample, sample, labels, 1.0, step_rng);
  if (options.after_backward) options.after_backward(params);
  const auto numeric = FiniteDiffGrad(
      [&] { return model.TrainingLoss(sample, sample, labels, rng); }, params,
      options.eps);
  return CompareGradients(params, numeric, nullptr, options.floor);
}

}  // namespace crossfuse
