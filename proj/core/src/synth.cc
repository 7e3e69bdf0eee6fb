#include "crossfuse/synth.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "crossfuse/errors.h"
#include "crossfuse/rng.h"

namespace crossfuse {
namespace {

constexpr std::int64_t kEpoch2017 = 1483228800;  // 2017-01-01T00:00:00Z
constexpr std::int64_t kEventSpacing = 30 * 86400;
constexpr std::int64_t kEventLength = 20 * 86400;
constexpr std::size_t kWordsPerClass = 6;
constexpr std::size_t kTokensPerText = 8;

using Prototypes = std::vector<std::vector<double>>;

Prototypes MakePrototypes(std::size_t classes, std::size_t dim,
                          std::size_t cue_dims, double signal, Rng& rng) {
  Prototypes p(classes, std::vector<double>(dim, 0.0));
  for (auto& v : p) {
    for (std::size_t d = 0; d + cue_dims < dim; ++d) v[d] = signal * rng.Normal();
  }
  return p;
}

std::vector<double> Draw(const std::vector<double>& proto, double gain,
                         bool cue_on, const SynthConfig& c, Rng& rng) {
  std::vector<double> v(proto.size());
  const std::size_t content = proto.size() - c.cue_dims;
  for (std::size_t d = 0; d < v.size(); ++d) {
    v[d] = gain * proto[d] + c.noise * rng.Normal();
    if (d >= content && cue_on) v[d] += c.cue;
  }
  return v;
}

double RandomGain(double spread, Rng& rng) {
  if (spread == 1.0) return 1.0;
  const double l = std::log(spread);
  return std::exp(rng.Uniform(-l, l));
}

int OtherClass(int c, std::size_t classes, Rng& rng) {
  const int shift = 1 + static_cast<int>(rng.UniformIndex(classes - 1));
  return (c + shift) % static_cast<int>(classes);
}

// Class colour pattern plus noise, in [0, 1]; a bright top-left patch when
// the cue is on.
ImageInput RawImage(const std::vector<std::vector<double>>& palettes, int cls,
                    bool cue_on, const SynthConfig& c, Rng& rng) {
  const std::size_t s = c.raw_image_side;
  ImageInput img(s, s, 3, std::vector<double>(s * s * 3, 0.0));
  const auto& pal = palettes[static_cast<std::size_t>(cls)];
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t x = 0; x < s; ++x) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        double v = pal[((y * s + x) * 3 + ch) % pal.size()] +
                   0.25 * c.noise * rng.Normal();
        if (cue_on && y < 3 && x < 3) v = 1.0;
        img.at(y, x, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return img;
}

std::string RawText(int cls, bool cue_on, Rng& rng) {
  std::string out;
  for (std::size_t t = 0; t < kTokensPerText; ++t) {
    if (!out.empty()) out += ' ';
    // One in four tokens is shared filler.
    if (rng.Uniform() < 0.25) {
      out += "filler" + std::to_string(rng.UniformIndex(kWordsPerClass));
    } else {
      out += "Word" + std::to_string(cls) + "x" +
             std::to_string(rng.UniformIndex(kWordsPerClass));
    }
  }
  if (cue_on) out += " unverified";
  if (rng.Uniform() < 0.3) out += " https://t.co/" + std::to_string(rng.NextU64() % 100000);
  return out;
}

}  // namespace

void SynthConfig::Validate() const {
  GetTask(task);
  if (cue_dims >= image_dim || cue_dims >= text_dim) {
    throw ConfigError("synth cue_dims must be smaller than image_dim and text_dim");
  }
  if (!(misleading_fraction >= 0.0 && misleading_fraction <= 1.0)) {
    throw ConfigError("synth misleading_fraction must be in [0, 1]");
  }
  if (!(noise >= 0.0) || !(signal >= 0.0) || !(misleading_gain >= 0.0) || !(gain_spread >= 1.0)) {
    throw ConfigError("synth noise and signal must be non-negative");
  }
  if (num_events == 0) throw ConfigError("synth num_events must be >= 1");
  if (raw && raw_image_side < 4) throw ConfigError("synth raw_image_side must be >= 4");
}

std::string SynthEventName(std::size_t e) { return "event_" + std::to_string(e); }

Corpus GenerateSynthetic(const SynthConfig& c) {
  c.Validate();
  const TaskSpec& task = GetTask(c.task);
  const std::size_t classes = task.num_classes();
  Rng root(c.seed);
  Rng proto_rng = root.Derive(1);
  const Prototypes img_proto =
      MakePrototypes(classes, c.image_dim, c.cue_dims, c.signal, proto_rng);
  const Prototypes txt_proto =
      MakePrototypes(classes, c.text_dim, c.cue_dims, c.signal, proto_rng);
  std::vector<std::vector<double>> palettes(classes, std::vector<double>(12));
  for (auto& pal : palettes) {
    for (double& v : pal) v = proto_rng.Uniform();
  }

  Rng rng = root.Derive(2);
  Corpus out;
  const std::size_t total = c.num_consistent + c.num_inconsistent;
  out.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    Sample s;
    s.id = "synth-" + std::to_string(n);
    const int cls = static_cast<int>(n % classes);
    int img_cls = cls;
    int txt_cls = cls;
    bool img_cue = false;  // cue carried by the image: the text misleads
    bool txt_cue = false;  // cue carried by the text: the image misleads
    if (n < c.num_consistent) {
      s.label_image = s.label_text = cls;
      if (rng.Uniform() < c.misleading_fraction) {
        if (rng.Bernoulli(0.5)) {
          img_cls = OtherClass(cls, classes, rng);
          txt_cue = true;
        } else {
          txt_cls = OtherClass(cls, classes, rng);
          img_cue = true;
        }
      }
    } else {
      txt_cls = OtherClass(cls, classes, rng);
      s.label_image = cls;
      s.label_text = task.text_label_from_image ? cls : txt_cls;
    }
    if (c.raw) {
      s.image = RawImage(palettes, img_cls, img_cue, c, rng);
      s.text = NormalizeTweet(RawText(txt_cls, txt_cue, rng));
    } else {
      // The side opposite a cue is the misleading one.
      const double img_gain =
          (txt_cue ? c.misleading_gain : 1.0) * RandomGain(c.gain_spread, rng);
      const double txt_gain =
          (img_cue ? c.misleading_gain : 1.0) * RandomGain(c.gain_spread, rng);
      s.image_vec = Draw(img_proto[static_cast<std::size_t>(img_cls)], img_gain,
                         img_cue, c, rng);
      s.text_vec = Draw(txt_proto[static_cast<std::size_t>(txt_cls)], txt_gain,
                        txt_cue, c, rng);
    }
    const std::size_t ev = n % c.num_events;
    s.event = SynthEventName(ev);
    s.timestamp = kEpoch2017 + static_cast<std::int64_t>(ev) * kEventSpacing +
                  static_cast<std::int64_t>(rng.UniformIndex(kEventLength));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace crossfuse
