#ifndef CROSSFUSE_SYNTH_H_
#define CROSSFUSE_SYNTH_H_

// Synthetic paired corpora with controllable class count, modality noise and
// a fraction of samples whose image or text content points to the wrong
// class. In such a misleading sample the *other* modality carries a cue
// (a shift on a few reserved coordinates), so a model that gates one
// modality on the other can learn to ignore the misleading side.

#include <cstdint>
#include <string>

#include "crossfuse/dataset.h"
#include "crossfuse/task.h"

namespace crossfuse {

struct SynthConfig {
  int task = 2;
  std::size_t image_dim = 32;
  std::size_t text_dim = 32;
  std::size_t num_consistent = 2750;
  // Extra pairs whose image and text labels differ.
  std::size_t num_inconsistent = 0;
  double misleading_fraction = 0.2;
  double signal = 1.0;  // prototype scale per coordinate
  double noise = 1.0;   // Gaussian noise per coordinate
  double cue = 3.0;     // shift on the cue coordinates
  // Prototype scale of the misleading modality relative to `signal`; a loud
  // wrong modality cannot be cancelled additively.
  double misleading_gain = 3.0;
  // Every modality's content is also scaled by a log-uniform factor in
  // [1/gain_spread, gain_spread], so loudness alone identifies nothing.
  double gain_spread = 1.0;
  std::size_t cue_dims = 4;
  std::size_t num_events = 1;
  // Raw mode: inline images and tokenized text instead of vectors.
  bool raw = false;
  std::size_t raw_image_side = 10;
  std::uint64_t seed = 0;

  void Validate() const;  // throws ConfigError
};

Corpus GenerateSynthetic(const SynthConfig& config);

// Event name used for event index e.
std::string SynthEventName(std::size_t e);

}  // namespace crossfuse

#endif  // CROSSFUSE_SYNTH_H_
