#ifndef CROSSFUSE_ENCODERS_H_
#define CROSSFUSE_ENCODERS_H_

// Stand-ins for the image and text backbones. Both map an input to a fixed
// length feature vector through dense -> ReLU and are trainable end to end;
// real backbone features can bypass them via precomputed vectors.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "crossfuse/image.h"
#include "crossfuse/rng.h"
#include "crossfuse/tensor.h"
#include "crossfuse/text_normalize.h"

namespace crossfuse {

inline constexpr std::size_t kDefaultTextDim = 756;
inline constexpr std::size_t kDefaultVocabBuckets = 2048;

struct ImageEncoderConfig {
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t channels = 3;
  std::size_t out_dim = 64;  // D_f

  std::size_t input_dim() const { return height * width * channels; }
};

struct TextEncoderConfig {
  std::size_t vocab_buckets = kDefaultVocabBuckets;
  std::size_t out_dim = kDefaultTextDim;  // D_e
};

// Flatten -> dense -> ReLU.
class ToyImageEncoder {
 public:
  struct Trace {
    Tensor input;
    Tensor pre;
    Tensor output;
  };

  explicit ToyImageEncoder(const ImageEncoderConfig& config);

  const ImageEncoderConfig& config() const { return config_; }
  Trace Forward(const ImageInput& img) const;
  Tensor Encode(const ImageInput& img) const { return Forward(img).output; }
  void Backward(const Trace& trace, const Tensor& d_out);

  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

 private:
  ImageEncoderConfig config_;
  Parameter weight_;
  Parameter bias_;
};

// Stable 64-bit FNV-1a of a token.
inline std::uint64_t HashToken(std::string_view token) { return HashString(token); }

// (bucket, count) pairs sorted by bucket; the hashed bag of words.
using SparseCounts = std::vector<std::pair<std::size_t, double>>;
SparseCounts BagOfWords(const std::vector<std::string>& tokens,
                        std::size_t buckets);

// Hashed bag of words -> dense -> ReLU.
class ToyTextEncoder {
 public:
  struct Trace {
    SparseCounts counts;
    Tensor pre;
    Tensor output;
  };

  explicit ToyTextEncoder(const TextEncoderConfig& config);

  const TextEncoderConfig& config() const { return config_; }
  Trace Forward(const TextInput& text) const;
  Tensor Encode(const TextInput& text) const { return Forward(text).output; }
  void Backward(const Trace& trace, const Tensor& d_out);

  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

 private:
  TextEncoderConfig config_;
  Parameter weight_;
  Parameter bias_;
};

}  // namespace crossfuse

#endif  // CROSSFUSE_ENCODERS_H_
