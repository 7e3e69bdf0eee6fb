#ifndef CROSSFUSE_IMAGE_H_
#define CROSSFUSE_IMAGE_H_

#include <cstddef>
#include <string>
#include <vector>

#include "crossfuse/rng.h"

namespace crossfuse {

// H x W x C image, pixels in [0, 1], stored row-major with channels last.
struct ImageInput {
  ImageInput() = default;
  ImageInput(std::size_t h, std::size_t w, std::size_t c, std::vector<double> px);

  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> pixels;

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * channels + c];
  }

  friend bool operator==(const ImageInput&, const ImageInput&) = default;
};

// Bilinear resampling with half-pixel centers; same-size resize is exact.
ImageInput ResizeBilinear(const ImageInput& img, std::size_t out_h,
                          std::size_t out_w);
// Resize so min(H, W) == short_side, preserving aspect ratio (the long side
// is rounded to the nearest pixel). Returns the input unchanged when the
// short side already matches.
ImageInput ResizeShortSide(const ImageInput& img, std::size_t short_side);
ImageInput Crop(const ImageInput& img, std::size_t top, std::size_t left,
                std::size_t h, std::size_t w);
ImageInput FlipHorizontal(const ImageInput& img);

struct AugmentConfig {
  std::size_t resize_short = 228;
  std::size_t crop = 224;
};

// Training: short-side resize, uniformly random crop x crop window, then a
// horizontal flip with probability 0.5. Evaluation: resize and center crop.
// Throws ConfigError if crop > resize_short.
ImageInput AugmentImage(const ImageInput& img, Rng& rng,
                        const AugmentConfig& config, bool training);

// Binary netpbm reader (P5 grayscale, P6 RGB, maxval <= 255).
ImageInput ReadNetpbm(const std::string& path);

}  // namespace crossfuse

#endif  // CROSSFUSE_IMAGE_H_
