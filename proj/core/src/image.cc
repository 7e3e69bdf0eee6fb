#include "crossfuse/image.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "crossfuse/errors.h"

namespace crossfuse {

ImageInput::ImageInput(std::size_t h, std::size_t w, std::size_t c,
                       std::vector<double> px)
    : height(h), width(w), channels(c), pixels(std::move(px)) {
  if (h == 0 || w == 0 || c == 0) {
    throw DimensionError("image dimensions must be positive");
  }
  if (pixels.size() != h * w * c) {
    throw DimensionError("image " + std::to_string(h) + "x" +
                         std::to_string(w) + "x" + std::to_string(c) +
                         " needs " + std::to_string(h * w * c) +
                         " pixels, got " + std::to_string(pixels.size()));
  }
}

ImageInput ResizeBilinear(const ImageInput& img, std::size_t out_h,
                          std::size_t out_w) {
  if (out_h == img.height && out_w == img.width) return img;
  ImageInput out(out_h, out_w, img.channels,
                 std::vector<double>(out_h * out_w * img.channels));
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (std::size_t y = 0; y < out_h; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                           static_cast<double>(img.height - 1));
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (std::size_t x = 0; x < out_w; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                             static_cast<double>(img.width - 1));
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (std::size_t c = 0; c < img.channels; ++c) {
        const double top = (1 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
        const double bot = (1 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
        out.at(y, x, c) = (1 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

ImageInput ResizeShortSide(const ImageInput& img, std::size_t short_side) {
  if (short_side == 0) throw ConfigError("resize target must be positive");
  const std::size_t cur = std::min(img.height, img.width);
  if (cur == short_side) return img;
  const double scale = static_cast<double>(short_side) / cur;
  std::size_t h = img.height == cur
                      ? short_side
                      : static_cast<std::size_t>(std::lround(img.height * scale));
  std::size_t w = img.height == cur
                      ? static_cast<std::size_t>(std::lround(img.width * scale))
                      : short_side;
  return ResizeBilinear(img, std::max(h, short_side), std::max(w, short_side));
}

ImageInput Crop(const ImageInput& img, std::size_t top, std::size_t left,
                std::size_t h, std::size_t w) {
  if (h == 0 || w == 0 || top + h > img.height || left + w > img.width) {
    throw DimensionError("crop window out of bounds");
  }
  ImageInput out(h, w, img.channels, std::vector<double>(h * w * img.channels));
  for (std::size_t y = 0; y < h; ++y) {
    const double* src = &img.pixels[((top + y) * img.width + left) * img.channels];
    std::copy(src, src + w * img.channels, &out.pixels[y * w * img.channels]);
  }
  return out;
}

ImageInput FlipHorizontal(const ImageInput& img) {
  ImageInput out = img;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t c = 0; c < img.channels; ++c) {
        out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
      }
    }
  }
  return out;
}

ImageInput AugmentImage(const ImageInput& img, Rng& rng,
                        const AugmentConfig& config, bool training) {
  if (config.crop == 0 || config.crop > config.resize_short) {
    throw ConfigError("crop size " + std::to_string(config.crop) +
                      " must be in [1, resize_short=" +
                      std::to_string(config.resize_short) + "]");
  }
  if (img.height == 0 || img.width == 0) throw DimensionError("empty image");
  ImageInput resized = ResizeShortSide(img, config.resize_short);
  const std::size_t max_top = resized.height - config.crop;
  const std::size_t max_left = resized.width - config.crop;
  if (!training) {
    return Crop(resized, max_top / 2, max_left / 2, config.crop, config.crop);
  }
  const std::size_t top = rng.UniformIndex(max_top + 1);
  const std::size_t left = rng.UniformIndex(max_left + 1);
  ImageInput out = Crop(resized, top, left, config.crop, config.crop);
  if (rng.Bernoulli(0.5)) out = FlipHorizontal(out);
  return out;
}

ImageInput ReadNetpbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") {
    throw FormatError(path + ": unsupported netpbm magic '" + magic + "'");
  }
  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
    long v = -1;
    in >> v;
    if (!in || v <= 0) throw FormatError(path + ": bad netpbm header");
    return static_cast<std::size_t>(v);
  };
  const std::size_t w = next_int();
  const std::size_t h = next_int();
  const std::size_t maxval = next_int();
  if (maxval > 255) throw FormatError(path + ": 16-bit netpbm not supported");
  in.get();  // single whitespace before raster
  const std::size_t c = magic == "P6" ? 3 : 1;
  std::vector<unsigned char> raw(h * w * c);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw FormatError(path + ": truncated raster");
  }
  std::vector<double> px(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    px[i] = static_cast<double>(raw[i]) / static_cast<double>(maxval);
  }
  return ImageInput(h, w, c, std::move(px));
}

}  // namespace crossfuse
