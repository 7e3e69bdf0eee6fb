#include "crossfuse/image.h"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

ImageInput Ramp(std::size_t h, std::size_t w, std::size_t c) {
  std::vector<double> px(h * w * c);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<double>(i) / px.size();
  return ImageInput(h, w, c, px);
}

TEST(ImageTest, ConstructorValidates) {
  EXPECT_THROW(ImageInput(2, 2, 1, {0, 0, 0}), DimensionError);
  EXPECT_THROW(ImageInput(0, 2, 1, {}), DimensionError);
}

TEST(ImageTest, SameSizeResizeIsExact) {
  const ImageInput img = Ramp(5, 7, 3);
  EXPECT_EQ(ResizeBilinear(img, 5, 7), img);
}

// Expected values from OpenCV's INTER_LINEAR resize on float64 input,
// which uses the same half-pixel-center convention.
TEST(ImageTest, BilinearUpsampleMatchesOpenCv) {
  const ImageInput img(2, 3, 1, {0.0, 0.25, 0.5, 1.0, 0.75, 0.125});
  const ImageInput out = ResizeBilinear(img, 4, 5);
  const double expected[] = {0.0,  0.1,   0.25,   0.4,     0.5,
                             0.25, 0.3,   0.375,  0.39375, 0.40625,
                             0.75, 0.7,   0.625,  0.38125, 0.21875,
                             1.0,  0.9,   0.75,   0.375,   0.125};
  ASSERT_EQ(out.pixels.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(out.pixels[i], expected[i], 1e-12) << i;
}

TEST(ImageTest, BilinearDownsampleMatchesOpenCv) {
  std::vector<double> px(20);
  for (int i = 0; i < 20; ++i) px[i] = i / 19.0;
  const ImageInput out = ResizeBilinear(ImageInput(4, 5, 1, px), 2, 3);
  const double expected[] = {0.14912280701754385, 0.23684210526315788,
                             0.32456140350877194, 0.6754385964912281,
                             0.763157894736842,   0.8508771929824561};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(out.pixels[i], expected[i], 1e-12) << i;
}

TEST(ImageTest, ResizeShortSidePreservesAspect) {
  const ImageInput out = ResizeShortSide(Ramp(10, 20, 1), 5);
  EXPECT_EQ(out.height, 5u);
  EXPECT_EQ(out.width, 10u);
  const ImageInput tall = ResizeShortSide(Ramp(30, 9, 2), 6);
  EXPECT_EQ(tall.width, 6u);
  EXPECT_EQ(tall.height, 20u);
  EXPECT_EQ(tall.channels, 2u);
}

TEST(ImageTest, CropAndFlip) {
  const ImageInput img = Ramp(4, 4, 2);
  const ImageInput c = Crop(img, 1, 2, 2, 2);
  EXPECT_EQ(c.at(0, 0, 1), img.at(1, 2, 1));
  EXPECT_EQ(c.at(1, 1, 0), img.at(2, 3, 0));
  EXPECT_THROW(Crop(img, 3, 0, 2, 2), DimensionError);
  const ImageInput f = FlipHorizontal(img);
  EXPECT_EQ(f.at(2, 0, 1), img.at(2, 3, 1));
  EXPECT_EQ(FlipHorizontal(f), img);
}

TEST(ImageTest, AugmentEvaluationIsCenterCrop) {
  const ImageInput img = Ramp(10, 10, 3);
  Rng rng(0);
  const ImageInput out = AugmentImage(img, rng, {10, 6}, false);
  EXPECT_EQ(out, Crop(img, 2, 2, 6, 6));
}

TEST(ImageTest, AugmentTrainingCropsAndSometimesFlips) {
  const ImageInput img = Ramp(10, 10, 1);
  Rng rng(1);
  int flipped_or_shifted = 0;
  for (int i = 0; i < 50; ++i) {
    const ImageInput out = AugmentImage(img, rng, {10, 6}, true);
    ASSERT_EQ(out.height, 6u);
    ASSERT_EQ(out.width, 6u);
    if (out != Crop(img, 2, 2, 6, 6)) ++flipped_or_shifted;
  }
  EXPECT_GT(flipped_or_shifted, 25);
}

TEST(ImageTest, AugmentRejectsCropLargerThanResize) {
  Rng rng(0);
  EXPECT_THROW(AugmentImage(Ramp(4, 4, 1), rng, {4, 5}, false), ConfigError);
}

TEST(ImageTest, ReadNetpbm) {
  const auto path = std::filesystem::temp_directory_path() / "crossfuse_image_test.ppm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n# comment\n2 1\n255\n";
    const unsigned char raster[] = {255, 0, 51, 0, 255, 102};
    out.write(reinterpret_cast<const char*>(raster), sizeof(raster));
  }
  const ImageInput img = ReadNetpbm(path.string());
  EXPECT_EQ(img.height, 1u);
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.channels, 3u);
  EXPECT_DOUBLE_EQ(img.at(0, 0, 2), 0.2);
  EXPECT_DOUBLE_EQ(img.at(0, 1, 1), 1.0);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n2 1\n255\n" << "abc";
  }
  EXPECT_THROW(ReadNetpbm(path.string()), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(ReadNetpbm(path.string()), FormatError);
}

}  // namespace
}  // namespace crossfuse
