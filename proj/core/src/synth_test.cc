#include "crossfuse/synth.h"

#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "crossfuse/errors.h"
#include "crossfuse/splits.h"

namespace crossfuse {
namespace {

TEST(SynthTest, CountsAndBalance) {
  SynthConfig c;
  c.num_consistent = 500;
  c.num_inconsistent = 73;
  const Corpus corpus = GenerateSynthetic(c);
  ASSERT_EQ(corpus.size(), 573u);
  std::size_t inconsistent = 0;
  std::map<int, int> per_class;
  for (const Sample& s : corpus) {
    inconsistent += !s.consistent();
    if (s.consistent()) ++per_class[s.label_image];
    ASSERT_EQ(s.image_vec->size(), c.image_dim);
    ASSERT_EQ(s.text_vec->size(), c.text_dim);
  }
  EXPECT_EQ(inconsistent, 73u);
  ASSERT_EQ(per_class.size(), 5u);
  for (const auto& [label, n] : per_class) EXPECT_EQ(n, 100);
  EXPECT_NO_THROW(ValidateCorpus(corpus));
}

TEST(SynthTest, DeterministicPerSeed) {
  SynthConfig c;
  c.num_consistent = 50;
  const Corpus a = GenerateSynthetic(c);
  const Corpus b = GenerateSynthetic(c);
  c.seed = 1;
  const Corpus d = GenerateSynthetic(c);
  EXPECT_EQ(a[7].image_vec, b[7].image_vec);
  EXPECT_NE(a[7].image_vec, d[7].image_vec);
}

TEST(SynthTest, DamageTaskHasNoTextDisagreement) {
  SynthConfig c;
  c.task = 3;
  c.num_consistent = 30;
  c.num_inconsistent = 10;
  for (const Sample& s : GenerateSynthetic(c)) EXPECT_TRUE(s.consistent());
}

TEST(SynthTest, CueMarksMisleadingSamples) {
  // With no noise, the cue coordinates are nonzero exactly on the modality
  // that is *not* misleading, in roughly misleading_fraction of samples.
  SynthConfig c;
  c.num_consistent = 2000;
  c.noise = 0.0;
  c.misleading_fraction = 0.2;
  const Corpus corpus = GenerateSynthetic(c);
  int cued = 0;
  for (const Sample& s : corpus) {
    const auto& iv = *s.image_vec;
    const auto& tv = *s.text_vec;
    const bool img_cue = iv.back() != 0.0;
    const bool txt_cue = tv.back() != 0.0;
    EXPECT_FALSE(img_cue && txt_cue);
    cued += img_cue || txt_cue;
  }
  EXPECT_NEAR(cued / 2000.0, 0.2, 0.03);
}

TEST(SynthTest, RawModeProducesImagesAndText) {
  SynthConfig c;
  c.raw = true;
  c.num_consistent = 20;
  c.raw_image_side = 6;
  const Corpus corpus = GenerateSynthetic(c);
  for (const Sample& s : corpus) {
    ASSERT_TRUE(s.image.has_value());
    EXPECT_EQ(s.image->height, 6u);
    EXPECT_EQ(s.image->channels, 3u);
    ASSERT_TRUE(s.text.has_value());
    EXPECT_FALSE(s.text->tokens.empty());
    EXPECT_FALSE(s.image_vec.has_value());
  }
}

TEST(SynthTest, EventsAreTemporallyOrdered) {
  SynthConfig c;
  c.num_consistent = 90;
  c.num_events = 3;
  const Corpus corpus = GenerateSynthetic(c);
  EXPECT_NO_THROW(SplitSettingC(corpus, SynthEventName(2),
                                {SynthEventName(0), SynthEventName(1)}));
  EXPECT_THROW(SplitSettingC(corpus, SynthEventName(0), {SynthEventName(1)}),
               ProtocolError);
}

TEST(SynthTest, ValidateRejectsBadConfigs) {
  SynthConfig c;
  c.cue_dims = c.image_dim;
  EXPECT_THROW(GenerateSynthetic(c), ConfigError);
  c = SynthConfig{};
  c.misleading_fraction = 1.5;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SynthConfig{};
  c.num_events = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SynthConfig{};
  c.task = 9;
  EXPECT_THROW(GenerateSynthetic(c), ConfigError);
}

}  // namespace
}  // namespace crossfuse
