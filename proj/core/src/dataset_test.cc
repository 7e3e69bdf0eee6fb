#include "crossfuse/dataset.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

// Expected epoch seconds from Python's datetime.fromisoformat.
TEST(DatasetTest, ParseTimestamp) {
  EXPECT_EQ(ParseTimestamp("2017-10-09T12:00:00Z"), 1507550400);
  EXPECT_EQ(ParseTimestamp("2017-10-09 12:00:00"), 1507550400);
  EXPECT_EQ(ParseTimestamp("2017-09-20T06:30:15+02:00"), 1505881815);
  EXPECT_EQ(ParseTimestamp("2016-02-29T23:59:59-05:30"), 1456810199);
  EXPECT_EQ(ParseTimestamp("1969-12-31T23:59:59Z"), -1);
  EXPECT_EQ(ParseTimestamp("2017-10-09T12:00:00.750Z"), 1507550400);
  EXPECT_EQ(ParseTimestamp("2017-10-09"), 1507507200);
}

TEST(DatasetTest, ParseTimestampRejectsGarbage) {
  for (const char* bad : {"", "2017", "2017-13-01", "2017-02-30", "2017-10-09T25:00:00",
                          "2017-10-09T12:00:00+5", "yesterday"}) {
    EXPECT_THROW(ParseTimestamp(bad), FormatError) << bad;
  }
}

TEST(DatasetTest, FormatTimestampRoundTrip) {
  for (std::int64_t t : {std::int64_t{0}, std::int64_t{1507550400}, std::int64_t{-86401},
                         std::int64_t{951782400}}) {
    EXPECT_EQ(ParseTimestamp(FormatTimestamp(t)), t);
  }
  EXPECT_EQ(FormatTimestamp(1507550400), "2017-10-09T12:00:00Z");
}

TEST(DatasetTest, ReadCorpusResolvesLabelsAndDrops) {
  std::stringstream in(
      R"({"id":"a","text":"Bridge DOWN http://x","image_vec":[1,2],"text_vec":[3],"label_image":"infrastructure_and_utility_damage","label_text":"injured_or_dead_people","event":"e1","timestamp":"2017-10-09T12:00:00Z"})"
      "\n\n"
      R"({"id":"b","image_vec":[1,2],"text_vec":[3],"label_image":"not_humanitarian","label_text":"other_relevant"})"
      "\n"
      R"({"id":7,"image_vec":[0,0],"text_vec":[1],"label_image":"vehicle_damage","label_text":"vehicle_damage","timestamp":5})"
      "\n");
  LoadStats stats;
  const Corpus c = ReadCorpus(in, GetTask(2), ".", &stats);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(stats.lines, 3u);
  EXPECT_EQ(stats.loaded, 2u);
  EXPECT_EQ(stats.dropped_label, 1u);
  EXPECT_EQ(c[0].label_image, 0);
  EXPECT_EQ(c[0].label_text, 3);
  EXPECT_FALSE(c[0].consistent());
  EXPECT_EQ(c[0].text->normalized, "bridge down link");
  EXPECT_EQ(c[0].timestamp, 1507550400);
  EXPECT_EQ(c[1].id, "7");
  EXPECT_EQ(c[1].timestamp, 5);
  EXPECT_TRUE(c[1].consistent());
}

TEST(DatasetTest, DamageTaskCopiesImageLabel) {
  std::stringstream in(
      R"({"id":"a","image_vec":[1],"text_vec":[1],"label_image":"severe_damage"})" "\n");
  const Corpus c = ReadCorpus(in, GetTask(3));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].label_text, 0);
}

TEST(DatasetTest, MalformedLinesNameTheLine) {
  std::stringstream in(
      R"({"id":"a","image_vec":[1],"text_vec":[1],"label_image":"informative","label_text":"informative"})"
      "\n{not json\n");
  try {
    ReadCorpus(in, GetTask(1));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::stringstream missing(R"({"id":"a","image_vec":[1],"text_vec":[1],"label_image":"informative"})" "\n");
  EXPECT_THROW(ReadCorpus(missing, GetTask(1)), FormatError);
  std::stringstream bad_image(
      R"({"id":"a","image":{"height":2,"width":2,"channels":1,"pixels":[1]},"text":"x","label_image":"informative","label_text":"informative"})" "\n");
  EXPECT_THROW(ReadCorpus(bad_image, GetTask(1)), FormatError);
}

TEST(DatasetTest, ImagePathsResolveAgainstCorpusDir) {
  const auto dir = std::filesystem::temp_directory_path() / "crossfuse_dataset_test";
  std::filesystem::create_directories(dir / "img");
  {
    std::ofstream pgm(dir / "img" / "a.pgm", std::ios::binary);
    pgm << "P5\n2 2\n255\n";
    const char px[] = {0, 0, 0, 0};
    pgm.write(px, 4);
    std::ofstream corpus(dir / "data.jsonl");
    corpus << R"({"id":"a","image":"img/a.pgm","text":"hi","label_image":"informative","label_text":"informative"})" "\n";
  }
  const Corpus c = LoadCorpus((dir / "data.jsonl").string(), GetTask(1));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].image->height, 2u);
  EXPECT_EQ(c[0].image->channels, 1u);
  std::filesystem::remove_all(dir);
}

TEST(DatasetTest, WriteReadRoundTrip) {
  Corpus c(2);
  c[0].id = "x";
  c[0].image = ImageInput(1, 2, 1, {0.25, 1.0 / 3.0});
  c[0].text = NormalizeTweet("Hello WORLD");
  c[0].label_image = 1;
  c[0].label_text = 0;
  c[0].event = "ev";
  c[0].timestamp = 1507550400;
  c[1].id = "y";
  c[1].image_vec = std::vector<double>{0.1, 0.2};
  c[1].text_vec = std::vector<double>{-1.0};
  c[1].label_image = c[1].label_text = 0;
  std::stringstream ss;
  WriteCorpus(ss, c, GetTask(1));
  const Corpus back = ReadCorpus(ss, GetTask(1));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].image, c[0].image);
  EXPECT_EQ(back[0].text->raw, "Hello WORLD");
  EXPECT_EQ(back[0].label_image, 1);
  EXPECT_EQ(back[0].timestamp, c[0].timestamp);
  EXPECT_EQ(back[1].image_vec, c[1].image_vec);
  EXPECT_EQ(back[1].text_vec, c[1].text_vec);
}

TEST(DatasetTest, ValidateCorpus) {
  Corpus c(2);
  c[0].id = "a";
  c[0].image_vec = std::vector<double>{1, 2};
  c[0].text_vec = std::vector<double>{1};
  c[1] = c[0];
  c[1].id = "b";
  EXPECT_NO_THROW(ValidateCorpus(c));
  c[1].image_vec = std::vector<double>{1};
  EXPECT_THROW(ValidateCorpus(c), DimensionError);
  c[1].image_vec.reset();
  EXPECT_THROW(ValidateCorpus(c), DimensionError);
}

}  // namespace
}  // namespace crossfuse
