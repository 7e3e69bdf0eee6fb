#ifndef CROSSFUSE_DATASET_H_
#define CROSSFUSE_DATASET_H_

// Paired image/text samples and the JSON-lines corpus format:
//
//   {"id": "...", "text": "...", "image": "path.ppm" | {inline pixels},
//    "image_vec": [...], "text_vec": [...], "label_image": "...",
//    "label_text": "...", "event": "...", "timestamp": "2017-10-09T12:00:00Z"}

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crossfuse/image.h"
#include "crossfuse/task.h"
#include "crossfuse/text_normalize.h"

namespace crossfuse {

struct Sample {
  std::string id;
  std::optional<ImageInput> image;
  std::optional<std::vector<double>> image_vec;
  std::optional<TextInput> text;
  std::optional<std::vector<double>> text_vec;
  int label_image = -1;
  int label_text = -1;
  std::string event;
  std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC

  bool consistent() const { return label_image == label_text; }
};

using Corpus = std::vector<Sample>;

struct LoadStats {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t dropped_label = 0;  // label outside the task's class set
};

// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS[.frac][Z|+HH:MM|-HH:MM]" (a space
// may replace 'T'). Throws FormatError.
std::int64_t ParseTimestamp(std::string_view iso);
// "YYYY-MM-DDTHH:MM:SSZ".
std::string FormatTimestamp(std::int64_t seconds);

// Relative image paths resolve against `base_dir`. Samples whose label falls
// outside the task are dropped and counted. Throws FormatError with the line
// number on malformed records.
Corpus ReadCorpus(std::istream& in, const TaskSpec& task,
                  const std::string& base_dir = ".", LoadStats* stats = nullptr);
Corpus LoadCorpus(const std::string& path, const TaskSpec& task,
                  LoadStats* stats = nullptr);

// Writes labels by class name; images are written inline.
void WriteCorpus(std::ostream& out, const Corpus& corpus, const TaskSpec& task);
void SaveCorpus(const std::string& path, const Corpus& corpus,
                const TaskSpec& task);

// Throws DimensionError unless every sample has a representation for each
// modality and precomputed vectors have a constant length.
void ValidateCorpus(const Corpus& corpus);

}  // namespace crossfuse

#endif  // CROSSFUSE_DATASET_H_
