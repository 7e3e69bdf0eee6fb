#ifndef CROSSFUSE_SPLITS_H_
#define CROSSFUSE_SPLITS_H_

// Evaluation protocols over a corpus. Splits hold indices into the corpus.
//
//   A: consistent pairs only, stratified train/dev/test.
//   B: A's train plus every inconsistent pair (flagged for a forced text
//      transition); dev and test identical to A.
//   C: train on whole events that precede the test event; test on the test
//      event's consistent pairs.
//   D: unfiltered random train/test split.

#include <cstdint>
#include <string>
#include <vector>

#include "crossfuse/dataset.h"

namespace crossfuse {

enum class Setting { kA, kB, kC, kD };

std::string ToString(Setting s);
Setting ParseSetting(const std::string& s);

// Relative weights; need not sum to one.
struct SplitFractions {
  double train = 7876;
  double dev = 553;
  double test = 2821;
};

// Default D ratio mirrors setting B's train/test sizes.
inline constexpr double kSettingDTestFraction = 2821.0 / (12680.0 + 2821.0);

struct DatasetSplits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
  // Subset of train whose text transition is forced (p0 = 1).
  std::vector<std::size_t> forced_text;
  std::vector<std::string> warnings;
};

// Largest-remainder apportionment of n items by weight. Sums to n.
std::vector<std::size_t> Apportion(std::size_t n,
                                   const std::vector<double>& weights);

DatasetSplits SplitSettingA(const Corpus& corpus, const SplitFractions& fractions,
                            std::uint64_t seed);
DatasetSplits SplitSettingB(const Corpus& corpus, const DatasetSplits& setting_a);
// Throws ProtocolError naming the first train event whose latest sample is not
// strictly earlier than the test event's earliest sample, or an event with no
// samples. Throws ConfigError if the test event is also a train event.
DatasetSplits SplitSettingC(const Corpus& corpus, const std::string& test_event,
                            const std::vector<std::string>& train_events);
DatasetSplits SplitSettingD(const Corpus& corpus, double test_fraction,
                            std::uint64_t seed);

// Random disjoint (fit, holdout) partition of `indices` with
// round(fraction * n) held out. Order within each part follows `indices`.
struct Holdout {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> holdout;
};
Holdout HoldoutSplit(const std::vector<std::size_t>& indices, double fraction,
                     std::uint64_t seed);

}  // namespace crossfuse

#endif  // CROSSFUSE_SPLITS_H_
