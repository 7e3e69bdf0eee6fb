#include "crossfuse/splits.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "crossfuse/errors.h"
#include "crossfuse/rng.h"

namespace crossfuse {
namespace {

void WarnMissingClasses(const Corpus& corpus, DatasetSplits& s) {
  std::set<int> all;
  for (std::size_t i : s.train) all.insert(corpus[i].label_image);
  for (std::size_t i : s.dev) all.insert(corpus[i].label_image);
  for (std::size_t i : s.test) all.insert(corpus[i].label_image);
  const std::pair<const char*, const std::vector<std::size_t>*> parts[] = {
      {"train", &s.train}, {"dev", &s.dev}, {"test", &s.test}};
  for (const auto& [name, idx] : parts) {
    if (idx->empty()) continue;
    std::set<int> seen;
    for (std::size_t i : *idx) seen.insert(corpus[i].label_image);
    for (int c : all) {
      if (!seen.count(c)) {
        s.warnings.push_back("class " + std::to_string(c) + " absent from " +
                             name + " split");
      }
    }
  }
}

}  // namespace

std::string ToString(Setting s) {
  switch (s) {
    case Setting::kA: return "A";
    case Setting::kB: return "B";
    case Setting::kC: return "C";
    case Setting::kD: return "D";
  }
  return "?";
}

Setting ParseSetting(const std::string& s) {
  if (s == "A" || s == "a") return Setting::kA;
  if (s == "B" || s == "b") return Setting::kB;
  if (s == "C" || s == "c") return Setting::kC;
  if (s == "D" || s == "d") return Setting::kD;
  throw ConfigError("setting must be A, B, C or D, got '" + s + "'");
}

std::vector<std::size_t> Apportion(std::size_t n,
                                   const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("split weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("split weights must not all be zero");
  std::vector<std::size_t> out(weights.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    const double exact = static_cast<double>(n) * weights[s] / total;
    out[s] = static_cast<std::size_t>(std::floor(exact));
    used += out[s];
    rem.push_back({exact - std::floor(exact), s});
  }
  // Largest remainder first; ties to the earlier part.
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++out[rem[k % rem.size()].second];
  return out;
}

DatasetSplits SplitSettingA(const Corpus& corpus, const SplitFractions& fractions,
                            std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].consistent()) by_class[corpus[i].label_image].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> order;
  for (auto& [label, members] : by_class) {
    Rng class_rng = rng.Derive(static_cast<std::uint64_t>(label));
    class_rng.Shuffle(members);
    order.insert(order.end(), members.begin(), members.end());
  }
  DatasetSplits out;
  const std::size_t n = order.size();
  if (n == 0) return out;
  const auto target =
      Apportion(n, {fractions.train, fractions.dev, fractions.test});
  // Walking the class-grouped order, each item goes to the part furthest
  // behind its proportional quota. Every class is then spread across the
  // parts in proportion while the totals hit the targets exactly.
  std::vector<std::size_t>* parts[] = {&out.train, &out.dev, &out.test};
  std::size_t assigned[3] = {0, 0, 0};
  for (std::size_t k = 0; k < n; ++k) {
    int best = -1;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
      if (assigned[s] >= target[s]) continue;
      const double deficit =
          static_cast<double>(target[s]) * static_cast<double>(k + 1) /
              static_cast<double>(n) -
          static_cast<double>(assigned[s]);
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    parts[best]->push_back(order[k]);
    ++assigned[best];
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  WarnMissingClasses(corpus, out);
  return out;
}

DatasetSplits SplitSettingB(const Corpus& corpus, const DatasetSplits& setting_a) {
  DatasetSplits out = setting_a;
  out.forced_text.clear();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].consistent()) {
      out.train.push_back(i);
      out.forced_text.push_back(i);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  return out;
}

DatasetSplits SplitSettingC(const Corpus& corpus, const std::string& test_event,
                            const std::vector<std::string>& train_events) {
  struct Range {
    std::int64_t min = std::numeric_limits<std::int64_t>::max();
    std::int64_t max = std::numeric_limits<std::int64_t>::min();
    std::size_t count = 0;
  };
  std::map<std::string, Range> ranges;
  for (const Sample& s : corpus) {
    Range& r = ranges[s.event];
    r.min = std::min(r.min, s.timestamp);
    r.max = std::max(r.max, s.timestamp);
    ++r.count;
  }
  const auto test_it = ranges.find(test_event);
  if (test_it == ranges.end()) {
    throw ProtocolError("test event '" + test_event + "' has no samples");
  }
  const std::set<std::string> train_set(train_events.begin(), train_events.end());
  if (train_set.count(test_event)) {
    throw ConfigError("event '" + test_event + "' is both train and test");
  }
  for (const std::string& ev : train_events) {
    const auto it = ranges.find(ev);
    if (it == ranges.end()) {
      throw ProtocolError("train event '" + ev + "' has no samples");
    }
    if (!(it->second.max < test_it->second.min)) {
      throw ProtocolError("train event '" + ev + "' (latest " +
                          FormatTimestamp(it->second.max) +
                          ") does not precede test event '" + test_event +
                          "' (earliest " + FormatTimestamp(test_it->second.min) +
                          ")");
    }
  }
  DatasetSplits out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Sample& s = corpus[i];
    if (train_set.count(s.event)) {
      out.train.push_back(i);
    } else if (s.event == test_event && s.consistent()) {
      out.test.push_back(i);
    }
  }
  WarnMissingClasses(corpus, out);
  return out;
}

DatasetSplits SplitSettingD(const Corpus& corpus, double test_fraction,
                            std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("setting D test fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.Shuffle(order);
  DatasetSplits out;
  if (order.empty()) return out;
  const auto sizes = Apportion(order.size(), {1.0 - test_fraction, test_fraction});
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sizes[0]));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(sizes[0]), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  WarnMissingClasses(corpus, out);
  return out;
}

Holdout HoldoutSplit(const std::vector<std::size_t>& indices, double fraction,
                     std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw ConfigError("holdout fraction must be in [0, 1)");
  }
  const std::size_t n = indices.size();
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  Rng rng(seed, 0x401d);
  rng.Shuffle(pos);
  std::vector<bool> held(n, false);
  for (std::size_t t = 0; t < k; ++t) held[pos[t]] = true;
  Holdout out;
  for (std::size_t p = 0; p < n; ++p) {
    (held[p] ? out.holdout : out.fit).push_back(indices[p]);
  }
  return out;
}

}  // namespace crossfuse
