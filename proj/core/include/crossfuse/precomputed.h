#ifndef CROSSFUSE_PRECOMPUTED_H_
#define CROSSFUSE_PRECOMPUTED_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace crossfuse {

// One externally computed feature vector, e.g. a backbone embedding.
struct PrecomputedVector {
  std::string id;
  std::vector<double> vec;

  friend bool operator==(const PrecomputedVector&, const PrecomputedVector&) = default;
};

// Line-delimited JSON, one {"id": string, "vec": [numbers]} per line. Blank
// lines are skipped. All vectors must share one dimension; a ragged entry
// raises FormatError naming its id.
std::vector<PrecomputedVector> LoadPrecomputed(const std::string& path);
std::vector<PrecomputedVector> ReadPrecomputed(std::istream& in);

// Writes doubles in shortest round-trip form, so reload is bit-exact.
void WritePrecomputed(const std::string& path,
                      const std::vector<PrecomputedVector>& vectors);
void WritePrecomputed(std::ostream& out,
                      const std::vector<PrecomputedVector>& vectors);

}  // namespace crossfuse

#endif  // CROSSFUSE_PRECOMPUTED_H_
