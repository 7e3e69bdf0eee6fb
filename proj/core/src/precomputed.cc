#include "crossfuse/precomputed.h"

#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "crossfuse/errors.h"

namespace crossfuse {

std::vector<PrecomputedVector> ReadPrecomputed(std::istream& in) {
  std::vector<PrecomputedVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PrecomputedVector v;
    try {
      const auto j = nlohmann::json::parse(line);
      v.id = j.at("id").get<std::string>();
      v.vec = j.at("vec").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("precomputed vectors, line " + std::to_string(line_no) +
                        ": " + e.what());
    }
    if (!out.empty() && v.vec.size() != out.front().vec.size()) {
      throw FormatError("precomputed vector '" + v.id + "' has dimension " +
                        std::to_string(v.vec.size()) + ", expected " +
                        std::to_string(out.front().vec.size()));
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<PrecomputedVector> LoadPrecomputed(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return ReadPrecomputed(in);
}

void WritePrecomputed(std::ostream& out,
                      const std::vector<PrecomputedVector>& vectors) {
  for (const auto& v : vectors) {
    out << nlohmann::json{{"id", v.id}, {"vec", v.vec}}.dump() << '\n';
  }
}

void WritePrecomputed(const std::string& path,
                      const std::vector<PrecomputedVector>& vectors) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  WritePrecomputed(out, vectors);
}

}  // namespace crossfuse
