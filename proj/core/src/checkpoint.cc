#include "crossfuse/checkpoint.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "crossfuse/errors.h"

namespace crossfuse {

void WriteCheckpoint(std::ostream& out, const nlohmann::json& model,
                     std::span<Parameter* const> params) {
  out << nlohmann::json{{"format", "crossfuse-checkpoint"},
                        {"version", kCheckpointVersion},
                        {"model", model}}
             .dump()
      << '\n';
  for (const Parameter* p : params) {
    out << nlohmann::json{{"name", p->name},
                          {"shape", p->value.shape()},
                          {"data", p->value.data()}}
               .dump()
        << '\n';
  }
}

void SaveCheckpoint(const std::string& path, const nlohmann::json& model,
                    std::span<Parameter* const> params) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write checkpoint " + path);
  WriteCheckpoint(out, model, params);
}

Checkpoint ReadCheckpoint(std::istream& in) {
  Checkpoint ckpt;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty checkpoint");
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != "crossfuse-checkpoint") {
      throw FormatError("not a crossfuse checkpoint");
    }
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " +
                        std::to_string(version));
    }
    ckpt.model = header.at("model");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      ckpt.tensors.emplace(j.at("name").get<std::string>(),
                           Tensor(j.at("shape").get<Shape>(),
                                  j.at("data").get<std::vector<double>>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
  return ckpt;
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  return ReadCheckpoint(in);
}

void ApplyCheckpoint(const Checkpoint& ckpt,
                     std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    auto it = ckpt.tensors.find(p->name);
    if (it == ckpt.tensors.end()) {
      throw FormatError("checkpoint has no tensor '" + p->name + "'");
    }
    if (it->second.shape() != p->value.shape()) {
      throw FormatError("checkpoint tensor '" + p->name + "' has shape " +
                        ShapeString(it->second.shape()) + ", model expects " +
                        ShapeString(p->value.shape()));
    }
    p->value = it->second;
    p->ZeroGrad();
  }
}

}  // namespace crossfuse
