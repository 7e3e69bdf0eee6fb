#ifndef CROSSFUSE_CHECKPOINT_H_
#define CROSSFUSE_CHECKPOINT_H_

// Checkpoint format (line-delimited JSON):
//
//   {"format":"crossfuse-checkpoint","version":1,"model":{...}}
//   {"name":"proj_image.weight","shape":[64,100],"data":[...]}
//   ...
//
// The first line carries the model description; each following line holds
// one named parameter tensor. Doubles are written in shortest round-trip
// form so save/load is bit-exact.

#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "crossfuse/tensor.h"

namespace crossfuse {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json model;
  std::map<std::string, Tensor> tensors;
};

void WriteCheckpoint(std::ostream& out, const nlohmann::json& model,
                     std::span<Parameter* const> params);
void SaveCheckpoint(const std::string& path, const nlohmann::json& model,
                    std::span<Parameter* const> params);

Checkpoint ReadCheckpoint(std::istream& in);
Checkpoint LoadCheckpoint(const std::string& path);

// Copies tensors into matching parameters by name. Throws FormatError if a
// parameter is missing or has a different shape.
void ApplyCheckpoint(const Checkpoint& ckpt, std::span<Parameter* const> params);

}  // namespace crossfuse

#endif  // CROSSFUSE_CHECKPOINT_H_
