#pragma once

#include <map>
#include <string>

#include "trendcnn/nn/network.hpp"

namespace trendcnn::nn {

// Text header (magic, version, input shape, seed, input scale, free-form
// metadata, layer specs) followed by the parameters as raw little-endian
// IEEE-754 doubles.
struct Checkpoint {
  Network network;
  std::map<std::string, std::string> metadata;
};

inline constexpr const char* kCheckpointMagic = "TRENDCNN-CHECKPOINT";
inline constexpr int kCheckpointVersion = 1;

std::string serialize_checkpoint(const Network& net, const std::map<std::string, std::string>& metadata = {});
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Network& net, const std::map<std::string, std::string>& metadata = {});
Checkpoint load_checkpoint(const std::string& path);

}  // namespace trendcnn::nn
