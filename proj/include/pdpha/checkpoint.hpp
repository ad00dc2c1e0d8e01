#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pdpha/params.hpp"

namespace pdpha {

// Checkpoint container: magic "PDPHA1\n", a u64 little-endian header length,
// a JSON header (hyperparameters + tensor manifest), then the raw f64
// little-endian payloads in manifest order.
inline constexpr char kCheckpointMagic[] = "PDPHA1\n";

void write_checkpoint(const std::string& path, const nlohmann::json& hyper, const ParamStore& params);

struct LoadedCheckpoint {
    nlohmann::json hyper;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

LoadedCheckpoint read_checkpoint(const std::string& path);

}  // namespace pdpha
