#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "fringe/io.hpp"

namespace fringe::nn {

// FPW1 weight file: "FPW1", u32 little-endian header length, UTF-8 JSON
// header, then the tensors as consecutive FPT1 records in declaration order.
struct CheckpointData {
  nlohmann::json header;
  std::vector<io::RawTensor> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& ckpt);
CheckpointData read_checkpoint(const std::filesystem::path& path);

}  // namespace fringe::nn
