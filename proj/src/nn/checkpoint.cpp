#include "fringe/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace fringe::nn {

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const std::string header = ckpt.header.dump();
  out.write("FPW1", 4);
  const auto len = static_cast<std::uint32_t>(header.size());
  const char b[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                     static_cast<char>((len >> 16) & 0xff), static_cast<char>((len >> 24) & 0xff)};
  out.write(b, 4);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& t : ckpt.tensors) io::write_fpt(out, t);
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[4];
  unsigned char len_bytes[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "FPW1", 4) != 0) throw IoError("not an FPW1 checkpoint: " + path.string());
  if (!in.read(reinterpret_cast<char*>(len_bytes), 4)) throw IoError("FPW1: truncated header");
  const std::uint32_t len = std::uint32_t(len_bytes[0]) | (std::uint32_t(len_bytes[1]) << 8) |
                            (std::uint32_t(len_bytes[2]) << 16) | (std::uint32_t(len_bytes[3]) << 24);
  std::string header(len, '\0');
  if (!in.read(header.data(), len)) throw IoError("FPW1: truncated header");
  CheckpointData ckpt;
  try {
    ckpt.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("FPW1: malformed header: ") + e.what());
  }
  const std::size_t count = ckpt.header.at("tensors").size();
  for (std::size_t i = 0; i < count; ++i) ckpt.tensors.push_back(io::read_fpt(in));
  return ckpt;
}

}  // namespace fringe::nn
