#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fringe/config.hpp"
#include "fringe/synth.hpp"

namespace fringe::dataset {

// On-disk layout:
//   manifest.json, resolved_config.txt
//   samples/<id>/fringe.pgm      (fringe.fpt when not quantised)
//   samples/<id>/background.fpt, phasor.fpt (2 x H x W: M, D), phase.fpt, mask.pgm
//   samples/<id>/stack/frame_NNN.pgm   (optional)
struct Entry {
  std::string id;
  std::string split;  // train | validation | test
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool degenerate = false;
};

struct Manifest {
  std::filesystem::path root;
  int n_steps = 12;
  nlohmann::json json;
  std::vector<Entry> entries;

  std::vector<const Entry*> split(const std::string& name) const;
};

// Renders dataset.scenes scenes from the configured distribution and writes
// them under `out`. Deterministic for a fixed configuration.
Manifest generate(const RunConfig& config, const std::filesystem::path& out);

Manifest read_manifest(const std::filesystem::path& root);

void write_sample(const std::filesystem::path& dir, const synth::Sample& s, bool quantized);
synth::Sample read_sample(const Manifest& m, const Entry& e);
std::vector<synth::Sample> read_split(const Manifest& m, const std::string& split);

// Frames of a phase-shifting stack directory, in file-name order.
void write_stack(const std::filesystem::path& dir, const std::vector<Image>& frames, bool quantized);
std::vector<Image> read_stack(const std::filesystem::path& dir);

}  // namespace fringe::dataset
