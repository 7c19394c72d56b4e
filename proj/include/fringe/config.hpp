#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fringe/classical.hpp"
#include "fringe/eval.hpp"
#include "fringe/neural.hpp"
#include "fringe/synth.hpp"

namespace fringe {

// Flat `section.key = value` settings with built-in defaults. Files use one
// assignment per line and `#` comments; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_file(const std::filesystem::path& path);
  // `source` names the input in error messages.
  void merge_text(const std::string& text, const std::string& source = "<config>");
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // Every key, sorted, in the file format accepted by merge_text.
  std::string to_text() const;
  void write(const std::filesystem::path& path) const;

  synth::SceneDistribution scene_distribution() const;
  synth::NoiseSpec noise() const;
  synth::DatasetOptions dataset_options() const;
  neural::NetConfig net_config() const;
  neural::TrainConfig train_config() const;
  // As above with the epoch limit of `kind`: train.cnn1_epochs overrides
  // train.epochs for cnn1 when positive.
  neural::TrainConfig train_config(neural::NetKind kind) const;
  classical::FtParams ft_params() const;
  classical::WftParams wft_params() const;
  eval::SphereSceneOptions sphere_options() const;
  synth::NoiseSpec sphere_noise() const;

  // Split sizes derived from dataset.scenes and the two fractions.
  struct SplitSizes {
    int train = 0, validation = 0, test = 0;
  };
  SplitSizes split_sizes() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fringe
