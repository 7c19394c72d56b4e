#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "fringe/classical.hpp"
#include "fringe/nn/layers.hpp"
#include "fringe/nn/optim.hpp"
#include "fringe/synth.hpp"

namespace fringe::neural {

// Background estimator: conv -> residual blocks -> conv -> linear conv.
template <typename T>
class Cnn1Net final : public nn::Module<T> {
 public:
  Cnn1Net(int base_channels, int residual_blocks, int in_channels = 1, int out_channels = 1);

  nn::Tensor<T> forward(const nn::Tensor<T>& x) override { return body_.forward(x); }
  nn::Tensor<T> backward(const nn::Tensor<T>& g) override { return body_.backward(g); }
  nn::Tensor<T> infer(const nn::Tensor<T>& x) const override { return body_.infer(x); }
  void collect_parameters(std::vector<nn::Parameter<T>*>& out) override { body_.collect_parameters(out); }
  void describe(std::vector<nn::LayerSpec>& out) const override { body_.describe(out); }

 private:
  nn::Sequential<T> body_;
};

// Two-scale network: a full-resolution path and a x2 down/up path whose
// features are concatenated and fused by two convolutions.
template <typename T>
class TwoScaleNet final : public nn::Module<T> {
 public:
  TwoScaleNet(int base_channels, int residual_blocks, int in_channels, int out_channels);

  nn::Tensor<T> forward(const nn::Tensor<T>& x) override;
  nn::Tensor<T> backward(const nn::Tensor<T>& g) override;
  nn::Tensor<T> infer(const nn::Tensor<T>& x) const override;
  void collect_parameters(std::vector<nn::Parameter<T>*>& out) override;
  void describe(std::vector<nn::LayerSpec>& out) const override;

 private:
  int base_channels_;
  nn::Sequential<T> full_path_;
  nn::Sequential<T> half_path_;
  nn::Sequential<T> head_;
};

// cnn1: fringe -> background; cnn2: (fringe, background) -> (M, D);
// direct: fringe -> wrapped phase (ablation baseline).
enum class NetKind { cnn1, cnn2, direct };
std::string to_string(NetKind kind);
NetKind net_kind_from_string(const std::string& s);

struct NetConfig {
  int base_channels = 32;
  int residual_blocks = 4;
};

// De-normalisation constants: intensities are divided by intensity_scale,
// (M, D) by (n_steps / 2) * intensity_scale, wrapped phase by pi.
struct Normalization {
  double intensity_scale = 255.0;
  int n_steps = 12;
  double phasor_scale() const { return 0.5 * n_steps * intensity_scale; }
};

enum class LrSchedule { constant, cosine };
std::string to_string(LrSchedule s);
LrSchedule lr_schedule_from_string(const std::string& s);

struct TrainConfig {
  double learning_rate = 1e-4;
  // Cosine decays per epoch from learning_rate to final_lr_fraction * learning_rate at cfg.epochs.
  LrSchedule schedule = LrSchedule::constant;
  double final_lr_fraction = 0.01;
  int batch_size = 8;
  int epochs = 200;
  int patience = 20;  // early stop on validation loss; <= 0 disables
  std::uint64_t seed = 1;
  double validation_fraction = 150.0 / 960.0;
};

// Learning rate used for the given 1-based epoch.
double learning_rate_at(const TrainConfig& cfg, int epoch);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct Model {
  NetKind kind = NetKind::cnn1;
  NetConfig config;
  Normalization norm;
  std::uint64_t seed = 0;
  int epoch = 0;  // completed epochs
  int best_epoch = 0;
  double best_val_loss = 0.0;
  nlohmann::json train_config;
  std::unique_ptr<nn::Module<float>> net;
  nn::OptimState<float> optim;
  std::vector<EpochRecord> history;
};

int input_channels(NetKind kind);
int output_channels(NetKind kind);

Model make_model(NetKind kind, const NetConfig& config, std::uint64_t seed, const Normalization& norm = {});
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

// --- inference ---------------------------------------------------------

Image cnn1_forward(const Image& fringe, const Model& cnn1);
PhasorField cnn2_forward(const Image& fringe, const Image& background, const Model& cnn2);
PhaseField direct_forward(const Image& fringe, const Model& direct);
classical::PhaseResult demod_neural(const Image& fringe, const Model& cnn1, const Model& cnn2);

// --- training ------------------------------------------------------------

using EpochCallback = std::function<void(const Model&, const EpochRecord&)>;

struct Split {
  std::vector<const synth::Sample*> train;
  std::vector<const synth::Sample*> validation;
};

// Last round(n * fraction) samples become the validation set.
Split split_validation(const std::vector<synth::Sample>& samples, double fraction);
// Throws if a sample id appears in both sets.
void check_disjoint(const Split& split);

// Thrown when a loss turns non-finite; the model holds the last finite state.
struct TrainingDiverged : NumericError {
  using NumericError::NumericError;
};

// Continues from model.epoch up to cfg.epochs. Keeps the best-validation
// weights when early stopping is enabled.
void train_cnn1(Model& cnn1, const Split& data, const TrainConfig& cfg, const EpochCallback& on_epoch = {});
// cnn1 stays fixed; its predictions feed the second stage.
void train_cnn2(Model& cnn2, const Model& cnn1, const Split& data, const TrainConfig& cfg,
                const EpochCallback& on_epoch = {});
void train_direct(Model& direct, const Split& data, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace fringe::neural
