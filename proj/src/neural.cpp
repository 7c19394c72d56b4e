#include "fringe/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "fringe/nn/checkpoint.hpp"

namespace fringe::neural {

using nn::Tensor;

// --- networks ------------------------------------------------------------

template <typename T>
Cnn1Net<T>::Cnn1Net(int c, int blocks, int in_ch, int out_ch) {
  body_.add(std::make_unique<nn::Conv2d<T>>("input", in_ch, c));
  for (int i = 0; i < blocks; ++i) body_.add(std::make_unique<nn::ResidualBlock<T>>("res" + std::to_string(i), c));
  body_.add(std::make_unique<nn::Conv2d<T>>("hidden", c, c));
  body_.add(std::make_unique<nn::Conv2d<T>>("output", c, out_ch, 3, 1, nn::Activation::linear));
}

template <typename T>
TwoScaleNet<T>::TwoScaleNet(int c, int blocks, int in_ch, int out_ch) : base_channels_(c) {
  full_path_.add(std::make_unique<nn::Conv2d<T>>("full.input", in_ch, c));
  for (int i = 0; i < blocks; ++i)
    full_path_.add(std::make_unique<nn::ResidualBlock<T>>("full.res" + std::to_string(i), c));
  half_path_.add(std::make_unique<nn::Downsample2x<T>>("half.down", in_ch, c));
  for (int i = 0; i < blocks; ++i)
    half_path_.add(std::make_unique<nn::ResidualBlock<T>>("half.res" + std::to_string(i), c));
  half_path_.add(std::make_unique<nn::Upsample2x<T>>("half.up", c, c));
  head_.add(std::make_unique<nn::Conv2d<T>>("fuse", 2 * c, c));
  head_.add(std::make_unique<nn::Conv2d<T>>("output", c, out_ch, 3, 1, nn::Activation::linear));
}

template <typename T>
Tensor<T> TwoScaleNet<T>::forward(const Tensor<T>& x) {
  const Tensor<T> a = full_path_.forward(x);
  const Tensor<T> b = half_path_.forward(x);
  return head_.forward(nn::concat_channels(a, b));
}

template <typename T>
Tensor<T> TwoScaleNet<T>::backward(const Tensor<T>& g) {
  auto [ga, gb] = nn::split_channels(head_.backward(g), base_channels_);
  Tensor<T> gx = full_path_.backward(ga);
  const Tensor<T> gx2 = half_path_.backward(gb);
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gx2[i];
  return gx;
}

template <typename T>
Tensor<T> TwoScaleNet<T>::infer(const Tensor<T>& x) const {
  return head_.infer(nn::concat_channels(full_path_.infer(x), half_path_.infer(x)));
}

template <typename T>
void TwoScaleNet<T>::collect_parameters(std::vector<nn::Parameter<T>*>& out) {
  full_path_.collect_parameters(out);
  half_path_.collect_parameters(out);
  head_.collect_parameters(out);
}

template <typename T>
void TwoScaleNet<T>::describe(std::vector<nn::LayerSpec>& out) const {
  full_path_.describe(out);
  half_path_.describe(out);
  head_.describe(out);
}

template class Cnn1Net<float>;
template class Cnn1Net<double>;
template class TwoScaleNet<float>;
template class TwoScaleNet<double>;

// --- models ----------------------------------------------------------------

std::string to_string(NetKind kind) {
  switch (kind) {
    case NetKind::cnn1: return "cnn1";
    case NetKind::cnn2: return "cnn2";
    case NetKind::direct: return "direct";
  }
  return "cnn1";
}

NetKind net_kind_from_string(const std::string& s) {
  if (s == "cnn1") return NetKind::cnn1;
  if (s == "cnn2") return NetKind::cnn2;
  if (s == "direct") return NetKind::direct;
  throw ValidationError("unknown network kind '" + s + "'");
}

int input_channels(NetKind kind) { return kind == NetKind::cnn2 ? 2 : 1; }
int output_channels(NetKind kind) { return kind == NetKind::cnn2 ? 2 : 1; }

Model make_model(NetKind kind, const NetConfig& config, std::uint64_t seed, const Normalization& norm) {
  if (config.base_channels < 1 || config.residual_blocks < 0) throw ValidationError("invalid network configuration");
  Model m;
  m.kind = kind;
  m.config = config;
  m.norm = norm;
  m.seed = seed;
  if (kind == NetKind::cnn1) {
    m.net = std::make_unique<Cnn1Net<float>>(config.base_channels, config.residual_blocks);
  } else {
    m.net = std::make_unique<TwoScaleNet<float>>(config.base_channels, config.residual_blocks, input_channels(kind),
                                                 output_channels(kind));
  }
  nn::kaiming_init(*m.net, seed);
  return m;
}

namespace {

io::RawTensor raw(const Tensor<float>& t) {
  io::RawTensor r;
  for (int d : t.dims()) r.dims.push_back(static_cast<std::uint32_t>(d));
  r.values.assign(t.values().begin(), t.values().end());
  return r;
}

void assign(Tensor<float>& t, const io::RawTensor& r, const std::string& what) {
  bool ok = r.dims.size() == 4;
  for (std::size_t i = 0; ok && i < 4; ++i) ok = static_cast<int>(r.dims[i]) == t.dims()[i];
  if (!ok) throw ValidationError("checkpoint tensor '" + what + "' does not match shape " + t.shape_string());
  std::copy(r.values.begin(), r.values.end(), t.data());
}

nlohmann::json history_json(const std::vector<EpochRecord>& h) {
  auto arr = nlohmann::json::array();
  for (const auto& e : h) arr.push_back({e.epoch, e.train_loss, e.val_loss});
  return arr;
}

}  // namespace

void save_model(const std::filesystem::path& path, const Model& model) {
  nn::CheckpointData ckpt;
  std::vector<nn::LayerSpec> layers;
  model.net->describe(layers);
  auto layer_list = nlohmann::json::array();
  for (const auto& l : layers) layer_list.push_back(nn::to_json(l));

  auto tensor_list = nlohmann::json::array();
  auto params = model.net->parameters();
  for (const auto* p : params) {
    tensor_list.push_back({{"name", p->name}, {"shape", p->value.dims()}});
    ckpt.tensors.push_back(raw(p->value));
  }
  const bool moments = !model.optim.first_moment.empty();
  if (moments) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      tensor_list.push_back({{"name", params[i]->name + ".adam_m"}, {"shape", params[i]->value.dims()}});
      ckpt.tensors.push_back(raw(model.optim.first_moment[i]));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      tensor_list.push_back({{"name", params[i]->name + ".adam_v"}, {"shape", params[i]->value.dims()}});
      ckpt.tensors.push_back(raw(model.optim.second_moment[i]));
    }
  }
  const auto& oc = model.optim.config;
  ckpt.header = {
      {"format", "FPW1"},
      {"kind", to_string(model.kind)},
      {"layers", layer_list},
      {"tensors", tensor_list},
      {"hyperparameters",
       {{"base_channels", model.config.base_channels},
        {"residual_blocks", model.config.residual_blocks},
        {"training", model.train_config}}},
      {"normalization", {{"intensity_scale", model.norm.intensity_scale}, {"n_steps", model.norm.n_steps}}},
      {"optimizer",
       {{"name", "adam"},
        {"learning_rate", oc.learning_rate},
        {"beta1", oc.beta1},
        {"beta2", oc.beta2},
        {"epsilon", oc.epsilon},
        {"moments", moments}}},
      {"seed", model.seed},
      {"step", model.optim.step},
      {"epoch", model.epoch},
      {"best_epoch", model.best_epoch},
      {"best_val_loss", model.best_val_loss},
      {"history", history_json(model.history)},
  };
  nn::write_checkpoint(path, ckpt);
}

Model load_model(const std::filesystem::path& path) {
  const nn::CheckpointData ckpt = nn::read_checkpoint(path);
  const auto& h = ckpt.header;
  try {
    NetConfig cfg{h.at("hyperparameters").at("base_channels"), h.at("hyperparameters").at("residual_blocks")};
    Normalization norm{h.at("normalization").at("intensity_scale"), h.at("normalization").at("n_steps")};
    Model m = make_model(net_kind_from_string(h.at("kind")), cfg, h.at("seed"), norm);
    m.train_config = h.at("hyperparameters").value("training", nlohmann::json{});
    m.epoch = h.at("epoch");
    m.best_epoch = h.value("best_epoch", 0);
    // Non-finite values are stored as null (no epoch finished yet).
    const auto& best = h.at("best_val_loss");
    m.best_val_loss = best.is_null() ? std::numeric_limits<double>::infinity() : best.get<double>();
    for (const auto& e : h.value("history", nlohmann::json::array())) m.history.push_back({e[0], e[1], e[2]});
    const auto& o = h.at("optimizer");
    m.optim.config = {o.at("learning_rate"), o.at("beta1"), o.at("beta2"), o.at("epsilon")};
    m.optim.step = h.at("step");

    auto params = m.net->parameters();
    const bool moments = o.at("moments");
    const std::size_t expected = params.size() * (moments ? 3 : 1);
    if (ckpt.tensors.size() != expected)
      throw ValidationError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, expected " +
                            std::to_string(expected));
    for (std::size_t i = 0; i < params.size(); ++i) assign(params[i]->value, ckpt.tensors[i], params[i]->name);
    if (moments) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        m.optim.first_moment.emplace_back(params[i]->value.dims());
        m.optim.second_moment.emplace_back(params[i]->value.dims());
        assign(m.optim.first_moment[i], ckpt.tensors[params.size() + i], params[i]->name + ".adam_m");
        assign(m.optim.second_moment[i], ckpt.tensors[2 * params.size() + i], params[i]->name + ".adam_v");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
}

// --- inference -------------------------------------------------------------

namespace {

Tensor<float> to_tensor(const std::vector<const Image*>& channels, double scale) {
  const int w = channels[0]->width();
  const int h = channels[0]->height();
  Tensor<float> t(1, static_cast<int>(channels.size()), h, w);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    require_same_shape(*channels[c], *channels[0], "network input");
    float* dst = t.channel(0, static_cast<int>(c));
    for (std::size_t i = 0; i < channels[c]->size(); ++i) dst[i] = static_cast<float>((*channels[c])[i] / scale);
  }
  return t;
}

Image channel_image(const Tensor<float>& t, int n, int c, double scale) {
  Image img(t.width(), t.height());
  const float* src = t.channel(n, c);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>(src[i]) * scale;
  return img;
}

void require_kind(const Model& m, NetKind kind) {
  if (m.kind != kind) throw ValidationError("expected a " + to_string(kind) + " model, got " + to_string(m.kind));
}

void require_even(const Image& img) {
  if (img.width() % 2 || img.height() % 2)
    throw ValidationError("network input needs even dimensions, got " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()));
}

}  // namespace

Image cnn1_forward(const Image& fringe, const Model& cnn1) {
  require_kind(cnn1, NetKind::cnn1);
  const double s = cnn1.norm.intensity_scale;
  return channel_image(cnn1.net->infer(to_tensor({&fringe}, s)), 0, 0, s);
}

PhasorField cnn2_forward(const Image& fringe, const Image& background, const Model& cnn2) {
  require_kind(cnn2, NetKind::cnn2);
  require_same_shape(fringe, background, "cnn2 inputs");
  require_even(fringe);
  const Tensor<float> y = cnn2.net->infer(to_tensor({&fringe, &background}, cnn2.norm.intensity_scale));
  const double ps = cnn2.norm.phasor_scale();
  return {channel_image(y, 0, 0, ps), channel_image(y, 0, 1, ps), 0.5 * cnn2.norm.n_steps};
}

PhaseField direct_forward(const Image& fringe, const Model& direct) {
  require_kind(direct, NetKind::direct);
  require_even(fringe);
  const Tensor<float> y = direct.net->infer(to_tensor({&fringe}, direct.norm.intensity_scale));
  return {wrap_phase(channel_image(y, 0, 0, kPi)), true};
}

classical::PhaseResult demod_neural(const Image& fringe, const Model& cnn1, const Model& cnn2) {
  const Image background = cnn1_forward(fringe, cnn1);
  return classical::phase_from_phasor(cnn2_forward(fringe, background, cnn2));
}

// --- training ------------------------------------------------------------

std::string to_string(LrSchedule s) { return s == LrSchedule::cosine ? "cosine" : "constant"; }

LrSchedule lr_schedule_from_string(const std::string& s) {
  if (s == "constant") return LrSchedule::constant;
  if (s == "cosine") return LrSchedule::cosine;
  throw ValidationError("unknown learning-rate schedule '" + s + "' (expected constant or cosine)");
}

double learning_rate_at(const TrainConfig& cfg, int epoch) {
  if (cfg.schedule == LrSchedule::constant || cfg.epochs <= 1) return cfg.learning_rate;
  const double t = std::clamp(static_cast<double>(epoch - 1) / (cfg.epochs - 1), 0.0, 1.0);
  const double floor = cfg.final_lr_fraction * cfg.learning_rate;
  return floor + 0.5 * (cfg.learning_rate - floor) * (1.0 + std::cos(kPi * t));
}

Split split_validation(const std::vector<synth::Sample>& samples, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("validation fraction must lie in (0, 1)");
  const auto n = samples.size();
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  Split s;
  for (std::size_t i = 0; i < n; ++i) (i + n_val < n ? s.train : s.validation).push_back(&samples[i]);
  return s;
}

void check_disjoint(const Split& split) {
  std::set<std::string> ids;
  for (const auto* s : split.train) ids.insert(s->id);
  for (const auto* s : split.validation)
    if (ids.count(s->id)) throw ValidationError("sample '" + s->id + "' is in both training and validation sets");
}

namespace {

struct Pairs {
  std::vector<Tensor<float>> inputs;
  std::vector<Tensor<float>> targets;
};

Tensor<float> stack_batch(const std::vector<Tensor<float>>& items, const std::vector<std::size_t>& idx,
                          std::size_t begin, std::size_t end) {
  const auto& first = items[idx[begin]];
  Tensor<float> b(static_cast<int>(end - begin), first.channels(), first.height(), first.width());
  for (std::size_t k = begin; k < end; ++k) {
    const auto& t = items[idx[k]];
    if (t.channels() != first.channels() || t.height() != first.height() || t.width() != first.width())
      throw ValidationError("training samples must share dimensions");
    std::copy(t.data(), t.data() + t.size(), b.sample(static_cast<int>(k - begin)));
  }
  return b;
}

double evaluate(const Model& m, const Pairs& data, int batch) {
  if (data.inputs.empty()) return 0.0;
  std::vector<std::size_t> idx(data.inputs.size());
  std::iota(idx.begin(), idx.end(), 0);
  double sum = 0.0;
  for (std::size_t b = 0; b < idx.size(); b += static_cast<std::size_t>(batch)) {
    const std::size_t e = std::min(idx.size(), b + static_cast<std::size_t>(batch));
    const auto pred = m.net->infer(stack_batch(data.inputs, idx, b, e));
    sum += nn::mse_loss(pred, stack_batch(data.targets, idx, b, e)).loss * static_cast<double>(e - b);
  }
  return sum / static_cast<double>(idx.size());
}

std::vector<Tensor<float>> snapshot(Model& m) {
  std::vector<Tensor<float>> out;
  for (auto* p : m.net->parameters()) out.push_back(p->value);
  return out;
}

void restore(Model& m, const std::vector<Tensor<float>>& snap) {
  auto params = m.net->parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

nlohmann::json config_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"lr_schedule", to_string(c.schedule)},
          {"final_lr_fraction", c.final_lr_fraction},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"validation_fraction", c.validation_fraction}};
}

void train_loop(Model& m, const Pairs& train, const Pairs& val, const TrainConfig& cfg, const EpochCallback& cb) {
  if (train.inputs.empty()) throw ValidationError("training set is empty");
  if (cfg.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  m.train_config = config_json(cfg);
  auto params = m.net->parameters();

  auto best = snapshot(m);
  if (m.epoch == 0) m.best_val_loss = std::numeric_limits<double>::infinity();
  int since_best = m.epoch - m.best_epoch;

  for (int epoch = m.epoch + 1; epoch <= cfg.epochs; ++epoch) {
    m.optim.config.learning_rate = learning_rate_at(cfg, epoch);
    const auto last_finite = snapshot(m);
    const auto last_optim = m.optim;
    std::vector<std::size_t> order(train.inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(synth::derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      m.net->zero_grad();
      const auto pred = m.net->forward(stack_batch(train.inputs, order, b, e));
      auto loss = nn::mse_loss(pred, stack_batch(train.targets, order, b, e));
      if (!std::isfinite(loss.loss)) {
        restore(m, last_finite);
        m.optim = last_optim;
        throw TrainingDiverged("non-finite training loss in epoch " + std::to_string(epoch));
      }
      m.net->backward(loss.grad);
      nn::adam_step(params, m.optim);
      sum += loss.loss * static_cast<double>(e - b);
    }
    EpochRecord rec{epoch, sum / static_cast<double>(order.size()), evaluate(m, val, cfg.batch_size)};
    if (!std::isfinite(rec.val_loss) || !std::isfinite(rec.train_loss)) {
      restore(m, last_finite);
      m.optim = last_optim;
      throw TrainingDiverged("non-finite loss after epoch " + std::to_string(epoch));
    }
    m.epoch = epoch;
    m.history.push_back(rec);
    const double monitored = val.inputs.empty() ? rec.train_loss : rec.val_loss;
    if (monitored < m.best_val_loss) {
      m.best_val_loss = monitored;
      m.best_epoch = epoch;
      best = snapshot(m);
      since_best = 0;
    } else {
      ++since_best;
    }
    if (cb) cb(m, rec);
    if (cfg.patience > 0 && since_best >= cfg.patience) break;
  }
  if (cfg.patience > 0) restore(m, best);
}

Tensor<float> planes(const std::vector<const Image*>& channels, const std::vector<double>& scales) {
  const int w = channels[0]->width();
  const int h = channels[0]->height();
  Tensor<float> t(1, static_cast<int>(channels.size()), h, w);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    require_same_shape(*channels[c], *channels[0], "training tensor");
    float* dst = t.channel(0, static_cast<int>(c));
    for (std::size_t i = 0; i < channels[c]->size(); ++i) dst[i] = static_cast<float>((*channels[c])[i] / scales[c]);
  }
  return t;
}

template <typename Fn>
Pairs build(const std::vector<const synth::Sample*>& samples, Fn&& make) {
  Pairs p;
  for (const auto* s : samples) {
    auto [in, target] = make(*s);
    p.inputs.push_back(std::move(in));
    p.targets.push_back(std::move(target));
  }
  return p;
}

}  // namespace

void train_cnn1(Model& cnn1, const Split& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  require_kind(cnn1, NetKind::cnn1);
  check_disjoint(data);
  const double s = cnn1.norm.intensity_scale;
  auto make = [s](const synth::Sample& x) {
    return std::pair{planes({&x.fringe}, {s}), planes({&x.background_gt}, {s})};
  };
  train_loop(cnn1, build(data.train, make), build(data.validation, make), cfg, on_epoch);
}

void train_cnn2(Model& cnn2, const Model& cnn1, const Split& data, const TrainConfig& cfg,
                const EpochCallback& on_epoch) {
  require_kind(cnn2, NetKind::cnn2);
  require_kind(cnn1, NetKind::cnn1);
  check_disjoint(data);
  const double s = cnn2.norm.intensity_scale;
  const double ps = cnn2.norm.phasor_scale();
  auto make = [&](const synth::Sample& x) {
    const Image background = cnn1_forward(x.fringe, cnn1);
    return std::pair{planes({&x.fringe, &background}, {s, s}),
                     planes({&x.phasor_gt.numerator, &x.phasor_gt.denominator}, {ps, ps})};
  };
  train_loop(cnn2, build(data.train, make), build(data.validation, make), cfg, on_epoch);
}

void train_direct(Model& direct, const Split& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  require_kind(direct, NetKind::direct);
  check_disjoint(data);
  const double s = direct.norm.intensity_scale;
  auto make = [s](const synth::Sample& x) {
    return std::pair{planes({&x.fringe}, {s}), planes({&x.phase_gt.values}, {kPi})};
  };
  train_loop(direct, build(data.train, make), build(data.validation, make), cfg, on_epoch);
}

}  // namespace fringe::neural
