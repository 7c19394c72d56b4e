#include "fringe/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fringe {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"scene.width", "128"},
      {"scene.height", "128"},
      {"scene.carrier_frequency", "32"},
      {"scene.max_object_phase", "20"},
      {"scene.max_step", "8"},
      {"scene.max_slope", "1.0"},
      {"scene.background", "110"},
      {"scene.modulation", "90"},
      {"scene.isolated_probability", "0.7"},
      {"scene.step_probability", "0.6"},
      {"dataset.scenes", "1000"},
      {"dataset.seed", "1"},
      {"dataset.n_steps", "12"},
      {"dataset.mask_threshold", "10"},
      {"dataset.validation_fraction", "0.15"},
      {"dataset.test_fraction", "0.05"},
      {"dataset.write_stacks", "false"},
      {"noise.sigma", "2"},
      {"noise.bit_depth", "8"},
      {"noise.clip", "true"},
      {"noise.quantize", "true"},
      {"network.base_channels", "32"},
      {"network.residual_blocks", "4"},
      {"train.learning_rate", "0.0001"},
      {"train.lr_schedule", "constant"},
      {"train.final_lr_fraction", "0.01"},
      {"train.batch_size", "8"},
      {"train.epochs", "200"},
      {"train.cnn1_epochs", "0"},
      {"train.patience", "20"},
      {"train.seed", "1"},
      {"train.direct", "false"},
      {"ft.bandwidth", "20"},
      {"ft.edge_width", "4"},
      {"wft.window_sigma", "10"},
      {"wft.halfwidth", "1.0"},
      {"wft.freq_step", "0.05"},
      {"wft.threshold", "6"},
      {"eval.margin", "4"},
      {"eval.methods", "ft,wft,cnn"},
      {"eval.heatmaps", "true"},
      {"sphere.enabled", "true"},
      {"sphere.width", "256"},
      {"sphere.height", "256"},
      {"sphere.carrier_frequency", "64"},
      {"sphere.mm_per_rad", "2.0"},
      {"sphere.mm_per_px", "0.75"},
      {"sphere.fit_height_fraction", "0.527"},
      {"sphere.noise_sigma", "2"},
      {"sphere.seed", "1"},
      {"sphere.methods", "ps,cnn"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  RunConfig c;
  c.merge_text(ss.str(), path.string());
  return c;
}

void RunConfig::merge_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!values_.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
    values_[key] = trim(line.substr(eq + 1));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) throw ValidationError("unknown config key '" + key + "'");
  values_[key] = value;
}

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not a number");
  }
}

long long RunConfig::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not an integer");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long i = std::stoull(v, &used, 0);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not an unsigned integer");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(get_string(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [k, v] : values_) {
    const std::string s = k.substr(0, k.find('.'));
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << "# " << s << '\n';
      section = s;
    }
    out << k << " = " << v << '\n';
  }
  return out.str();
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << to_text();
  if (!f) throw IoError("failed writing " + path.string());
}

synth::SceneDistribution RunConfig::scene_distribution() const {
  synth::SceneDistribution d;
  d.width = static_cast<int>(get_int("scene.width"));
  d.height = static_cast<int>(get_int("scene.height"));
  d.carrier_frequency = get_double("scene.carrier_frequency");
  d.max_object_phase = get_double("scene.max_object_phase");
  d.max_step = get_double("scene.max_step");
  d.max_slope = get_double("scene.max_slope");
  d.background_level = get_double("scene.background");
  d.modulation_level = get_double("scene.modulation");
  d.isolated_probability = get_double("scene.isolated_probability");
  d.step_probability = get_double("scene.step_probability");
  return d;
}

synth::NoiseSpec RunConfig::noise() const {
  synth::NoiseSpec n;
  n.gaussian_sigma = get_double("noise.sigma");
  n.bit_depth = static_cast<int>(get_int("noise.bit_depth"));
  n.clip = get_bool("noise.clip");
  n.quantize = get_bool("noise.quantize");
  synth::validate(n);
  return n;
}

synth::DatasetOptions RunConfig::dataset_options() const {
  synth::DatasetOptions o;
  o.n_steps = static_cast<int>(get_int("dataset.n_steps"));
  o.mask_threshold = get_double("dataset.mask_threshold");
  if (o.n_steps < 3) throw ValidationError("dataset.n_steps must be at least 3");
  return o;
}

neural::NetConfig RunConfig::net_config() const {
  neural::NetConfig c;
  c.base_channels = static_cast<int>(get_int("network.base_channels"));
  c.residual_blocks = static_cast<int>(get_int("network.residual_blocks"));
  if (c.base_channels < 1 || c.residual_blocks < 0) throw ValidationError("invalid network size");
  return c;
}

neural::TrainConfig RunConfig::train_config() const {
  neural::TrainConfig t;
  t.learning_rate = get_double("train.learning_rate");
  t.schedule = neural::lr_schedule_from_string(get_string("train.lr_schedule"));
  t.final_lr_fraction = get_double("train.final_lr_fraction");
  t.batch_size = static_cast<int>(get_int("train.batch_size"));
  t.epochs = static_cast<int>(get_int("train.epochs"));
  t.patience = static_cast<int>(get_int("train.patience"));
  t.seed = get_u64("train.seed");
  if (!(t.learning_rate > 0.0)) throw ValidationError("train.learning_rate must be positive");
  if (t.batch_size < 1) throw ValidationError("train.batch_size must be at least 1");
  if (!(t.final_lr_fraction > 0.0 && t.final_lr_fraction <= 1.0))
    throw ValidationError("train.final_lr_fraction must lie in (0, 1]");
  if (t.epochs < 0) throw ValidationError("train.epochs must be non-negative");
  // Validation share of the train+validation pool.
  const auto s = split_sizes();
  t.validation_fraction = static_cast<double>(s.validation) / static_cast<double>(s.train + s.validation);
  return t;
}

neural::TrainConfig RunConfig::train_config(neural::NetKind kind) const {
  neural::TrainConfig t = train_config();
  const long long cnn1_epochs = get_int("train.cnn1_epochs");
  if (cnn1_epochs < 0) throw ValidationError("train.cnn1_epochs must be non-negative");
  if (kind == neural::NetKind::cnn1 && cnn1_epochs > 0) t.epochs = static_cast<int>(cnn1_epochs);
  return t;
}

classical::FtParams RunConfig::ft_params() const {
  classical::FtParams p;
  p.carrier_frequency = get_double("scene.carrier_frequency");
  p.bandwidth = get_double("ft.bandwidth");
  p.edge_width = get_double("ft.edge_width");
  return p;
}

classical::WftParams RunConfig::wft_params() const {
  auto p = classical::WftParams::around_carrier(get_double("scene.carrier_frequency"),
                                                static_cast<int>(get_int("scene.width")),
                                                get_double("wft.halfwidth"));
  p.window_sigma = get_double("wft.window_sigma");
  p.freq_step = get_double("wft.freq_step");
  p.threshold = get_double("wft.threshold");
  classical::validate(p);
  return p;
}

eval::SphereSceneOptions RunConfig::sphere_options() const {
  eval::SphereSceneOptions o;
  o.width = static_cast<int>(get_int("sphere.width"));
  o.height = static_cast<int>(get_int("sphere.height"));
  o.carrier_frequency = get_double("sphere.carrier_frequency");
  o.model.mm_per_rad = get_double("sphere.mm_per_rad");
  o.model.mm_per_px = get_double("sphere.mm_per_px");
  o.fit_height_fraction = get_double("sphere.fit_height_fraction");
  o.n_steps = static_cast<int>(get_int("dataset.n_steps"));
  o.background = get_double("scene.background");
  o.modulation = get_double("scene.modulation");
  return o;
}

synth::NoiseSpec RunConfig::sphere_noise() const {
  synth::NoiseSpec n = noise();
  n.gaussian_sigma = get_double("sphere.noise_sigma");
  synth::validate(n);
  return n;
}

RunConfig::SplitSizes RunConfig::split_sizes() const {
  const long long n = get_int("dataset.scenes");
  if (n < 1) throw ValidationError("dataset.scenes must be at least 1");
  const double fv = get_double("dataset.validation_fraction");
  const double ft = get_double("dataset.test_fraction");
  if (fv < 0.0 || ft < 0.0 || fv + ft >= 1.0) throw ValidationError("dataset split fractions must sum below 1");
  SplitSizes s;
  s.test = static_cast<int>(std::llround(static_cast<double>(n) * ft));
  s.validation = static_cast<int>(std::llround(static_cast<double>(n) * fv));
  s.train = static_cast<int>(n) - s.test - s.validation;
  if (s.train < 1) throw ValidationError("dataset split leaves no training scenes");
  return s;
}

}  // namespace fringe
