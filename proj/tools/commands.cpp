#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fringe/classical.hpp"
#include "fringe/config.hpp"
#include "fringe/dataset.hpp"
#include "fringe/eval.hpp"
#include "fringe/io.hpp"
#include "fringe/neural.hpp"
#include "fringe/nn/checkpoint.hpp"
#include "fringe/parallel.hpp"
#include "fringe/unwrap.hpp"

namespace fringe::cli {

namespace fs = std::filesystem;

namespace {

// Options shared by every subcommand.
struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_file, "Key-value configuration file");
  app->add_option("--set", c.overrides, "Override a configuration key (key=value), repeatable");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_file.empty() ? RunConfig() : RunConfig::from_file(c.config_file);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

template <typename T>
void apply(RunConfig& cfg, const std::string& key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>) {
    cfg.set(key, *v);
  } else if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(*v));
    cfg.set(key, buf);
  } else {
    cfg.set(key, std::to_string(*v));
  }
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

void write_history(const fs::path& path, const neural::Model& m) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << "epoch,train_loss,val_loss\n";
  char line[128];
  for (const auto& r : m.history) {
    std::snprintf(line, sizeof line, "%d,%.9e,%.9e\n", r.epoch, r.train_loss, r.val_loss);
    f << line;
  }
  if (!f) throw IoError("failed writing " + path.string());
}

std::optional<neural::Model> load_optional(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  return neural::load_model(path);
}

// --- gen ----------------------------------------------------------------------

struct GenArgs {
  Common common;
  std::string out;
  std::optional<long long> scenes;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_sigma;
  bool stacks = false;
};

void cmd_gen(const GenArgs& a) {
  RunConfig cfg = resolve(a.common);
  apply(cfg, "dataset.scenes", a.scenes);
  apply(cfg, "dataset.seed", a.seed);
  apply(cfg, "noise.sigma", a.noise_sigma);
  if (a.stacks) cfg.set("dataset.write_stacks", "true");
  cfg.split_sizes();  // validate before touching the disk
  make_dir(a.out);
  const auto m = dataset::generate(cfg, a.out);
  const auto s = cfg.split_sizes();
  std::cout << "wrote " << m.entries.size() << " samples (train " << s.train << ", validation " << s.validation
            << ", test " << s.test << ") to " << a.out << '\n';
}

// --- train --------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string data;
  std::string out;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch;
  std::optional<int> patience;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  bool direct = false;
};

void train_one(neural::NetKind kind, const fs::path& out, const RunConfig& cfg, const neural::Split& split,
               int n_steps, bool resume, const neural::Model* cnn1) {
  const std::string name = neural::to_string(kind);
  const fs::path ckpt = out / (name + ".fpw");
  const fs::path hist = out / ("history_" + name + ".csv");
  const auto tc = cfg.train_config(kind);
  neural::Model m;
  if (resume && fs::exists(ckpt)) {
    m = neural::load_model(ckpt);
    if (m.kind != kind) throw ValidationError(ckpt.string() + " holds a " + neural::to_string(m.kind) + " network");
    std::cout << name << ": resuming after epoch " << m.epoch << '\n';
  } else {
    neural::Normalization norm;
    norm.n_steps = n_steps;
    norm.intensity_scale = std::ldexp(1.0, static_cast<int>(cfg.get_int("noise.bit_depth"))) - 1.0;
    m = neural::make_model(kind, cfg.net_config(), synth::derive_seed(tc.seed, static_cast<std::uint64_t>(kind) + 1),
                           norm);
  }
  auto on_epoch = [&](const neural::Model& model, const neural::EpochRecord& r) {
    neural::save_model(ckpt, model);
    write_history(hist, model);
    std::printf("%s epoch %d train %.6e val %.6e\n", name.c_str(), r.epoch, r.train_loss, r.val_loss);
    std::fflush(stdout);
  };
  try {
    switch (kind) {
      case neural::NetKind::cnn1: neural::train_cnn1(m, split, tc, on_epoch); break;
      case neural::NetKind::cnn2: neural::train_cnn2(m, *cnn1, split, tc, on_epoch); break;
      case neural::NetKind::direct: neural::train_direct(m, split, tc, on_epoch); break;
    }
  } catch (const neural::TrainingDiverged&) {
    neural::save_model(ckpt, m);
    write_history(hist, m);
    throw;
  }
  neural::save_model(ckpt, m);
  write_history(hist, m);
}

void cmd_train(const TrainArgs& a) {
  RunConfig cfg = resolve(a.common);
  apply(cfg, "train.epochs", a.epochs);
  apply(cfg, "train.learning_rate", a.lr);
  apply(cfg, "train.batch_size", a.batch);
  apply(cfg, "train.patience", a.patience);
  apply(cfg, "train.seed", a.seed);
  if (a.direct) cfg.set("train.direct", "true");
  cfg.train_config(neural::NetKind::cnn1);

  const auto manifest = dataset::read_manifest(a.data);
  const auto train = dataset::read_split(manifest, "train");
  const auto val = dataset::read_split(manifest, "validation");
  if (train.empty()) throw ValidationError("dataset " + a.data + " has no training samples");
  neural::Split split;
  for (const auto& s : train) split.train.push_back(&s);
  for (const auto& s : val) split.validation.push_back(&s);
  neural::check_disjoint(split);

  make_dir(a.out);
  cfg.write(fs::path(a.out) / "resolved_config.txt");
  const fs::path out = a.out;
  train_one(neural::NetKind::cnn1, out, cfg, split, manifest.n_steps, a.resume, nullptr);
  const auto cnn1 = neural::load_model(out / "cnn1.fpw");
  train_one(neural::NetKind::cnn2, out, cfg, split, manifest.n_steps, a.resume, &cnn1);
  if (cfg.get_bool("train.direct")) train_one(neural::NetKind::direct, out, cfg, split, manifest.n_steps, a.resume, nullptr);
}

// --- demod ------------------------------------------------------------------

struct DemodArgs {
  Common common;
  std::string method;
  std::string input;
  std::string stack;
  std::string weights;
  std::string out;
  std::optional<double> carrier;
  std::optional<double> bandwidth;
  std::optional<double> window_sigma;
};

void cmd_demod(const DemodArgs& a) {
  RunConfig cfg = resolve(a.common);
  apply(cfg, "scene.carrier_frequency", a.carrier);
  apply(cfg, "ft.bandwidth", a.bandwidth);
  apply(cfg, "wft.window_sigma", a.window_sigma);

  const fs::path out = a.out;
  std::optional<PhasorField> phasor;
  PhaseField phase;
  Mask valid;
  if (a.method == "ps") {
    if (a.stack.empty()) throw ValidationError("method ps requires --stack <dir>");
    const auto frames = dataset::read_stack(a.stack);
    phasor = classical::ps_phasor(frames);
  } else {
    if (a.input.empty()) throw ValidationError("method " + a.method + " requires --input <fringe>");
    const Image fringe = io::read_image(a.input);
    if (a.method == "ft" || a.method == "wft") {
      // Carrier-relative parameters follow the input width.
      cfg.set("scene.width", std::to_string(fringe.width()));
      phasor = a.method == "ft" ? classical::ft_demod(fringe, cfg.ft_params())
                                : classical::wft_demod(fringe, cfg.wft_params());
    } else if (a.method == "cnn") {
      if (a.weights.empty()) throw ValidationError("method cnn requires --weights <dir> holding cnn1.fpw and cnn2.fpw");
      const auto cnn1 = neural::load_model(fs::path(a.weights) / "cnn1.fpw");
      const auto cnn2 = neural::load_model(fs::path(a.weights) / "cnn2.fpw");
      phasor = neural::cnn2_forward(fringe, neural::cnn1_forward(fringe, cnn1), cnn2);
    } else if (a.method == "direct") {
      if (a.weights.empty()) throw ValidationError("method direct requires --weights <dir> holding direct.fpw");
      phase = neural::direct_forward(fringe, neural::load_model(fs::path(a.weights) / "direct.fpw"));
      valid = Mask(fringe.width(), fringe.height());
      for (auto& v : valid.values()) v = 1;
    } else {
      throw ValidationError("unknown method '" + a.method + "' (expected ps, ft, wft, cnn or direct)");
    }
  }
  if (phasor) {
    auto r = classical::phase_from_phasor(*phasor);
    phase = std::move(r.phase);
    valid = std::move(r.valid);
  }

  make_dir(out);
  io::write_image_fpt(out / "phase.fpt", phase.values);
  if (phasor) io::write_fpt(out / "phasor.fpt", io::to_raw(std::vector<Image>{phasor->numerator, phasor->denominator}));
  io::write_pgm(out / "valid.pgm", valid);
  io::write_png_gray(out / "phase.png", phase.values, -kPi, kPi);
  nlohmann::json info = {{"method", a.method},
                         {"width", phase.values.width()},
                         {"height", phase.values.height()},
                         {"wrapped", true}};
  if (phasor) info["scale_c"] = phasor->scale_c;
  write_json(out / "demod.json", info);
  cfg.write(out / "resolved_config.txt");
  std::cout << "wrote " << a.method << " phase to " << out.string() << '\n';
}

// --- unwrap -----------------------------------------------------------------

struct UnwrapArgs {
  Common common;
  std::string high, low, mask, out;
  double f_high = 32.0;
  double f_low = 1.0;
};

void cmd_unwrap(const UnwrapArgs& a) {
  RunConfig cfg = resolve(a.common);
  unwrap::FrequencyPair pair{a.f_high, a.f_low, {io::read_image_fpt(a.high), true},
                             {io::read_image_fpt(a.low), a.f_low == 1.0}};
  std::optional<Mask> mask;
  if (!a.mask.empty()) mask = io::read_mask_pgm(a.mask);
  const auto r = unwrap::temporal_unwrap(pair, mask ? &*mask : nullptr);
  const fs::path out = a.out;
  make_dir(out);
  io::write_image_fpt(out / "unwrapped.fpt", r.phase.values);
  io::write_image_fpt(out / "order.fpt", r.fringe_order);
  write_json(out / "unwrap.json", {{"f_high", a.f_high},
                                   {"f_low", a.f_low},
                                   {"suspicious_fraction", r.suspicious_fraction},
                                   {"quality_warning", r.quality_warning}});
  cfg.write(out / "resolved_config.txt");
  if (r.quality_warning)
    std::cerr << "warning: " << r.suspicious_fraction * 100.0 << "% of pixels have unreliable fringe orders\n";
  std::cout << "wrote unwrapped phase to " << out.string() << '\n';
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string pred, gt, mask, out;
  std::string method = "pred";
  std::string scene = "scene";
  std::optional<int> margin;
  bool unwrapped = false;
};

void cmd_eval(const EvalArgs& a) {
  RunConfig cfg = resolve(a.common);
  apply(cfg, "eval.margin", a.margin);
  const PhaseField pred{io::read_image(a.pred), !a.unwrapped};
  const PhaseField gt{io::read_image(a.gt), !a.unwrapped};
  Mask mask(pred.values.width(), pred.values.height());
  if (a.mask.empty()) {
    for (auto& v : mask.values()) v = 1;
  } else {
    mask = io::read_mask_pgm(a.mask);
  }
  const auto report =
      eval::phase_error(pred, gt, mask, static_cast<int>(cfg.get_int("eval.margin")), a.method);

  eval::CompareResult result;
  result.methods = {a.method};
  result.rows.push_back({a.scene, a.method, report});
  result.aggregate_mae[a.method] = report.mae;
  result.ordering = {a.method};
  const fs::path out = a.out;
  make_dir(out);
  eval::write_compare_csv(out / "eval.csv", result);
  write_json(out / "eval.json", {{"scene_id", a.scene},
                                 {"method", a.method},
                                 {"mae_rad", report.mae},
                                 {"rmse_rad", report.rmse},
                                 {"max_abs_rad", report.max_abs},
                                 {"masked_pixels", report.masked_pixel_count}});
  const Mask em = eval::evaluation_mask(mask, static_cast<int>(cfg.get_int("eval.margin")));
  io::write_png_heatmap(out / (a.scene + "_" + a.method + "_err.png"), report.error_map, 0.0,
                        report.max_abs > 0.0 ? report.max_abs : 1.0, &em);
  cfg.write(out / "resolved_config.txt");
  std::printf("%s %s mae %.6f rmse %.6f max %.6f pixels %zu\n", a.scene.c_str(), a.method.c_str(), report.mae,
              report.rmse, report.max_abs, report.masked_pixel_count);
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
  Common common;
  std::string data, weights, out;
  std::optional<std::string> methods;
  bool no_sphere = false;
};

void cmd_compare(const CompareArgs& a) {
  RunConfig cfg = resolve(a.common);
  apply(cfg, "eval.methods", a.methods);
  if (a.no_sphere) cfg.set("sphere.enabled", "false");
  const auto methods = cfg.get_list("eval.methods");
  if (methods.empty()) throw ValidationError("eval.methods is empty");

  std::optional<neural::Model> cnn1, cnn2, direct;
  if (!a.weights.empty()) {
    cnn1 = load_optional(fs::path(a.weights) / "cnn1.fpw");
    cnn2 = load_optional(fs::path(a.weights) / "cnn2.fpw");
    direct = load_optional(fs::path(a.weights) / "direct.fpw");
  }
  eval::CompareOptions opts;
  opts.ft = cfg.ft_params();
  opts.wft = cfg.wft_params();
  opts.margin = static_cast<int>(cfg.get_int("eval.margin"));
  opts.cnn1 = cnn1 ? &*cnn1 : nullptr;
  opts.cnn2 = cnn2 ? &*cnn2 : nullptr;
  opts.direct = direct ? &*direct : nullptr;
  for (const auto& m : methods) {
    if (m == "cnn" && !(cnn1 && cnn2))
      throw ConfigError("method cnn needs cnn1.fpw and cnn2.fpw; pass --weights <dir>");
    if (m == "direct" && !direct) throw ConfigError("method direct needs direct.fpw; pass --weights <dir>");
  }

  const auto manifest = dataset::read_manifest(a.data);
  std::vector<synth::Sample> scenes;
  for (auto& s : dataset::read_split(manifest, "test"))
    if (!s.degenerate) scenes.push_back(std::move(s));
  if (scenes.empty()) throw ValidationError("dataset " + a.data + " has no usable test scenes");

  const fs::path out = a.out;
  make_dir(out);
  const auto result = eval::compare_methods(scenes, methods, opts);
  eval::write_compare_csv(out / "compare.csv", result);
  if (cfg.get_bool("eval.heatmaps")) eval::write_error_heatmaps(out / "heatmaps", result, scenes);
  nlohmann::json summary = eval::summary_json(result);

  const auto has = [&](const char* m) { return result.aggregate_mae.count(m) != 0; };
  if (has("cnn") && has("wft") && has("ft")) {
    const auto& mae = result.aggregate_mae;
    summary["neural_below_wft_below_ft"] = mae.at("cnn") < mae.at("wft") && mae.at("wft") < mae.at("ft");
    summary["neural_to_ft_ratio"] = mae.at("cnn") / mae.at("ft");
  }
  for (const auto& m : result.ordering) std::printf("%-8s aggregate MAE %.5f rad\n", m.c_str(), result.aggregate_mae.at(m));
  std::printf("ordering: %s\n", summary["ordering_text"].get<std::string>().c_str());

  if (cfg.get_bool("sphere.enabled")) {
    const auto sopts = cfg.sphere_options();
    const auto snoise = cfg.sphere_noise();
    nlohmann::json sphere;
    for (const auto& m : cfg.get_list("sphere.methods")) {
      if (m == "cnn" && !(cnn1 && cnn2)) {
        std::cout << "sphere: skipping cnn (no weights)\n";
        continue;
      }
      const auto r = eval::run_sphere_metrology(sopts, snoise, cfg.get_u64("sphere.seed"), m, opts.cnn1, opts.cnn2);
      sphere[m] = eval::to_json(r, sopts);
      std::printf("sphere %-4s radius errors %+.1f / %+.1f um, distance error %+.1f um\n", m.c_str(),
                  r.radius_error_mm[0] * 1e3, r.radius_error_mm[1] * 1e3, r.distance_error_mm * 1e3);
    }
    write_json(out / "sphere.json", sphere);
    summary["sphere"] = sphere;
  }
  write_json(out / "summary.json", summary);
  cfg.write(out / "resolved_config.txt");
}

// --- info -------------------------------------------------------------------

struct InfoArgs {
  Common common;
  std::string file;
  bool defaults = false;
};

void cmd_info(const InfoArgs& a) {
  const RunConfig cfg = resolve(a.common);
  if (a.defaults) {
    std::cout << cfg.to_text();
    return;
  }
  if (a.file.empty()) {
    std::cout << "fringe toolkit\nthreads: " << thread_count() << " (cap with FRINGE_THREADS)\n";
    return;
  }
  const fs::path p = a.file;
  if (fs::is_directory(p)) {
    const auto m = dataset::read_manifest(p);
    std::cout << "dataset " << p.string() << ": " << m.entries.size() << " samples, split "
              << m.json.at("split").dump() << ", n_steps " << m.n_steps << '\n';
  } else if (p.extension() == ".fpw") {
    const auto m = neural::load_model(p);
    std::cout << neural::to_string(m.kind) << " network, " << m.config.base_channels << " channels, "
              << m.config.residual_blocks << " residual blocks, " << m.net->parameters().size()
              << " parameter tensors, epoch " << m.epoch << ", best epoch " << m.best_epoch << '\n';
  } else if (p.extension() == ".fpt") {
    const auto t = io::read_fpt(p);
    std::cout << "FPT1 tensor, dims";
    for (auto d : t.dims) std::cout << ' ' << d;
    std::cout << '\n';
  } else {
    const Image img = io::read_image(p);
    std::cout << "image " << img.width() << "x" << img.height() << '\n';
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Fringe-pattern analysis: synthesis, demodulation, training, evaluation"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset");
  add_common(g, gen.common);
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--scenes", gen.scenes, "Number of scenes");
  g->add_option("--seed", gen.seed, "Dataset seed");
  g->add_option("--noise-sigma", gen.noise_sigma, "Gaussian noise sigma (counts)");
  g->add_flag("--write-stacks", gen.stacks, "Also write the phase-shifting frames");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train cnn1, then cnn2 (optionally the direct network)");
  add_common(t, train.common);
  t->add_option("--data", train.data, "Dataset directory")->required();
  t->add_option("--out", train.out, "Checkpoint directory")->required();
  t->add_option("--epochs", train.epochs, "Epoch limit");
  t->add_option("--lr", train.lr, "Learning rate");
  t->add_option("--batch", train.batch, "Batch size");
  t->add_option("--patience", train.patience, "Early-stopping patience (<= 0 disables)");
  t->add_option("--seed", train.seed, "Training seed");
  t->add_flag("--resume", train.resume, "Continue from checkpoints in --out");
  t->add_flag("--direct", train.direct, "Also train the direct fringe-to-phase network");

  DemodArgs demod;
  auto* d = app.add_subcommand("demod", "Demodulate a fringe image or phase-shifting stack");
  add_common(d, demod.common);
  d->add_option("--method", demod.method, "ps, ft, wft, cnn or direct")->required();
  d->add_option("--input", demod.input, "Fringe image (.pgm or .fpt)");
  d->add_option("--stack", demod.stack, "Directory of phase-shifted frames (method ps)");
  d->add_option("--weights", demod.weights, "Directory holding cnn1.fpw, cnn2.fpw or direct.fpw");
  d->add_option("--out", demod.out, "Output directory")->required();
  d->add_option("--carrier", demod.carrier, "Carrier frequency, fringes per width");
  d->add_option("--bandwidth", demod.bandwidth, "FT passband half-width, bins");
  d->add_option("--window-sigma", demod.window_sigma, "WFT window sigma, px");

  UnwrapArgs unw;
  auto* u = app.add_subcommand("unwrap", "Two-frequency temporal phase unwrapping");
  add_common(u, unw.common);
  u->add_option("--high", unw.high, "Wrapped high-frequency phase (.fpt)")->required();
  u->add_option("--low", unw.low, "Low-frequency phase (.fpt)")->required();
  u->add_option("--f-high", unw.f_high, "High frequency, fringes per width");
  u->add_option("--f-low", unw.f_low, "Low frequency, fringes per width");
  u->add_option("--mask", unw.mask, "Mask (.pgm) for the quality statistic");
  u->add_option("--out", unw.out, "Output directory")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Masked phase-error statistics");
  add_common(e, ev.common);
  e->add_option("--pred", ev.pred, "Predicted phase (.fpt)")->required();
  e->add_option("--gt", ev.gt, "Reference phase (.fpt)")->required();
  e->add_option("--mask", ev.mask, "Mask (.pgm); default all pixels");
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_option("--method", ev.method, "Method label for the report");
  e->add_option("--scene", ev.scene, "Scene label for the report");
  e->add_option("--margin", ev.margin, "Border excluded from statistics, px");
  e->add_flag("--unwrapped", ev.unwrapped, "Inputs are unwrapped phase");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Compare methods on the test split and run sphere metrology");
  add_common(c, cmp.common);
  c->add_option("--data", cmp.data, "Dataset directory")->required();
  c->add_option("--weights", cmp.weights, "Directory holding trained networks");
  c->add_option("--out", cmp.out, "Output directory")->required();
  c->add_option("--methods", cmp.methods, "Comma-separated methods (ft,wft,cnn,direct)");
  c->add_flag("--no-sphere", cmp.no_sphere, "Skip the sphere-metrology scene");

  InfoArgs info;
  auto* i = app.add_subcommand("info", "Describe a file or print build and config information");
  add_common(i, info.common);
  i->add_option("file", info.file, "Dataset directory, .fpw, .fpt or .pgm file");
  i->add_flag("--defaults", info.defaults, "Print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) cmd_gen(gen);
    if (*t) cmd_train(train);
    if (*d) cmd_demod(demod);
    if (*u) cmd_unwrap(unw);
    if (*e) cmd_eval(ev);
    if (*c) cmd_compare(cmp);
    if (*i) cmd_info(info);
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  } catch (const IoError& ex) {
    std::cerr << "io error: " << ex.what() << '\n';
    return 2;
  } catch (const NumericError& ex) {
    std::cerr << "numeric error: " << ex.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& ex) {
    std::cerr << "io error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace fringe::cli
