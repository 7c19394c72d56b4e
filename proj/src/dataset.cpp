#include "fringe/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "fringe/io.hpp"
#include "fringe/parallel.hpp"

namespace fringe::dataset {

namespace fs = std::filesystem;

std::vector<const Entry*> Manifest::split(const std::string& name) const {
  std::vector<const Entry*> out;
  for (const auto& e : entries)
    if (e.split == name) out.push_back(&e);
  return out;
}

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

fs::path fringe_file(const fs::path& dir) {
  return fs::exists(dir / "fringe.pgm") ? dir / "fringe.pgm" : dir / "fringe.fpt";
}

}  // namespace

void write_stack(const fs::path& dir, const std::vector<Image>& frames, bool quantized) {
  fs::create_directories(dir);
  for (std::size_t n = 0; n < frames.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.%s", n, quantized ? "pgm" : "fpt");
    if (quantized) {
      io::write_pgm(dir / name, frames[n]);
    } else {
      io::write_image_fpt(dir / name, frames[n]);
    }
  }
}

std::vector<Image> read_stack(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("stack directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".pgm" || ext == ".fpt")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> frames;
  for (const auto& f : files) frames.push_back(io::read_image(f));
  if (frames.size() < 3) throw ValidationError("stack " + dir.string() + " holds fewer than 3 frames");
  for (const auto& f : frames) require_same_shape(frames[0], f, "stack frames");
  return frames;
}

void write_sample(const fs::path& dir, const synth::Sample& s, bool quantized) {
  fs::create_directories(dir);
  if (quantized) {
    io::write_pgm(dir / "fringe.pgm", s.fringe);
  } else {
    io::write_image_fpt(dir / "fringe.fpt", s.fringe);
  }
  io::write_image_fpt(dir / "background.fpt", s.background_gt);
  io::write_fpt(dir / "phasor.fpt", io::to_raw(std::vector<Image>{s.phasor_gt.numerator, s.phasor_gt.denominator}));
  io::write_image_fpt(dir / "phase.fpt", s.phase_gt.values);
  io::write_pgm(dir / "mask.pgm", s.modulation_mask);
}

Manifest generate(const RunConfig& config, const fs::path& out) {
  const auto sizes = config.split_sizes();
  const auto dist = config.scene_distribution();
  const auto noise = config.noise();
  const auto opts = config.dataset_options();
  const std::uint64_t seed = config.get_u64("dataset.seed");
  const bool stacks = config.get_bool("dataset.write_stacks");
  const int total = sizes.train + sizes.validation + sizes.test;

  std::vector<synth::SceneSpec> scenes;
  for (int i = 0; i < total; ++i) scenes.push_back(synth::random_scene(dist, synth::derive_seed(seed, static_cast<std::uint64_t>(i))));

  std::error_code ec;
  fs::create_directories(out / "samples", ec);
  if (ec) throw IoError("cannot create " + (out / "samples").string() + ": " + ec.message());

  Manifest m;
  m.root = out;
  m.n_steps = opts.n_steps;
  m.entries.resize(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    const auto sample = synth::make_sample(scenes[i], noise, opts);
    Entry& e = m.entries[i];
    e.id = sample.id;
    e.seed = scenes[i].seed;
    e.dir = fs::path("samples") / sample.id;
    e.degenerate = sample.degenerate;
    const int k = static_cast<int>(i);
    e.split = k < sizes.train ? "train" : k < sizes.train + sizes.validation ? "validation" : "test";
    write_sample(out / e.dir, sample, noise.quantize);
    if (stacks) write_stack(out / e.dir / "stack", synth::degraded_stack(scenes[i], noise, opts.n_steps), noise.quantize);
  });

  nlohmann::json j;
  j["format"] = "fringe-dataset-1";
  j["n_steps"] = opts.n_steps;
  j["mask_threshold"] = opts.mask_threshold;
  j["seed"] = seed;
  j["split"] = {{"train", sizes.train}, {"validation", sizes.validation}, {"test", sizes.test}};
  j["noise"] = {{"gaussian_sigma", noise.gaussian_sigma},
                {"bit_depth", noise.bit_depth},
                {"clip", noise.clip},
                {"quantize", noise.quantize}};
  j["samples"] = nlohmann::json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Entry& e = m.entries[i];
    j["samples"].push_back({{"id", e.id},
                            {"split", e.split},
                            {"seed", e.seed},
                            {"dir", e.dir.generic_string()},
                            {"degenerate", e.degenerate},
                            {"scene", synth::to_json(scenes[i])}});
  }
  write_json(out / "manifest.json", j);
  config.write(out / "resolved_config.txt");
  m.json = std::move(j);
  return m;
}

Manifest read_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  if (!fs::exists(path)) throw ValidationError("dataset manifest not found: " + path.string());
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  Manifest m;
  m.root = root;
  try {
    m.json = nlohmann::json::parse(f);
    if (m.json.at("format") != "fringe-dataset-1") throw ValidationError("unsupported dataset format");
    m.n_steps = m.json.at("n_steps").get<int>();
    for (const auto& s : m.json.at("samples")) {
      Entry e;
      e.id = s.at("id").get<std::string>();
      e.split = s.at("split").get<std::string>();
      e.seed = s.at("seed").get<std::uint64_t>();
      e.dir = s.at("dir").get<std::string>();
      e.degenerate = s.at("degenerate").get<bool>();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError("malformed manifest " + path.string() + ": " + ex.what());
  }
  return m;
}

synth::Sample read_sample(const Manifest& m, const Entry& e) {
  const fs::path dir = m.root / e.dir;
  synth::Sample s;
  s.id = e.id;
  s.degenerate = e.degenerate;
  s.fringe = io::read_image(fringe_file(dir));
  s.background_gt = io::read_image_fpt(dir / "background.fpt");
  const auto phasor = io::images_from_raw(io::read_fpt(dir / "phasor.fpt"));
  if (phasor.size() != 2) throw ValidationError("phasor file must hold two planes: " + dir.string());
  s.phasor_gt = {phasor[0], phasor[1], 0.5 * m.n_steps};
  s.phase_gt = {io::read_image_fpt(dir / "phase.fpt"), true};
  s.modulation_mask = io::read_mask_pgm(dir / "mask.pgm");
  require_same_shape(s.fringe, s.background_gt, "sample " + e.id);
  require_same_shape(s.fringe, s.phasor_gt.numerator, "sample " + e.id);
  require_same_shape(s.fringe, s.phase_gt.values, "sample " + e.id);
  require_same_shape(s.fringe, s.modulation_mask, "sample " + e.id);
  return s;
}

std::vector<synth::Sample> read_split(const Manifest& m, const std::string& split) {
  const auto entries = m.split(split);
  std::vector<synth::Sample> out(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) { out[i] = read_sample(m, *entries[i]); });
  return out;
}

}  // namespace fringe::dataset
