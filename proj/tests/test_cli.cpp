#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "fringe/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace fringe;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr captured.
Run fringe_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log = fs::path(FRINGE_SCRATCH) / ("cli_" + std::to_string(counter++) + ".log");
  const std::string cmd = std::string("FRINGE_THREADS=1 \"") + FRINGE_BIN + "\" " + args + " > \"" + log.string() +
                          "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative path -> contents for every regular file below root.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

const std::string kSmall =
    " --set scene.width=32 --set scene.height=32 --set scene.carrier_frequency=8"
    " --set ft.bandwidth=6 --set network.base_channels=4 --set network.residual_blocks=1 --set train.batch_size=4";

// Shared 10-scene dataset.
const fs::path& small_dataset() {
  static const fs::path dir = [] {
    const fs::path d = test::scratch_dir("cli_data") / "data";
    const Run r = fringe_cli("gen --out " + d.string() + " --scenes 10 --seed 7 --write-stacks" + kSmall);
    if (r.code != 0) throw std::runtime_error("gen failed: " + r.output);
    return d;
  }();
  return dir;
}

std::string first_sample(const fs::path& data, const std::string& split = "test") {
  std::ifstream in(data / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  for (const auto& s : j.at("samples"))
    if (s.at("split") == split) return s.at("id");
  throw std::runtime_error("no sample in split " + split);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("gen is byte-identical across runs and records the split") {
    const fs::path root = test::scratch_dir("cli_gen");
    const std::string args = " --scenes 10 --seed 7" + kSmall;
    REQUIRE(fringe_cli("gen --out " + (root / "a").string() + args).code == 0);
    REQUIRE(fringe_cli("gen --out " + (root / "b").string() + args).code == 0);
    const auto a = tree(root / "a"), b = tree(root / "b");
    CHECK(a.size() > 10);
    CHECK(a == b);

    // Re-running from the echoed configuration reproduces the dataset.
    REQUIRE(fringe_cli("gen --out " + (root / "c").string() + " --config " + (root / "a" / "resolved_config.txt").string())
                .code == 0);
    CHECK(tree(root / "c") == a);

    const Run d = fringe_cli("gen --out " + (root / "d").string() + " --scenes 1000 --set scene.width=8"
                             " --set scene.height=8 --set scene.carrier_frequency=2");
    REQUIRE(d.code == 0);
    std::ifstream in(root / "d" / "manifest.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("split").at("train") == 800);
    CHECK(j.at("split").at("validation") == 150);
    CHECK(j.at("split").at("test") == 50);
  }

  TEST_CASE("validation, configuration and IO failures map to exit codes") {
    const fs::path root = test::scratch_dir("cli_errors");
    CHECK(fringe_cli("gen --out " + (root / "z").string() + " --scenes 0").code == 1);
    CHECK(fringe_cli("gen").code == 1);
    CHECK(fringe_cli("frobnicate").code == 1);
    CHECK(fringe_cli("gen --out " + (root / "x").string() + " --set no.such=1").code == 1);

    std::ofstream(root / "bad.cfg") << "scene.width = 64\n\nbogus.key = 1\n";
    const Run bad = fringe_cli("gen --out " + (root / "y").string() + " --config " + (root / "bad.cfg").string());
    CHECK(bad.code == 1);
    CHECK(bad.output.find("bad.cfg:3") != std::string::npos);

    CHECK(fringe_cli("train --data " + (root / "nothing").string() + " --out " + (root / "w").string()).code == 1);
    CHECK(fringe_cli("gen --out /proc/forbidden/data --scenes 2" + kSmall).code == 2);
    CHECK(fringe_cli("info " + (root / "missing.fpt").string()).code == 2);
    CHECK(fringe_cli("gen --out " + (root / "q").string() + " --config " + (root / "none.cfg").string()).code == 2);
  }

  TEST_CASE("demod ps on a stack reproduces the ground truth") {
    const fs::path data = small_dataset();
    const std::string id = first_sample(data);
    const fs::path out = test::scratch_dir("cli_ps");
    const fs::path sample = data / "samples" / id;
    REQUIRE(fringe_cli("demod --method ps --stack " + (sample / "stack").string() + " --out " + out.string()).code == 0);
    const Image got = io::read_image_fpt(out / "phase.fpt");
    const Image want = io::read_image_fpt(sample / "phase.fpt");
    CHECK(test::max_abs_diff(got, want) <= 1e-9);
    for (const char* f : {"phasor.fpt", "valid.pgm", "phase.png", "demod.json", "resolved_config.txt"})
      CHECK(fs::exists(out / f));
  }

  TEST_CASE("demod ft output feeds eval, and eval of identical maps gives zero") {
    const fs::path data = small_dataset();
    const fs::path sample = data / "samples" / first_sample(data);
    const fs::path root = test::scratch_dir("cli_eval");
    REQUIRE(fringe_cli("demod --method ft --bandwidth 6 --edge-width 2 --input " + (sample / "fringe.pgm").string() +
                       " --out " + (root / "ft").string() + kSmall)
                .code != 0);  // unknown flag
    REQUIRE(fringe_cli("demod --method ft --bandwidth 6 --input " + (sample / "fringe.pgm").string() + " --out " +
                       (root / "ft").string() + kSmall)
                .code == 0);
    const Run ev = fringe_cli("eval --pred " + (root / "ft" / "phase.fpt").string() + " --gt " +
                              (sample / "phase.fpt").string() + " --mask " + (sample / "mask.pgm").string() +
                              " --method ft --scene s --out " + (root / "ev").string());
    REQUIRE(ev.code == 0);
    CHECK(fs::exists(root / "ev" / "s_ft_err.png"));

    REQUIRE(fringe_cli("eval --pred " + (sample / "phase.fpt").string() + " --gt " + (sample / "phase.fpt").string() +
                       " --method same --scene s --out " + (root / "zero").string())
                .code == 0);
    std::ifstream csv(root / "zero" / "eval.csv");
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    std::vector<std::string> fields;
    std::stringstream ss(row);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    REQUIRE(fields.size() == 6);
    CHECK(fields[0] == "s");
    CHECK(fields[1] == "same");
    for (int i = 2; i < 5; ++i) CHECK(std::stod(fields[i]) == 0.0);
    CHECK(std::stoi(fields[5]) > 0);

    std::mt19937_64 rng(1);
    io::write_image_fpt(root / "small.fpt", test::random_image(16, 16, rng, -1, 1));
    CHECK(fringe_cli("eval --pred " + (root / "small.fpt").string() + " --gt " + (sample / "phase.fpt").string() +
                     " --out " + (root / "mismatch").string())
              .code == 1);
  }

  TEST_CASE("demod cnn without weights names the flag") {
    const fs::path data = small_dataset();
    const fs::path sample = data / "samples" / first_sample(data);
    const Run r = fringe_cli("demod --method cnn --input " + (sample / "fringe.pgm").string() + " --out " +
                             test::scratch_dir("cli_cnn").string());
    CHECK(r.code == 1);
    CHECK(r.output.find("--weights") != std::string::npos);
    CHECK(fringe_cli("demod --method ps --out " + test::scratch_dir("cli_ps2").string()).code == 1);
  }

  TEST_CASE("unwrap command") {
    const fs::path root = test::scratch_dir("cli_unwrap");
    Image high(64, 4), low(64, 4), truth(64, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 64; ++x) {
        truth(x, y) = kTwoPi * 8.0 * x / 64.0;
        high(x, y) = wrap_phase(truth(x, y));
        low(x, y) = wrap_phase(truth(x, y) / 8.0);
      }
    io::write_image_fpt(root / "high.fpt", high);
    io::write_image_fpt(root / "low.fpt", low);
    REQUIRE(fringe_cli("unwrap --high " + (root / "high.fpt").string() + " --low " + (root / "low.fpt").string() +
                       " --f-high 8 --out " + (root / "out").string())
                .code == 0);
    const Image got = io::read_image_fpt(root / "out" / "unwrapped.fpt");
    CHECK(test::max_abs_diff(got, truth) <= 1e-4);  // f32 storage
    CHECK(fringe_cli("unwrap --high " + (root / "high.fpt").string() + " --low " + (root / "low.fpt").string() +
                     " --f-high 1 --out " + (root / "bad").string())
              .code == 1);
  }

  TEST_CASE("train smoke run, determinism, resume and compare") {
    const fs::path data = small_dataset();
    const fs::path root = test::scratch_dir("cli_train");
    const std::string base = "train --data " + data.string() + " --epochs 2 --lr 1e-3 --seed 3" + kSmall;
    REQUIRE(fringe_cli(base + " --out " + (root / "a").string()).code == 0);
    REQUIRE(fringe_cli(base + " --out " + (root / "b").string()).code == 0);
    for (const char* f : {"cnn1.fpw", "cnn2.fpw", "history_cnn1.csv", "history_cnn2.csv", "resolved_config.txt"})
      CHECK(fs::exists(root / "a" / f));
    CHECK(tree(root / "a") == tree(root / "b"));

    // Resume continues the epoch numbering.
    const std::string more = "train --data " + data.string() + " --epochs 3 --lr 1e-3 --seed 3 --resume" + kSmall;
    REQUIRE(fringe_cli(more + " --out " + (root / "a").string()).code == 0);
    std::ifstream hist(root / "a" / "history_cnn1.csv");
    std::vector<std::string> lines;
    for (std::string l; std::getline(hist, l);) lines.push_back(l);
    REQUIRE(lines.size() == 4);
    CHECK(lines[1].rfind("1,", 0) == 0);
    CHECK(lines[3].rfind("3,", 0) == 0);

    // Demodulation with trained weights is deterministic.
    const fs::path sample = data / "samples" / first_sample(data);
    for (const char* d : {"d1", "d2"})
      REQUIRE(fringe_cli("demod --method cnn --weights " + (root / "b").string() + " --input " +
                         (sample / "fringe.pgm").string() + " --out " + (root / d).string())
                  .code == 0);
    CHECK(tree(root / "d1") == tree(root / "d2"));

    const Run cmp = fringe_cli("compare --data " + data.string() + " --weights " + (root / "b").string() +
                               " --no-sphere --out " + (root / "cmp").string() + kSmall);
    REQUIRE(cmp.code == 0);
    std::ifstream sj(root / "cmp" / "summary.json");
    const auto summary = nlohmann::json::parse(sj);
    CHECK(summary.at("ordering").size() == 3);
    CHECK(summary.contains("neural_below_wft_below_ft"));
    CHECK(fs::exists(root / "cmp" / "compare.csv"));
    CHECK(fringe_cli("compare --data " + data.string() + " --no-sphere --out " + (root / "cmp2").string() + kSmall)
              .code == 1);
  }

  TEST_CASE("divergent training exits 3 and leaves a finite checkpoint") {
    const fs::path data = small_dataset();
    const fs::path out = test::scratch_dir("cli_nan") / "w";
    const Run r = fringe_cli("train --data " + data.string() + " --epochs 5 --lr 1e300 --out " + out.string() + kSmall);
    CHECK(r.code == 3);
    REQUIRE(fs::exists(out / "cnn1.fpw"));
    CHECK(fringe_cli("info " + (out / "cnn1.fpw").string()).code == 0);
  }

  TEST_CASE("info") {
    const Run r = fringe_cli("info --defaults");
    CHECK(r.code == 0);
    CHECK(r.output.find("train.learning_rate") != std::string::npos);
    CHECK(fringe_cli("info " + small_dataset().string()).code == 0);
  }
}
