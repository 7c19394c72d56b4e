#include <doctest.h>

#include "fringe/config.hpp"
#include "support.hpp"

using namespace fringe;

TEST_SUITE("config") {
  TEST_CASE("defaults give the 800/150/50 split") {
    const RunConfig c;
    const auto s = c.split_sizes();
    CHECK(s.train == 800);
    CHECK(s.validation == 150);
    CHECK(s.test == 50);
    CHECK(c.train_config().validation_fraction == doctest::Approx(150.0 / 950.0));
    CHECK(c.net_config().base_channels == 32);
    CHECK(c.net_config().residual_blocks == 4);
    CHECK(c.dataset_options().n_steps == 12);
    CHECK(c.noise().gaussian_sigma == 2.0);
  }

  TEST_CASE("960 scenes keep 150 for validation") {
    RunConfig c;
    c.set("dataset.scenes", "960");
    CHECK(c.split_sizes().validation == 144);
    c.set("dataset.test_fraction", "0");
    c.set("dataset.validation_fraction", "0.15625");
    const auto s = c.split_sizes();
    CHECK(s.validation == 150);
    CHECK(s.train == 810);
  }

  TEST_CASE("file syntax, comments and overrides") {
    RunConfig c;
    c.merge_text("# comment line\n\n  train.epochs = 7   # trailing\nscene.width=64\n", "a.cfg");
    CHECK(c.get_int("train.epochs") == 7);
    CHECK(c.get_int("scene.width") == 64);
    c.set("train.learning_rate", "0.002");
    CHECK(c.train_config().learning_rate == 0.002);
    CHECK(c.get_list("eval.methods") == std::vector<std::string>{"ft", "wft", "cnn"});
    c.set("train.lr_schedule", "cosine");
    CHECK(c.train_config().schedule == neural::LrSchedule::cosine);
    c.set("train.lr_schedule", "warmup");
    CHECK_THROWS_AS(c.train_config(), ValidationError);
    c.set("train.lr_schedule", "constant");
    CHECK(c.train_config(neural::NetKind::cnn1).epochs == 7);
    c.set("train.cnn1_epochs", "3");
    CHECK(c.train_config(neural::NetKind::cnn1).epochs == 3);
    CHECK(c.train_config(neural::NetKind::cnn2).epochs == 7);
    CHECK(c.train_config(neural::NetKind::direct).epochs == 7);
    c.set("train.cnn1_epochs", "-1");
    CHECK_THROWS_AS(c.train_config(neural::NetKind::cnn1), ValidationError);
  }

  TEST_CASE("unknown keys and malformed lines name the line") {
    RunConfig c;
    try {
      c.merge_text("train.epochs = 3\n# ok\ntrain.epoch = 4\n", "run.cfg");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("run.cfg:3") != std::string::npos);
      CHECK(std::string(e.what()).find("train.epoch") != std::string::npos);
    }
    CHECK_THROWS_AS(c.merge_text("just words\n"), ValidationError);
    CHECK_THROWS_AS(c.set("no.such", "1"), ValidationError);
  }

  TEST_CASE("typed accessors reject bad values") {
    RunConfig c;
    c.set("train.epochs", "ten");
    CHECK_THROWS_AS(c.get_int("train.epochs"), ValidationError);
    c.set("train.learning_rate", "1e-3x");
    CHECK_THROWS_AS(c.get_double("train.learning_rate"), ValidationError);
    c.set("dataset.seed", "-1");
    CHECK_THROWS_AS(c.get_u64("dataset.seed"), ValidationError);
    c.set("noise.clip", "maybe");
    CHECK_THROWS_AS(c.get_bool("noise.clip"), ValidationError);
    RunConfig d;
    d.set("dataset.scenes", "0");
    CHECK_THROWS_AS(d.split_sizes(), ValidationError);
    d.set("train.learning_rate", "0");
    CHECK_THROWS_AS(d.train_config(), ValidationError);
  }

  TEST_CASE("resolved text round-trips") {
    RunConfig c;
    c.set("scene.width", "96");
    c.set("wft.halfwidth", "0.75");
    const std::string text = c.to_text();
    RunConfig d;
    d.merge_text(text);
    CHECK(d.to_text() == text);
    CHECK(d.get_int("scene.width") == 96);

    const auto dir = test::scratch_dir("config_io");
    c.write(dir / "r.txt");
    CHECK(RunConfig::from_file(dir / "r.txt").to_text() == text);
    CHECK_THROWS_AS(RunConfig::from_file(dir / "missing.txt"), IoError);
  }

  TEST_CASE("builders carry values through") {
    RunConfig c;
    c.set("scene.carrier_frequency", "16");
    c.set("ft.bandwidth", "9");
    c.set("wft.window_sigma", "5");
    c.set("scene.width", "64");
    CHECK(c.ft_params().carrier_frequency == 16.0);
    CHECK(c.ft_params().bandwidth == 9.0);
    const auto w = c.wft_params();
    CHECK(w.window_sigma == 5.0);
    CHECK(w.freq_lo_x == doctest::Approx(kTwoPi * 16 / 64 - 1.0));
    CHECK(c.scene_distribution().width == 64);
    CHECK(c.sphere_options().carrier_frequency == 64.0);
  }
}
