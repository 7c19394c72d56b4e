#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "fringe/classical.hpp"
#include "fringe/synth.hpp"
#include "support.hpp"

using namespace fringe;
using namespace fringe::synth;

namespace {
SceneSpec flat_scene(int w = 64, int h = 48) {
  SceneSpec s;
  s.width = w;
  s.height = h;
  s.carrier_frequency = 8.0;
  s.seed = 11;
  return s;
}

SceneSpec uniform_scene(double a, double b) {
  SceneSpec s = flat_scene(8, 8);
  s.background = Poly2::constant(a);
  s.modulation = Poly2::constant(b);
  s.carrier_frequency = 0.0;
  return s;
}
}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("flat surface gives an all-zero phase field") {
    const PhaseField p = phase_surface(flat_scene());
    CHECK_FALSE(p.wrapped);
    for (double v : p.values.values()) CHECK(v == 0.0);
  }

  TEST_CASE("gaussian bump peaks at its amplitude") {
    SceneSpec s = flat_scene(128, 128);
    s.surface.kind = SurfaceKind::gaussian_bumps;
    s.surface.bumps.push_back({64.0, 64.0, 3.0, 20.0});
    const PhaseField p = phase_surface(s);
    CHECK(std::abs(p.values(64, 64) - 3.0) <= 1e-12);
    for (double v : p.values.values()) CHECK(v <= 3.0 + 1e-12);
  }

  TEST_CASE("step field has exactly two levels") {
    SceneSpec s = flat_scene(128, 128);
    s.surface.kind = SurfaceKind::step;
    s.surface.steps.push_back({4.0, 64.5, 64.0, 0.0});
    const PhaseField p = phase_surface(s);
    std::map<double, int> hist;
    for (double v : p.values.values()) ++hist[v];
    REQUIRE(hist.size() == 2);
    CHECK(hist.begin()->first == 0.0);
    CHECK(hist.rbegin()->first == 4.0);
    CHECK(hist[0.0] == 65 * 128);
    CHECK(p.values(127, 0) == 4.0);
  }

  TEST_CASE("synth_fringe point values and antisymmetry") {
    const SceneSpec s = uniform_scene(100.0, 50.0);
    PhaseField zero{Image(8, 8, 0.0), false};
    CHECK(synth_fringe(zero, s, 0.0)(3, 3) == doctest::Approx(150.0).epsilon(1e-15));
    PhaseField quarter{Image(8, 8, kPi / 2), false};
    CHECK(synth_fringe(quarter, s, kPi / 2)(5, 2) == doctest::Approx(150.0).epsilon(1e-15));

    SceneSpec r = flat_scene();
    r.background = Poly2{{100.0, 5.0, -3.0, 2.0, 1.0, 0.5}};
    r.modulation = Poly2{{60.0, 4.0, 2.0, -1.0, 0.0, 1.0}};
    r.surface.kind = SurfaceKind::gaussian_bumps;
    r.surface.bumps.push_back({20.0, 30.0, 5.0, 9.0});
    const PhaseField p = phase_surface(r);
    const Image a = synth_fringe(p, r, 0.0);
    const Image b = synth_fringe(p, r, kPi);
    const Image bg = background_map(r);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] + b[i] - 2.0 * bg[i]) < 1e-12);
  }

  TEST_CASE("synth_fringe rejects a phase of the wrong size") {
    PhaseField wrong{Image(7, 8), false};
    CHECK_THROWS_AS(synth_fringe(wrong, uniform_scene(100, 50), 0.0), ValidationError);
  }

  TEST_CASE("stack shifts and step-count validation") {
    const SceneSpec s = uniform_scene(100.0, 50.0);
    PhaseField zero{Image(8, 8, 0.0), false};
    const auto four = synth_stack(zero, s, 4);
    REQUIRE(four.size() == 4);
    const double want[] = {150.0, 100.0, 50.0, 100.0};
    for (int n = 0; n < 4; ++n) CHECK(std::abs(four[n](1, 1) - want[n]) < 1e-12);
    CHECK_THROWS_AS(synth_stack(zero, s, 2), ValidationError);

    SceneSpec r = flat_scene();
    const PhaseField p = phase_surface(r);
    const auto twelve = synth_stack(p, r, 12);
    REQUIRE(twelve.size() == 12);
    CHECK(twelve[0] == synth_fringe(p, r, 0.0));
  }

  TEST_CASE("noiseless stacks: mean equals A and the arctangent recovers the phase") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      SceneDistribution dist;
      dist.width = 64;
      dist.height = 64;
      dist.carrier_frequency = 16.0;
      const SceneSpec s = random_scene(dist, seed);
      const PhaseField p = phase_surface(s);
      const Image a = background_map(s);
      const Image b = modulation_map(s);
      const Image carrier = carrier_phase(s);
      for (int n : {3, 4, 7, 12}) {
        const auto stack = synth_stack(p, s, n);
        const Image mean = classical::ps_background(stack);
        CHECK(test::max_abs_diff(mean, a) <= 1e-12);
        const auto phase = classical::ps_phase(stack);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (b[i] <= 1e-3) continue;
          worst = std::max(worst, std::abs(wrap_phase(phase.values[i] - carrier[i] - p.values[i])));
        }
        CHECK(worst <= 1e-9);
        for (const Image& f : stack)
          for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(f[i] >= a[i] - b[i] - 1e-12);
            CHECK(f[i] <= a[i] + b[i] + 1e-12);
          }
      }
    }
  }

  TEST_CASE("degrade rounds, clips and adds calibrated noise") {
    NoiseSpec clean;
    CHECK(degrade(Image(1, 1, 100.4), clean, 1)[0] == 100.0);
    CHECK(degrade(Image(1, 1, 300.0), clean, 1)[0] == 255.0);
    CHECK(degrade(Image(1, 1, -4.0), clean, 1)[0] == 0.0);

    NoiseSpec noisy;
    noisy.gaussian_sigma = 2.0;
    noisy.quantize = false;
    const Image out = degrade(Image(1000, 100, 128.0), noisy, 77);
    double sum = 0.0, sq = 0.0;
    for (double v : out.values()) sum += v;
    const double mean = sum / out.size();
    for (double v : out.values()) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / (out.size() - 1));
    CHECK(std::abs(mean - 128.0) < 0.05);
    CHECK(std::abs(sd - 2.0) < 0.05);

    CHECK(degrade(Image(16, 16, 128.0), noisy, 5) == degrade(Image(16, 16, 128.0), noisy, 5));
    CHECK_FALSE(degrade(Image(16, 16, 128.0), noisy, 5) == degrade(Image(16, 16, 128.0), noisy, 6));
  }

  TEST_CASE("gen_dataset on a clean flat scene reproduces the wrapped carrier") {
    const SceneSpec s = flat_scene();
    NoiseSpec noise;
    noise.quantize = false;
    const auto samples = gen_dataset({s}, noise);
    REQUIRE(samples.size() == 1);
    const Image carrier = carrier_phase(s);
    int inside = 0;
    for (std::size_t i = 0; i < carrier.size(); ++i) {
      if (!samples[0].modulation_mask[i]) continue;
      ++inside;
      CHECK(std::abs(wrap_phase(samples[0].phase_gt.values[i] - carrier[i])) <= 1e-6);
    }
    CHECK(inside == static_cast<int>(carrier.size()));
    CHECK_FALSE(samples[0].degenerate);
    CHECK(samples[0].phase_gt.wrapped);
  }

  TEST_CASE("mask threshold above the modulation flags the sample degenerate") {
    DatasetOptions opts;
    opts.mask_threshold = 1000.0;
    const auto samples = gen_dataset({flat_scene()}, NoiseSpec{}, opts);
    CHECK(samples[0].degenerate);
    for (auto v : samples[0].modulation_mask.values()) CHECK(v == 0);
    opts.n_steps = 2;
    CHECK_THROWS_AS(gen_dataset({flat_scene()}, NoiseSpec{}, opts), ValidationError);
  }

  TEST_CASE("960 scenes give 960 samples") {
    SceneDistribution dist;
    dist.width = 16;
    dist.height = 16;
    dist.carrier_frequency = 4.0;
    std::vector<SceneSpec> scenes;
    for (int i = 0; i < 960; ++i) scenes.push_back(random_scene(dist, derive_seed(3, i)));
    CHECK(gen_dataset(scenes, NoiseSpec{}, {4, 10.0}).size() == 960);
  }

  TEST_CASE("scene validation") {
    SceneSpec s = flat_scene();
    s.width = 4;
    CHECK_THROWS_AS(validate(s), ValidationError);
    s = flat_scene();
    s.background = Poly2::constant(50.0);
    s.modulation = Poly2::constant(80.0);
    CHECK_THROWS_AS(validate(s), ValidationError);
    NoiseSpec n;
    n.gaussian_sigma = -1.0;
    CHECK_THROWS_AS(validate(n), ValidationError);
  }

  TEST_CASE("rendering is deterministic and random scenes are valid") {
    SceneDistribution dist;
    int with_steps = 0, isolated = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const SceneSpec s = random_scene(dist, seed);
      CHECK_NOTHROW(validate(s));
      for (const auto& o : s.surface.objects) isolated += o.support.has_value();
      const PhaseField p = phase_surface(s);
      double peak = 0.0;
      for (double v : p.values.values()) peak = std::max(peak, std::abs(v));
      CHECK(peak <= dist.max_object_phase + 1e-9);
      bool step = !s.surface.steps.empty();
      for (const auto& o : s.surface.objects) step = step || !o.steps.empty();
      with_steps += step;
      CHECK(to_json(random_scene(dist, seed)) == to_json(s));
    }
    CHECK(with_steps > 50);
    CHECK(isolated > 50);

    const SceneSpec s = random_scene(dist, 42);
    CHECK(to_json(scene_from_json(to_json(s))) == to_json(s));
    NoiseSpec noise;
    noise.gaussian_sigma = 2.0;
    const Sample a = make_sample(s, noise, {});
    const Sample b = make_sample(s, noise, {});
    CHECK(a.fringe == b.fringe);
    CHECK(a.phase_gt.values == b.phase_gt.values);
    CHECK(a.phasor_gt.numerator == b.phasor_gt.numerator);
    CHECK(a.modulation_mask == b.modulation_mask);
  }

  TEST_CASE("derive_seed separates indices and bases") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  }
}
