#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fringe/grid.hpp"

namespace fringe::synth {

// Quadratic field over normalised coordinates u, v in [-1, 1]:
// c0 + c1 u + c2 v + c3 u^2 + c4 v^2 + c5 u v.
struct Poly2 {
  std::array<double, 6> coeff{};

  static Poly2 constant(double c) { return Poly2{{c, 0, 0, 0, 0, 0}}; }
  double at(double u, double v) const {
    return coeff[0] + coeff[1] * u + coeff[2] * v + coeff[3] * u * u + coeff[4] * v * v + coeff[5] * u * v;
  }
};

struct GaussianBump {
  double cx = 0, cy = 0;  // px
  double amplitude = 0;   // rad
  double sigma = 1;       // px
};

// Phase jump of `height` on the side of the edge line that its normal
// (cos angle, sin angle) points to. angle = 0 gives a vertical edge at x = edge_x.
struct Step {
  double height = 0;  // rad
  double edge_x = 0, edge_y = 0;
  double angle = 0;
};

// Elliptical support region for an isolated object.
struct Support {
  double cx = 0, cy = 0, rx = 1, ry = 1;
  bool contains(double x, double y) const;
};

struct SceneObject {
  std::vector<GaussianBump> bumps;
  std::vector<Step> steps;
  double offset = 0;               // rad
  std::optional<Support> support;  // none: whole frame
};

enum class SurfaceKind { flat, gaussian_bumps, step, composite };

struct Surface {
  SurfaceKind kind = SurfaceKind::flat;
  std::vector<GaussianBump> bumps;    // gaussian_bumps
  std::vector<Step> steps;            // step
  std::vector<SceneObject> objects;   // composite; later objects occlude earlier ones
};

struct SceneSpec {
  int width = 128;
  int height = 128;
  Surface surface;
  Poly2 background = Poly2::constant(110.0);
  Poly2 modulation = Poly2::constant(90.0);
  // Modulation factor outside every object support (composite scenes).
  double backdrop_modulation = 0.0;
  double carrier_frequency = 32.0;  // fringes per image width
  double max_intensity = 255.0;
  std::uint64_t seed = 0;
};

struct NoiseSpec {
  double gaussian_sigma = 0.0;
  int bit_depth = 8;
  bool clip = true;
  bool quantize = true;  // round to the integer grid of the sensor
};

struct Sample {
  std::string id;
  Image fringe;
  Image background_gt;
  PhasorField phasor_gt;
  PhaseField phase_gt;
  Mask modulation_mask;
  bool degenerate = false;  // empty mask
};

// Throws ValidationError when a scene or noise description breaks its invariants.
void validate(const SceneSpec& spec);
void validate(const NoiseSpec& noise);

Image background_map(const SceneSpec& spec);
// B(x, y) including the composite support masks.
Image modulation_map(const SceneSpec& spec);
Image carrier_phase(const SceneSpec& spec);

// Object phase only; carrier excluded.
PhaseField phase_surface(const SceneSpec& spec);

// A + B cos(carrier + phase - delta). Real valued, not quantised.
Image synth_fringe(const PhaseField& phase, const SceneSpec& spec, double delta);
std::vector<Image> synth_stack(const PhaseField& phase, const SceneSpec& spec, int n_steps);

Image degrade(const Image& img, const NoiseSpec& noise, std::uint64_t seed);

struct DatasetOptions {
  int n_steps = 12;
  double mask_threshold = 10.0;
};

// The N captured frames of a scene, each degraded with its own derived seed.
std::vector<Image> degraded_stack(const SceneSpec& scene, const NoiseSpec& noise, int n_steps);
Sample make_sample(const SceneSpec& scene, const NoiseSpec& noise, const DatasetOptions& opts);
std::vector<Sample> gen_dataset(const std::vector<SceneSpec>& scenes, const NoiseSpec& noise,
                                const DatasetOptions& opts = {});

// Randomised scene distribution used for training and test suites.
struct SceneDistribution {
  int width = 128;
  int height = 128;
  double carrier_frequency = 32.0;
  double max_object_phase = 20.0;  // rad
  double max_step = 8.0;           // rad
  double max_slope = 1.0;          // bump amplitude / sigma bound, rad/px
  double background_level = 110.0;
  double modulation_level = 90.0;
  // Probabilities of drawing a scene with isolated supported objects and with steps.
  double isolated_probability = 0.7;
  double step_probability = 0.6;
};

SceneSpec random_scene(const SceneDistribution& dist, std::uint64_t seed);

// Deterministic 64-bit seed derivation.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

nlohmann::json to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const nlohmann::json& j);
std::string to_string(SurfaceKind kind);

}  // namespace fringe::synth
