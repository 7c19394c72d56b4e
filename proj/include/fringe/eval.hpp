#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fringe/classical.hpp"
#include "fringe/grid.hpp"
#include "fringe/neural.hpp"
#include "fringe/synth.hpp"

namespace fringe::eval {

inline constexpr int kDefaultMargin = 4;

struct ErrorReport {
  std::string method;
  double mae = 0.0;
  double rmse = 0.0;
  double max_abs = 0.0;
  std::size_t masked_pixel_count = 0;
  Image error_map;  // |error| inside the evaluation mask, 0 elsewhere
};

// mask AND a border of `margin` pixels removed.
Mask evaluation_mask(const Mask& mask, int margin);

// Wrapped inputs compare through wrap(pred - gt); unwrapped ones directly.
ErrorReport phase_error(const PhaseField& pred, const PhaseField& gt, const Mask& mask, int margin = kDefaultMargin,
                        std::string method = {});

// --- phase to height ---------------------------------------------------------

struct Point3 {
  double x = 0, y = 0, z = 0;
};

// Idealised proportional model: z = mm_per_rad (phase - reference),
// x = mm_per_px col, y = mm_per_px row.
struct HeightModel {
  double mm_per_rad = 2.0;
  double mm_per_px = 0.75;
};

Image height_map(const PhaseField& phase, const Image& reference, const HeightModel& model);
std::vector<Point3> phase_to_height(const PhaseField& phase, const Image& reference, const HeightModel& model,
                                    const Mask* mask = nullptr);

// --- sphere fitting ------------------------------------------------------------

struct SphereFit {
  Point3 center;
  double radius = 0.0;
  double rms_residual = 0.0;
  std::size_t point_count = 0;
};

struct FitError : NumericError {
  using NumericError::NumericError;
};

// Algebraic least-squares fit refined by Gauss-Newton on geometric residuals.
SphereFit fit_sphere(std::span<const Point3> points);

nlohmann::json to_json(const SphereFit& fit);

// --- method comparison ------------------------------------------------------

struct CompareOptions {
  classical::FtParams ft;
  classical::WftParams wft;
  int margin = kDefaultMargin;
  const neural::Model* cnn1 = nullptr;
  const neural::Model* cnn2 = nullptr;
  const neural::Model* direct = nullptr;
};

struct CompareRow {
  std::string scene_id;
  std::string method;
  ErrorReport report;
};

struct CompareResult {
  std::vector<std::string> methods;
  std::vector<CompareRow> rows;
  // Pixel-weighted MAE over all scenes, per method.
  std::map<std::string, double> aggregate_mae;
  // Methods sorted by aggregate MAE, best first.
  std::vector<std::string> ordering;
};

// Methods: "ft", "wft", "cnn", "direct", "ps" (the last reproduces the ground truth).
PhaseField demodulate(const std::string& method, const synth::Sample& sample, const CompareOptions& opts);
CompareResult compare_methods(const std::vector<synth::Sample>& scenes, const std::vector<std::string>& methods,
                              const CompareOptions& opts);

// CSV columns: scene_id, method, mae_rad, rmse_rad, max_abs_rad, masked_pixels.
void write_compare_csv(const std::filesystem::path& path, const CompareResult& result);
// <scene>_<method>_err.png with one colour scale shared by all methods of a scene.
void write_error_heatmaps(const std::filesystem::path& dir, const CompareResult& result,
                          const std::vector<synth::Sample>& scenes);
nlohmann::json summary_json(const CompareResult& result);

// --- sphere metrology --------------------------------------------------------

struct Sphere {
  Point3 center;  // mm
  double radius = 0.0;
};

struct SphereSceneOptions {
  int width = 256;
  int height = 256;
  double carrier_frequency = 64.0;
  HeightModel model;
  std::array<Sphere, 2> spheres{{{{56.0, 96.0, 0.0}, 25.398}, {{56.0 + 100.688, 96.0, 0.0}, 25.403}}};
  double background = 110.0;
  double modulation = 90.0;
  int n_steps = 12;
  // Points used for fitting: measured height above this fraction of the radius.
  double fit_height_fraction = 0.527;
};

struct SphereScene {
  synth::SceneSpec spec;  // flat surface carrying A, B and the carrier
  PhaseField object_phase;
};

SphereScene make_sphere_scene(const SphereSceneOptions& opts);

struct MetrologyResult {
  std::array<SphereFit, 2> fits;
  std::array<double, 2> radius_error_mm{};
  double distance_mm = 0.0;
  double distance_error_mm = 0.0;
  bool unwrap_warning = false;
};

// Renders the scene (12-step high-frequency and unit-frequency stacks),
// demodulates the high-frequency phase with `method` ("ps" or "cnn"),
// unwraps temporally, converts to height and fits both spheres.
MetrologyResult run_sphere_metrology(const SphereSceneOptions& opts, const synth::NoiseSpec& noise,
                                     std::uint64_t seed, const std::string& method,
                                     const neural::Model* cnn1 = nullptr, const neural::Model* cnn2 = nullptr);

nlohmann::json to_json(const MetrologyResult& r, const SphereSceneOptions& opts);

}  // namespace fringe::eval
