#include "fringe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

#include "fringe/io.hpp"
#include "fringe/parallel.hpp"
#include "fringe/unwrap.hpp"

namespace fringe::eval {

Mask evaluation_mask(const Mask& mask, int margin) {
  if (margin < 0) throw ValidationError("evaluation margin must be non-negative");
  Mask out(mask.width(), mask.height());
  for (int y = margin; y < mask.height() - margin; ++y)
    for (int x = margin; x < mask.width() - margin; ++x) out(x, y) = mask(x, y) ? 1 : 0;
  return out;
}

ErrorReport phase_error(const PhaseField& pred, const PhaseField& gt, const Mask& mask, int margin,
                        std::string method) {
  require_same_shape(pred.values, gt.values, "phase_error");
  require_same_shape(pred.values, mask, "phase_error mask");
  if (pred.wrapped != gt.wrapped) throw ValidationError("phase_error: cannot mix wrapped and unwrapped phase");
  const Mask eval = evaluation_mask(mask, margin);

  ErrorReport r;
  r.method = std::move(method);
  r.error_map = Image(pred.values.width(), pred.values.height());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    if (!eval[i]) continue;
    const double d = pred.values[i] - gt.values[i];
    const double e = std::abs(pred.wrapped ? wrap_phase(d) : d);
    r.error_map[i] = e;
    sum += e;
    sum_sq += e * e;
    r.max_abs = std::max(r.max_abs, e);
    ++r.masked_pixel_count;
  }
  if (r.masked_pixel_count == 0) throw ValidationError("phase_error: evaluation mask is empty");
  const auto n = static_cast<double>(r.masked_pixel_count);
  r.mae = sum / n;
  r.rmse = std::sqrt(sum_sq / n);
  return r;
}

// --- phase to height ------------------------------------------------------

Image height_map(const PhaseField& phase, const Image& reference, const HeightModel& model) {
  if (phase.wrapped) throw ValidationError("phase_to_height needs unwrapped phase");
  require_same_shape(phase.values, reference, "phase_to_height reference");
  if (!(model.mm_per_rad != 0.0) || !(model.mm_per_px > 0.0)) throw ValidationError("invalid height model");
  Image z(phase.values.width(), phase.values.height());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = model.mm_per_rad * (phase.values[i] - reference[i]);
  return z;
}

std::vector<Point3> phase_to_height(const PhaseField& phase, const Image& reference, const HeightModel& model,
                                    const Mask* mask) {
  if (mask) require_same_shape(phase.values, *mask, "phase_to_height mask");
  const Image z = height_map(phase, reference, model);
  std::vector<Point3> pts;
  pts.reserve(z.size());
  for (int y = 0; y < z.height(); ++y)
    for (int x = 0; x < z.width(); ++x)
      if (!mask || (*mask)(x, y)) pts.push_back({model.mm_per_px * x, model.mm_per_px * y, z(x, y)});
  return pts;
}

// --- sphere fitting -------------------------------------------------------

SphereFit fit_sphere(std::span<const Point3> points) {
  const auto n = points.size();
  if (n < 4) throw FitError("sphere fit needs at least 4 points");

  // Work in centred, unit-scaled coordinates for conditioning.
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += Eigen::Vector3d(p.x, p.y, p.z);
  mean /= static_cast<double>(n);
  Eigen::MatrixX3d q(n, 3);
  for (std::size_t i = 0; i < n; ++i)
    q.row(static_cast<Eigen::Index>(i)) = Eigen::Vector3d(points[i].x, points[i].y, points[i].z) - mean;
  const double scale = std::sqrt(q.rowwise().squaredNorm().mean());
  if (!(scale > 0.0) || !std::isfinite(scale)) throw FitError("sphere fit: points are coincident or non-finite");
  q /= scale;

  const Eigen::Matrix3d cov = q.transpose() * q / static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.eigenvalues()(0) < 1e-12 * es.eigenvalues()(2)) throw FitError("sphere fit: points are coplanar");

  // x^2 + y^2 + z^2 = 2 c . p + d
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    a.row(k) << 2.0 * q(k, 0), 2.0 * q(k, 1), 2.0 * q(k, 2), 1.0;
    b(k) = q.row(k).squaredNorm();
  }
  const Eigen::Vector4d sol = a.colPivHouseholderQr().solve(b);
  Eigen::Vector3d c = sol.head<3>();
  const double r2 = sol(3) + c.squaredNorm();
  if (!(r2 > 0.0)) throw FitError("sphere fit: algebraic solution has no real radius");
  double r = std::sqrt(r2);

  // Gauss-Newton on geometric residuals |p - c| - r.
  Eigen::MatrixXd jac(n, 4);
  Eigen::VectorXd res(n);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const Eigen::Vector3d d = q.row(k).transpose() - c;
      const double dist = d.norm();
      if (!(dist > 0.0)) throw FitError("sphere fit: point at the centre");
      res(k) = dist - r;
      jac.row(k) << -d.transpose() / dist, -1.0;
    }
    const Eigen::Vector4d step = jac.colPivHouseholderQr().solve(-res);
    c += step.head<3>();
    r += step(3);
    if (!step.allFinite()) throw FitError("sphere fit diverged");
    if (step.norm() < 1e-15 * std::max(1.0, r)) break;
  }

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = (q.row(static_cast<Eigen::Index>(i)).transpose() - c).norm() - r;
    ss += e * e;
  }
  if (!(r > 0.0)) throw FitError("sphere fit: non-positive radius");

  SphereFit fit;
  const Eigen::Vector3d centre = c * scale + mean;
  fit.center = {centre.x(), centre.y(), centre.z()};
  fit.radius = r * scale;
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n)) * scale;
  fit.point_count = n;
  return fit;
}

nlohmann::json to_json(const SphereFit& fit) {
  return {{"center_mm", {fit.center.x, fit.center.y, fit.center.z}},
          {"radius_mm", fit.radius},
          {"rms_residual_mm", fit.rms_residual},
          {"point_count", fit.point_count}};
}

// --- method comparison ------------------------------------------------------

namespace {

const std::vector<std::string> kMethods = {"ft", "wft", "cnn", "direct", "ps"};

void check_methods(const std::vector<std::string>& methods, const CompareOptions& opts) {
  if (methods.empty()) throw ValidationError("compare: method list is empty");
  for (const auto& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
      throw ValidationError("unknown method '" + m + "'");
    if (m == "cnn" && (!opts.cnn1 || !opts.cnn2)) throw ConfigError("method 'cnn' needs cnn1 and cnn2 weights");
    if (m == "direct" && !opts.direct) throw ConfigError("method 'direct' needs direct-network weights");
  }
}

}  // namespace

PhaseField demodulate(const std::string& method, const synth::Sample& sample, const CompareOptions& opts) {
  if (method == "ps") return sample.phase_gt;
  if (method == "ft") return classical::phase_from_phasor(classical::ft_demod(sample.fringe, opts.ft)).phase;
  if (method == "wft") return classical::phase_from_phasor(classical::wft_demod(sample.fringe, opts.wft)).phase;
  if (method == "cnn") {
    if (!opts.cnn1 || !opts.cnn2) throw ConfigError("method 'cnn' needs cnn1 and cnn2 weights");
    return neural::demod_neural(sample.fringe, *opts.cnn1, *opts.cnn2).phase;
  }
  if (method == "direct") {
    if (!opts.direct) throw ConfigError("method 'direct' needs direct-network weights");
    return neural::direct_forward(sample.fringe, *opts.direct);
  }
  throw ValidationError("unknown method '" + method + "'");
}

CompareResult compare_methods(const std::vector<synth::Sample>& scenes, const std::vector<std::string>& methods,
                              const CompareOptions& opts) {
  check_methods(methods, opts);
  if (scenes.empty()) throw ValidationError("compare: no scenes");
  CompareResult out;
  out.methods = methods;
  const std::size_t m = methods.size();
  std::vector<CompareRow> rows(scenes.size() * m);
  parallel_for(scenes.size(), [&](std::size_t s) {
    const auto& sc = scenes[s];
    for (std::size_t k = 0; k < m; ++k) {
      const PhaseField pred = demodulate(methods[k], sc, opts);
      rows[s * m + k] = {sc.id, methods[k], phase_error(pred, sc.phase_gt, sc.modulation_mask, opts.margin, methods[k])};
    }
  });
  out.rows = std::move(rows);

  for (const auto& method : methods) {
    double sum = 0.0;
    double count = 0.0;
    for (const auto& row : out.rows) {
      if (row.method != method) continue;
      sum += row.report.mae * static_cast<double>(row.report.masked_pixel_count);
      count += static_cast<double>(row.report.masked_pixel_count);
    }
    out.aggregate_mae[method] = sum / count;
  }
  out.ordering = methods;
  std::stable_sort(out.ordering.begin(), out.ordering.end(),
                   [&](const auto& a, const auto& b) { return out.aggregate_mae.at(a) < out.aggregate_mae.at(b); });
  return out;
}

void write_compare_csv(const std::filesystem::path& path, const CompareResult& result) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << "scene_id,method,mae_rad,rmse_rad,max_abs_rad,masked_pixels\n";
  f.precision(9);
  for (const auto& row : result.rows)
    f << row.scene_id << ',' << row.method << ',' << row.report.mae << ',' << row.report.rmse << ','
      << row.report.max_abs << ',' << row.report.masked_pixel_count << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

void write_error_heatmaps(const std::filesystem::path& dir, const CompareResult& result,
                          const std::vector<synth::Sample>& scenes) {
  std::filesystem::create_directories(dir);
  const std::size_t m = result.methods.size();
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    double hi = 0.0;
    for (std::size_t k = 0; k < m; ++k) hi = std::max(hi, result.rows[s * m + k].report.max_abs);
    if (!(hi > 0.0)) hi = 1.0;
    // Heatmaps use the evaluation mask so excluded pixels render black.
    const Mask eval = evaluation_mask(scenes[s].modulation_mask, kDefaultMargin);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& row = result.rows[s * m + k];
      io::write_png_heatmap(dir / (row.scene_id + "_" + row.method + "_err.png"), row.report.error_map, 0.0, hi,
                            &eval);
    }
  }
}

nlohmann::json summary_json(const CompareResult& result) {
  nlohmann::json j;
  j["methods"] = result.methods;
  j["scenes"] = result.rows.size() / std::max<std::size_t>(1, result.methods.size());
  for (const auto& [k, v] : result.aggregate_mae) j["aggregate_mae_rad"][k] = v;
  j["ordering"] = result.ordering;
  std::string chain;
  for (const auto& m : result.ordering) chain += (chain.empty() ? "" : " < ") + m;
  j["ordering_text"] = chain;
  return j;
}

// --- sphere metrology -------------------------------------------------------

SphereScene make_sphere_scene(const SphereSceneOptions& opts) {
  SphereScene scene;
  scene.spec.width = opts.width;
  scene.spec.height = opts.height;
  scene.spec.carrier_frequency = opts.carrier_frequency;
  scene.spec.background = synth::Poly2::constant(opts.background);
  scene.spec.modulation = synth::Poly2::constant(opts.modulation);
  synth::validate(scene.spec);
  if (!(opts.model.mm_per_rad > 0.0) || !(opts.model.mm_per_px > 0.0)) throw ValidationError("invalid height model");

  // Unwrapped object phase: the upper surface of each sphere, z / k.
  scene.object_phase = {Image(opts.width, opts.height), false};
  for (int y = 0; y < opts.height; ++y) {
    for (int x = 0; x < opts.width; ++x) {
      const double px = opts.model.mm_per_px * x;
      const double py = opts.model.mm_per_px * y;
      double z = 0.0;
      for (const auto& s : opts.spheres) {
        const double r2 = s.radius * s.radius - (px - s.center.x) * (px - s.center.x) -
                          (py - s.center.y) * (py - s.center.y);
        if (r2 > 0.0) z = std::max(z, s.center.z + std::sqrt(r2));
      }
      scene.object_phase.values(x, y) = z / opts.model.mm_per_rad;
    }
  }
  return scene;
}

namespace {

std::vector<Image> render_stack(const PhaseField& object, const synth::SceneSpec& spec, int n_steps,
                                const synth::NoiseSpec& noise, std::uint64_t seed) {
  auto stack = synth::synth_stack(object, spec, n_steps);
  for (std::size_t n = 0; n < stack.size(); ++n) stack[n] = synth::degrade(stack[n], noise, synth::derive_seed(seed, n));
  return stack;
}

// Labels 4-connected components of `mask`; returns pixel lists, largest first.
std::vector<std::vector<std::size_t>> components(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(mask.size(), -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || label[start] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::queue<std::size_t> todo;
    todo.push(start);
    label[start] = id;
    while (!todo.empty()) {
      const std::size_t i = todo.front();
      todo.pop();
      out.back().push_back(i);
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny[k]) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx[k]);
        if (mask[j] && label[j] < 0) {
          label[j] = id;
          todo.push(j);
        }
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

}  // namespace

MetrologyResult run_sphere_metrology(const SphereSceneOptions& opts, const synth::NoiseSpec& noise,
                                     std::uint64_t seed, const std::string& method, const neural::Model* cnn1,
                                     const neural::Model* cnn2) {
  if (method != "ps" && method != "cnn") throw ValidationError("sphere metrology supports methods ps and cnn");
  if (method == "cnn" && (!cnn1 || !cnn2)) throw ConfigError("method 'cnn' needs cnn1 and cnn2 weights");
  if (opts.n_steps < 3) throw ValidationError("phase-shifting needs at least 3 steps");
  synth::validate(noise);
  const SphereScene scene = make_sphere_scene(opts);

  const auto high = render_stack(scene.object_phase, scene.spec, opts.n_steps, noise, synth::derive_seed(seed, 1));
  PhaseField phase_high = method == "ps" ? classical::ps_phase(high)
                                         : neural::demod_neural(high[0], *cnn1, *cnn2).phase;

  // Unit-frequency companion: phase scales with fringe frequency.
  synth::SceneSpec low_spec = scene.spec;
  low_spec.carrier_frequency = 1.0;
  PhaseField low_object = scene.object_phase;
  for (auto& v : low_object.values.values()) v /= opts.carrier_frequency;
  const auto low = render_stack(low_object, low_spec, opts.n_steps, noise, synth::derive_seed(seed, 2));
  const PhaseField phase_low = classical::ps_phase(low);

  unwrap::FrequencyPair pair{opts.carrier_frequency, 1.0, std::move(phase_high), phase_low};
  const auto unwrapped = unwrap::temporal_unwrap(pair);

  const Image reference = synth::carrier_phase(scene.spec);
  const Image z = height_map(unwrapped.phase, reference, opts.model);
  double r_min = std::numeric_limits<double>::infinity();
  for (const auto& s : opts.spheres) r_min = std::min(r_min, s.radius);
  Mask cap(opts.width, opts.height);
  for (std::size_t i = 0; i < z.size(); ++i) cap[i] = z[i] > opts.fit_height_fraction * r_min ? 1 : 0;
  auto parts = components(cap);
  if (parts.size() < 2) throw NumericError("sphere metrology: fewer than two sphere caps found");
  parts.resize(2);

  MetrologyResult r;
  r.unwrap_warning = unwrapped.quality_warning;
  std::array<std::vector<Point3>, 2> clouds;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i : parts[k]) {
      const int x = static_cast<int>(i % static_cast<std::size_t>(opts.width));
      const int y = static_cast<int>(i / static_cast<std::size_t>(opts.width));
      clouds[k].push_back({opts.model.mm_per_px * x, opts.model.mm_per_px * y, z[i]});
    }
  // Match clouds to spheres by lateral position.
  auto mean_x = [](const std::vector<Point3>& c) {
    double s = 0.0;
    for (const auto& p : c) s += p.x;
    return s / static_cast<double>(c.size());
  };
  if ((mean_x(clouds[0]) > mean_x(clouds[1])) != (opts.spheres[0].center.x > opts.spheres[1].center.x))
    std::swap(clouds[0], clouds[1]);
  for (std::size_t k = 0; k < 2; ++k) {
    r.fits[k] = fit_sphere(clouds[k]);
    r.radius_error_mm[k] = r.fits[k].radius - opts.spheres[k].radius;
  }
  r.distance_mm = distance(r.fits[0].center, r.fits[1].center);
  r.distance_error_mm = r.distance_mm - distance(opts.spheres[0].center, opts.spheres[1].center);
  return r;
}

nlohmann::json to_json(const MetrologyResult& r, const SphereSceneOptions& opts) {
  nlohmann::json j;
  for (std::size_t k = 0; k < 2; ++k) {
    auto f = to_json(r.fits[k]);
    f["true_radius_mm"] = opts.spheres[k].radius;
    f["radius_error_um"] = r.radius_error_mm[k] * 1e3;
    j["spheres"].push_back(f);
  }
  j["center_distance_mm"] = r.distance_mm;
  j["true_center_distance_mm"] = distance(opts.spheres[0].center, opts.spheres[1].center);
  j["center_distance_error_um"] = r.distance_error_mm * 1e3;
  j["unwrap_quality_warning"] = r.unwrap_warning;
  return j;
}

}  // namespace fringe::eval
