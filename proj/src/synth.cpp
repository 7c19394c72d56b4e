#include "fringe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "fringe/classical.hpp"
#include "fringe/parallel.hpp"

namespace fringe::synth {
namespace {

double norm_u(const SceneSpec& s, int x) { return s.width > 1 ? 2.0 * x / (s.width - 1) - 1.0 : 0.0; }
double norm_v(const SceneSpec& s, int y) { return s.height > 1 ? 2.0 * y / (s.height - 1) - 1.0 : 0.0; }

double bump_value(const GaussianBump& b, double x, double y) {
  const double dx = x - b.cx;
  const double dy = y - b.cy;
  return b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
}

double step_value(const Step& s, double x, double y) {
  const double side = (x - s.edge_x) * std::cos(s.angle) + (y - s.edge_y) * std::sin(s.angle);
  return side >= 0.0 ? s.height : 0.0;
}

double object_value(const SceneObject& o, double x, double y) {
  double v = o.offset;
  for (const auto& b : o.bumps) v += bump_value(b, x, y);
  for (const auto& s : o.steps) v += step_value(s, x, y);
  return v;
}

// Index of the topmost object covering (x, y), or -1.
int covering_object(const std::vector<SceneObject>& objects, double x, double y) {
  for (int k = static_cast<int>(objects.size()) - 1; k >= 0; --k) {
    const auto& sup = objects[static_cast<std::size_t>(k)].support;
    if (!sup || sup->contains(x, y)) return k;
  }
  return -1;
}

}  // namespace

bool Support::contains(double x, double y) const {
  const double u = (x - cx) / rx;
  const double v = (y - cy) / ry;
  return u * u + v * v <= 1.0;
}

void validate(const SceneSpec& spec) {
  if (spec.width < 8 || spec.height < 8) {
    throw ValidationError("scene dimensions must be at least 8x8, got " + std::to_string(spec.width) + "x" +
                          std::to_string(spec.height));
  }
  if (!(spec.carrier_frequency >= 0.0)) throw ValidationError("carrier frequency must be non-negative");
  if (spec.backdrop_modulation < 0.0 || spec.backdrop_modulation > 1.0)
    throw ValidationError("backdrop modulation must lie in [0, 1]");
  for (const auto& b : spec.surface.bumps)
    if (!(b.sigma > 0)) throw ValidationError("gaussian bump sigma must be positive");
  for (const auto& o : spec.surface.objects) {
    for (const auto& b : o.bumps)
      if (!(b.sigma > 0)) throw ValidationError("gaussian bump sigma must be positive");
    if (o.support && !(o.support->rx > 0 && o.support->ry > 0))
      throw ValidationError("object support radii must be positive");
  }
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double a = spec.background.at(norm_u(spec, x), norm_v(spec, y));
      const double b = spec.modulation.at(norm_u(spec, x), norm_v(spec, y));
      if (b < 0.0) throw ValidationError("modulation B must be non-negative everywhere");
      if (a - b < 0.0 || a + b > spec.max_intensity)
        throw ValidationError("background/modulation leave [0, max_intensity] at (" + std::to_string(x) + ", " +
                              std::to_string(y) + ")");
    }
  }
}

void validate(const NoiseSpec& noise) {
  if (!(noise.gaussian_sigma >= 0.0)) throw ValidationError("noise sigma must be non-negative");
  if (noise.bit_depth < 1 || noise.bit_depth > 16) throw ValidationError("bit depth must lie in [1, 16]");
}

Image background_map(const SceneSpec& spec) {
  Image a(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) a(x, y) = spec.background.at(norm_u(spec, x), norm_v(spec, y));
  return a;
}

Image modulation_map(const SceneSpec& spec) {
  Image b(spec.width, spec.height);
  const bool composite = spec.surface.kind == SurfaceKind::composite;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = spec.modulation.at(norm_u(spec, x), norm_v(spec, y));
      if (composite && covering_object(spec.surface.objects, x, y) < 0) v *= spec.backdrop_modulation;
      b(x, y) = v;
    }
  }
  return b;
}

Image carrier_phase(const SceneSpec& spec) {
  Image c(spec.width, spec.height);
  const double k = kTwoPi * spec.carrier_frequency / spec.width;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) c(x, y) = k * x;
  return c;
}

PhaseField phase_surface(const SceneSpec& spec) {
  validate(spec);
  PhaseField out{Image(spec.width, spec.height), false};
  const auto& s = spec.surface;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = 0.0;
      switch (s.kind) {
        case SurfaceKind::flat:
          break;
        case SurfaceKind::gaussian_bumps:
          for (const auto& b : s.bumps) v += bump_value(b, x, y);
          break;
        case SurfaceKind::step:
          for (const auto& st : s.steps) v += step_value(st, x, y);
          break;
        case SurfaceKind::composite: {
          const int k = covering_object(s.objects, x, y);
          if (k >= 0) v = object_value(s.objects[static_cast<std::size_t>(k)], x, y);
          break;
        }
      }
      out.values(x, y) = v;
    }
  }
  return out;
}

Image synth_fringe(const PhaseField& phase, const SceneSpec& spec, double delta) {
  if (phase.values.width() != spec.width || phase.values.height() != spec.height)
    throw ValidationError("synth_fringe: phase dimensions do not match the scene");
  const Image a = background_map(spec);
  const Image b = modulation_map(spec);
  const double k = kTwoPi * spec.carrier_frequency / spec.width;
  Image out(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) out(x, y) = a(x, y) + b(x, y) * std::cos(k * x + phase.values(x, y) - delta);
  return out;
}

std::vector<Image> synth_stack(const PhaseField& phase, const SceneSpec& spec, int n_steps) {
  if (n_steps < 3) throw ValidationError("phase-shifting needs at least 3 steps, got " + std::to_string(n_steps));
  std::vector<Image> stack;
  stack.reserve(static_cast<std::size_t>(n_steps));
  for (int n = 0; n < n_steps; ++n) stack.push_back(synth_fringe(phase, spec, kTwoPi * n / n_steps));
  return stack;
}

Image degrade(const Image& img, const NoiseSpec& noise, std::uint64_t seed) {
  validate(noise);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double top = std::ldexp(1.0, noise.bit_depth) - 1.0;
  Image out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    double v = img[i];
    if (noise.gaussian_sigma > 0.0) v += noise.gaussian_sigma * gauss(rng);
    if (noise.clip) v = std::clamp(v, 0.0, top);
    out[i] = noise.quantize ? std::round(v) : v;
  }
  return out;
}

std::vector<Image> degraded_stack(const SceneSpec& scene, const NoiseSpec& noise, int n_steps) {
  auto stack = synth_stack(phase_surface(scene), scene, n_steps);
  for (std::size_t n = 0; n < stack.size(); ++n) stack[n] = degrade(stack[n], noise, derive_seed(scene.seed, n + 1));
  return stack;
}

Sample make_sample(const SceneSpec& scene, const NoiseSpec& noise, const DatasetOptions& opts) {
  auto stack = degraded_stack(scene, noise, opts.n_steps);

  Sample s;
  char id[32];
  std::snprintf(id, sizeof id, "scene_%016llx", static_cast<unsigned long long>(scene.seed));
  s.id = id;
  s.background_gt = classical::ps_background(stack);
  s.phasor_gt = classical::ps_phasor(stack);
  s.phase_gt = classical::phase_from_phasor(s.phasor_gt).phase;
  const Image mod = classical::modulation(s.phasor_gt);
  s.modulation_mask = Mask(scene.width, scene.height);
  bool any = false;
  for (std::size_t i = 0; i < mod.size(); ++i) {
    s.modulation_mask[i] = mod[i] >= opts.mask_threshold ? 1 : 0;
    any = any || s.modulation_mask[i];
  }
  s.degenerate = !any;
  s.fringe = std::move(stack[0]);
  return s;
}

std::vector<Sample> gen_dataset(const std::vector<SceneSpec>& scenes, const NoiseSpec& noise,
                                const DatasetOptions& opts) {
  if (opts.n_steps < 3) throw ValidationError("phase-shifting needs at least 3 steps");
  validate(noise);
  std::vector<Sample> out(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) { out[i] = make_sample(scenes[i], noise, opts); });
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(base ^ mix(index));
}

SceneSpec random_scene(const SceneDistribution& dist, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto chance = [&](double p) { return uni(0.0, 1.0) < p; };
  auto count = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  SceneSpec spec;
  spec.width = dist.width;
  spec.height = dist.height;
  spec.carrier_frequency = dist.carrier_frequency;
  spec.seed = seed;
  spec.surface.kind = SurfaceKind::composite;

  const double w = dist.width;
  const double h = dist.height;
  const double scale = std::min(w, h);
  auto make_bump = [&](double cx, double cy, double spread) {
    GaussianBump b;
    b.cx = cx + uni(-spread, spread);
    b.cy = cy + uni(-spread, spread);
    b.sigma = uni(0.07, 0.2) * scale;
    const double amp = std::min(uni(1.0, 0.5 * dist.max_object_phase), dist.max_slope * b.sigma);
    b.amplitude = chance(0.5) ? amp : -amp;
    return b;
  };
  auto make_step = [&](double cx, double cy, double spread) {
    Step st;
    const double mag = uni(std::min(2.0, dist.max_step), dist.max_step);
    st.height = chance(0.5) ? mag : -mag;
    st.edge_x = cx + uni(-spread, spread);
    st.edge_y = cy + uni(-spread, spread);
    st.angle = uni(-kPi, kPi);
    return st;
  };

  if (chance(dist.isolated_probability)) {
    const int n = count(1, 3);
    for (int k = 0; k < n; ++k) {
      SceneObject o;
      Support sup;
      sup.rx = uni(0.14, 0.32) * w;
      sup.ry = uni(0.14, 0.32) * h;
      sup.cx = uni(0.15, 0.85) * w;
      sup.cy = uni(0.15, 0.85) * h;
      o.support = sup;
      o.offset = uni(-kPi, kPi);
      const int nb = count(1, 2);
      for (int j = 0; j < nb; ++j) o.bumps.push_back(make_bump(sup.cx, sup.cy, 0.5 * std::min(sup.rx, sup.ry)));
      if (chance(dist.step_probability)) o.steps.push_back(make_step(sup.cx, sup.cy, 0.4 * std::min(sup.rx, sup.ry)));
      spec.surface.objects.push_back(std::move(o));
    }
  } else {
    SceneObject o;
    const int nb = count(1, 3);
    for (int j = 0; j < nb; ++j) o.bumps.push_back(make_bump(0.5 * w, 0.5 * h, 0.3 * scale));
    if (chance(dist.step_probability)) {
      const int ns = count(1, 2);
      for (int j = 0; j < ns; ++j) o.steps.push_back(make_step(0.5 * w, 0.5 * h, 0.25 * scale));
    }
    spec.surface.objects.push_back(std::move(o));
  }

  // Keep the overall object phase inside [-max, max].
  double peak = 0.0;
  for (const auto& o : spec.surface.objects) {
    double sum = std::abs(o.offset);
    for (const auto& b : o.bumps) sum += std::abs(b.amplitude);
    for (const auto& s : o.steps) sum += std::abs(s.height);
    peak = std::max(peak, sum);
  }
  if (peak > dist.max_object_phase) {
    const double f = dist.max_object_phase / peak;
    for (auto& o : spec.surface.objects) {
      o.offset *= f;
      for (auto& b : o.bumps) b.amplitude *= f;
      for (auto& s : o.steps) s.height *= f;
    }
  }

  // Smooth non-uniform illumination; shrink the variation until the
  // noiseless render stays inside [0, max_intensity].
  const double b0 = dist.modulation_level * uni(0.7, 1.0);
  std::array<double, 6> va{0, uni(-10, 10), uni(-10, 10), uni(-5, 5), uni(-5, 5), uni(-5, 5)};
  std::array<double, 6> vb{0, uni(-8, 8), uni(-8, 8), uni(-4, 4), uni(-4, 4), uni(-4, 4)};
  for (int attempt = 0;; ++attempt) {
    for (std::size_t i = 0; i < 6; ++i) {
      spec.background.coeff[i] = (i == 0 ? dist.background_level : 0.0) + va[i];
      spec.modulation.coeff[i] = (i == 0 ? b0 : 0.0) + vb[i];
    }
    try {
      validate(spec);
      break;
    } catch (const ValidationError&) {
      if (attempt > 30) throw;
      for (auto& v : va) v *= 0.5;
      for (auto& v : vb) v *= 0.5;
    }
  }
  return spec;
}

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::flat: return "flat";
    case SurfaceKind::gaussian_bumps: return "gaussian-bumps";
    case SurfaceKind::step: return "step";
    case SurfaceKind::composite: return "composite";
  }
  return "flat";
}

namespace {

SurfaceKind kind_from_string(const std::string& s) {
  if (s == "flat") return SurfaceKind::flat;
  if (s == "gaussian-bumps") return SurfaceKind::gaussian_bumps;
  if (s == "step") return SurfaceKind::step;
  if (s == "composite") return SurfaceKind::composite;
  throw ValidationError("unknown surface kind '" + s + "'");
}

nlohmann::json bumps_json(const std::vector<GaussianBump>& bumps) {
  auto arr = nlohmann::json::array();
  for (const auto& b : bumps) arr.push_back({{"cx", b.cx}, {"cy", b.cy}, {"amplitude", b.amplitude}, {"sigma", b.sigma}});
  return arr;
}

nlohmann::json steps_json(const std::vector<Step>& steps) {
  auto arr = nlohmann::json::array();
  for (const auto& s : steps)
    arr.push_back({{"height", s.height}, {"edge_x", s.edge_x}, {"edge_y", s.edge_y}, {"angle", s.angle}});
  return arr;
}

std::vector<GaussianBump> bumps_from(const nlohmann::json& j) {
  std::vector<GaussianBump> out;
  for (const auto& b : j) out.push_back({b.at("cx"), b.at("cy"), b.at("amplitude"), b.at("sigma")});
  return out;
}

std::vector<Step> steps_from(const nlohmann::json& j) {
  std::vector<Step> out;
  for (const auto& s : j) out.push_back({s.at("height"), s.at("edge_x"), s.at("edge_y"), s.at("angle")});
  return out;
}

}  // namespace

nlohmann::json to_json(const SceneSpec& spec) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : spec.surface.objects) {
    nlohmann::json jo{{"offset", o.offset}, {"bumps", bumps_json(o.bumps)}, {"steps", steps_json(o.steps)}};
    if (o.support) jo["support"] = {{"cx", o.support->cx}, {"cy", o.support->cy}, {"rx", o.support->rx}, {"ry", o.support->ry}};
    objects.push_back(std::move(jo));
  }
  return {
      {"width", spec.width},
      {"height", spec.height},
      {"surface",
       {{"kind", to_string(spec.surface.kind)},
        {"bumps", bumps_json(spec.surface.bumps)},
        {"steps", steps_json(spec.surface.steps)},
        {"objects", objects}}},
      {"background", spec.background.coeff},
      {"modulation", spec.modulation.coeff},
      {"backdrop_modulation", spec.backdrop_modulation},
      {"carrier_frequency", spec.carrier_frequency},
      {"max_intensity", spec.max_intensity},
      {"seed", spec.seed},
  };
}

SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec s;
  s.width = j.at("width");
  s.height = j.at("height");
  const auto& sj = j.at("surface");
  s.surface.kind = kind_from_string(sj.at("kind"));
  s.surface.bumps = bumps_from(sj.at("bumps"));
  s.surface.steps = steps_from(sj.at("steps"));
  for (const auto& jo : sj.at("objects")) {
    SceneObject o;
    o.offset = jo.at("offset");
    o.bumps = bumps_from(jo.at("bumps"));
    o.steps = steps_from(jo.at("steps"));
    if (jo.contains("support")) {
      const auto& js = jo["support"];
      o.support = Support{js.at("cx"), js.at("cy"), js.at("rx"), js.at("ry")};
    }
    s.surface.objects.push_back(std::move(o));
  }
  s.background.coeff = j.at("background").get<std::array<double, 6>>();
  s.modulation.coeff = j.at("modulation").get<std::array<double, 6>>();
  s.backdrop_modulation = j.at("backdrop_modulation");
  s.carrier_frequency = j.at("carrier_frequency");
  s.max_intensity = j.at("max_intensity");
  s.seed = j.at("seed");
  return s;
}

}  // namespace fringe::synth
