#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fringe/classical.hpp"
#include "fringe/eval.hpp"
#include "fringe/io.hpp"
#include "fringe/neural.hpp"
#include "fringe/synth.hpp"
#include "fringe/unwrap.hpp"

namespace py = pybind11;
using namespace fringe;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename T>
Grid<T> grid_from(const py::array_t<T, py::array::c_style | py::array::forcecast>& a, const char* what) {
  if (a.ndim() != 2) throw ValidationError(std::string(what) + " must be a 2-D array");
  Grid<T> g(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), g.data());
  return g;
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> a({g.height(), g.width()});
  std::copy(g.data(), g.data() + g.size(), a.mutable_data());
  return a;
}

std::vector<Image> stack_from(const Array& a) {
  if (a.ndim() != 3) throw ValidationError("stack must be a 3-D array (frames, height, width)");
  std::vector<Image> out;
  const auto h = static_cast<int>(a.shape(1)), w = static_cast<int>(a.shape(2));
  for (py::ssize_t n = 0; n < a.shape(0); ++n) {
    Image img(w, h);
    std::copy(a.data(n, 0, 0), a.data(n, 0, 0) + img.size(), img.data());
    out.push_back(std::move(img));
  }
  return out;
}

py::array_t<double> phase_of(const PhasorField& p) { return to_array(classical::phase_from_phasor(p).phase.values); }

py::dict sample_dict(const synth::Sample& s) {
  py::dict d;
  d["id"] = s.id;
  d["fringe"] = to_array(s.fringe);
  d["background"] = to_array(s.background_gt);
  d["numerator"] = to_array(s.phasor_gt.numerator);
  d["denominator"] = to_array(s.phasor_gt.denominator);
  d["phase"] = to_array(s.phase_gt.values);
  d["mask"] = to_array(s.modulation_mask);
  d["degenerate"] = s.degenerate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fringe-pattern analysis: synthesis, classical and neural demodulation, unwrapping, evaluation";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("wrap_phase", [](const Array& a) { return to_array(wrap_phase(grid_from<double>(a, "phase"))); },
        py::arg("phase"), "Wrap every element into (-pi, pi].");

  m.def(
      "make_sample",
      [](std::uint64_t seed, int width, int height, double carrier, double noise_sigma, int n_steps, bool quantize) {
        synth::SceneDistribution dist;
        dist.width = width;
        dist.height = height;
        dist.carrier_frequency = carrier;
        synth::NoiseSpec noise;
        noise.gaussian_sigma = noise_sigma;
        noise.quantize = quantize;
        synth::DatasetOptions opts;
        opts.n_steps = n_steps;
        return sample_dict(synth::make_sample(synth::random_scene(dist, seed), noise, opts));
      },
      py::arg("seed"), py::arg("width") = 128, py::arg("height") = 128, py::arg("carrier") = 32.0,
      py::arg("noise_sigma") = 2.0, py::arg("n_steps") = 12, py::arg("quantize") = true,
      "Random scene rendered as a labelled sample (fringe, background, numerator, denominator, phase, mask).");

  m.def(
      "ps_demod",
      [](const Array& stack) {
        const auto frames = stack_from(stack);
        return py::make_tuple(to_array(classical::ps_phase(frames).values), to_array(classical::ps_background(frames)));
      },
      py::arg("stack"), "N-step phase shifting; returns (wrapped phase, background).");

  m.def(
      "ft_demod",
      [](const Array& fringe, double carrier, double bandwidth, double edge_width) {
        return phase_of(classical::ft_demod(grid_from<double>(fringe, "fringe"), {carrier, bandwidth, edge_width}));
      },
      py::arg("fringe"), py::arg("carrier"), py::arg("bandwidth") = 20.0, py::arg("edge_width") = 4.0,
      "Fourier-transform demodulation; returns the wrapped phase.");

  m.def(
      "wft_demod",
      [](const Array& fringe, double carrier, double window_sigma, double halfwidth, double freq_step,
         double threshold) {
        const Image img = grid_from<double>(fringe, "fringe");
        auto p = classical::WftParams::around_carrier(carrier, img.width(), halfwidth);
        p.window_sigma = window_sigma;
        p.freq_step = freq_step;
        p.threshold = threshold;
        return phase_of(classical::wft_demod(img, p));
      },
      py::arg("fringe"), py::arg("carrier"), py::arg("window_sigma") = 10.0, py::arg("halfwidth") = 1.0,
      py::arg("freq_step") = 0.05, py::arg("threshold") = 6.0,
      "Windowed Fourier filtering around the carrier; returns the wrapped phase.");

  py::class_<neural::Model>(m, "Model")
      .def_property_readonly("kind", [](const neural::Model& x) { return neural::to_string(x.kind); })
      .def_readonly("epoch", &neural::Model::epoch)
      .def_property_readonly("base_channels", [](const neural::Model& x) { return x.config.base_channels; });

  m.def("load_model", &neural::load_model, py::arg("path"), "Load a .fpw checkpoint.");

  m.def(
      "demod_neural",
      [](const Array& fringe, const neural::Model& cnn1, const neural::Model& cnn2) {
        const auto r = neural::demod_neural(grid_from<double>(fringe, "fringe"), cnn1, cnn2);
        return to_array(r.phase.values);
      },
      py::arg("fringe"), py::arg("cnn1"), py::arg("cnn2"), "Two-stage network demodulation; returns the wrapped phase.");

  m.def(
      "temporal_unwrap",
      [](const Array& high, const Array& low, double f_high) {
        unwrap::FrequencyPair pair;
        pair.f_high = f_high;
        pair.phase_high = {grid_from<double>(high, "high"), true};
        pair.phase_low = {grid_from<double>(low, "low"), true};
        const auto r = unwrap::temporal_unwrap(pair);
        return py::make_tuple(to_array(r.phase.values), to_array(r.fringe_order), r.quality_warning);
      },
      py::arg("high"), py::arg("low"), py::arg("f_high"),
      "Two-frequency unwrap against a unit-frequency map; returns (absolute phase, fringe order, warning).");

  m.def(
      "phase_error",
      [](const Array& pred, const Array& gt, const MaskArray& mask, int margin, bool wrapped) {
        const auto r = eval::phase_error({grid_from<double>(pred, "pred"), wrapped},
                                         {grid_from<double>(gt, "gt"), wrapped}, grid_from<std::uint8_t>(mask, "mask"),
                                         margin);
        py::dict d;
        d["mae"] = r.mae;
        d["rmse"] = r.rmse;
        d["max_abs"] = r.max_abs;
        d["pixels"] = r.masked_pixel_count;
        return d;
      },
      py::arg("pred"), py::arg("gt"), py::arg("mask"), py::arg("margin") = eval::kDefaultMargin,
      py::arg("wrapped") = true, "Masked phase-error statistics in radians.");

  m.def(
      "fit_sphere",
      [](const Array& points) {
        if (points.ndim() != 2 || points.shape(1) != 3) throw ValidationError("points must have shape (n, 3)");
        std::vector<eval::Point3> pts(static_cast<std::size_t>(points.shape(0)));
        for (std::size_t i = 0; i < pts.size(); ++i)
          pts[i] = {points.at(i, 0), points.at(i, 1), points.at(i, 2)};
        const auto f = eval::fit_sphere(pts);
        py::dict d;
        d["center"] = py::make_tuple(f.center.x, f.center.y, f.center.z);
        d["radius"] = f.radius;
        d["rms_residual"] = f.rms_residual;
        return d;
      },
      py::arg("points"), "Least-squares sphere fit of an (n, 3) point array.");

  m.def("read_image", [](const std::filesystem::path& p) { return to_array(io::read_image(p)); }, py::arg("path"),
        "Read a .pgm or .fpt image as float64.");
}
