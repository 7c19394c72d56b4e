#include "fringe/classical.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <vector>

namespace fringe::classical {
namespace {

void check_stack(std::span<const Image> stack) {
  if (stack.size() < 3)
    throw ValidationError("phase shifting needs at least 3 frames, got " + std::to_string(stack.size()));
  for (const auto& f : stack) require_same_shape(f, stack[0], "phase-shifting stack");
}

// FFTW planning is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place unnormalised complex 2-D transform pair over an FFTW buffer.
class Fft2 {
 public:
  Fft2(int width, int height) : width_(width), height_(height), n_(static_cast<std::size_t>(width) * height) {
    buf_ = fftw_alloc_complex(n_);
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_2d(height, width, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_2d(height, width, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft2() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
  }
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  Complex* data() { return reinterpret_cast<Complex*>(buf_); }
  std::size_t size() const { return n_; }
  int width() const { return width_; }
  int height() const { return height_; }
  void forward() { fftw_execute(fwd_); }
  void inverse() { fftw_execute(inv_); }

 private:
  int width_, height_;
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

ComplexImage transform(const ComplexImage& in, bool forward) {
  ComplexImage out(in.width(), in.height());
  if (in.empty()) return out;
  Fft2 fft(in.width(), in.height());
  std::copy(in.data(), in.data() + in.size(), fft.data());
  forward ? fft.forward() : fft.inverse();
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fft.data()[i] * scale;
  return out;
}

// 1 inside |d| <= half - edge, raised-cosine roll-off to 0 at |d| = half.
double hann_taper(double d, double half, double edge) {
  d = std::abs(d);
  if (d >= half) return 0.0;
  const double inner = half - edge;
  if (d <= inner || edge <= 0.0) return 1.0;
  return 0.5 * (1.0 + std::cos(kPi * (d - inner) / edge));
}

std::vector<double> frequency_grid(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int k = 0; k < n; ++k) out.push_back(lo + k * step);
  return out;
}

}  // namespace

Image ps_background(std::span<const Image> stack) {
  check_stack(stack);
  Image out(stack[0].width(), stack[0].height());
  for (const auto& f : stack)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[i];
  const double inv = 1.0 / static_cast<double>(stack.size());
  for (auto& v : out.values()) v *= inv;
  return out;
}

PhasorField ps_phasor(std::span<const Image> stack) {
  check_stack(stack);
  const int n_steps = static_cast<int>(stack.size());
  PhasorField p{Image(stack[0].width(), stack[0].height()), Image(stack[0].width(), stack[0].height()),
                0.5 * n_steps};
  for (int n = 0; n < n_steps; ++n) {
    const double delta = kTwoPi * n / n_steps;
    const double s = std::sin(delta);
    const double c = std::cos(delta);
    const Image& f = stack[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < f.size(); ++i) {
      p.numerator[i] += f[i] * s;
      p.denominator[i] += f[i] * c;
    }
  }
  return p;
}

PhaseField ps_phase(std::span<const Image> stack) { return phase_from_phasor(ps_phasor(stack)).phase; }

PhaseResult phase_from_phasor(const PhasorField& p) {
  require_same_shape(p.numerator, p.denominator, "phasor");
  PhaseResult r{{Image(p.numerator.width(), p.numerator.height()), true},
                Mask(p.numerator.width(), p.numerator.height(), 1)};
  for (std::size_t i = 0; i < p.numerator.size(); ++i) {
    const double m = p.numerator[i];
    const double d = p.denominator[i];
    if (m == 0.0 && d == 0.0) {
      r.phase.values[i] = 0.0;
      r.valid[i] = 0;
      continue;
    }
    double phi = std::atan2(m, d);
    if (phi <= -kPi) phi = kPi;  // atan2(-0, -x) = -pi
    r.phase.values[i] = phi;
  }
  return r;
}

Image modulation(const PhasorField& p) {
  require_same_shape(p.numerator, p.denominator, "phasor");
  if (!(p.scale_c > 0.0)) throw ValidationError("phasor scale constant must be positive");
  Image out(p.numerator.width(), p.numerator.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(p.numerator[i], p.denominator[i]) / p.scale_c;
  return out;
}

ComplexImage dft2(const Image& img) {
  ComplexImage c(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) c[i] = img[i];
  return transform(c, true);
}

ComplexImage dft2(const ComplexImage& img) { return transform(img, true); }

ComplexImage idft2(const ComplexImage& spectrum) { return transform(spectrum, false); }

PhasorField ft_demod(const Image& fringe, const FtParams& params) {
  if (!(params.bandwidth > 0.0)) throw ConfigError("FT bandwidth must be positive");
  if (params.carrier_frequency < params.bandwidth)
    throw ConfigError("FT carrier lobe overlaps DC: carrier " + std::to_string(params.carrier_frequency) +
                      " < bandwidth " + std::to_string(params.bandwidth));
  ComplexImage spec = dft2(fringe);
  const int w = fringe.width();
  const int h = fringe.height();
  for (int ky = 0; ky < h; ++ky) {
    const double fy = bin_frequency(ky, h);
    for (int kx = 0; kx < w; ++kx) {
      const double fx = bin_frequency(kx, w);
      double gain = 0.0;
      if (fx > 0.0) {
        gain = hann_taper(fx - params.carrier_frequency, params.bandwidth, params.edge_width) *
               hann_taper(fy, params.bandwidth, params.edge_width);
      }
      spec(kx, ky) *= gain;
    }
  }
  const ComplexImage z = idft2(spec);
  PhasorField p{Image(w, h), Image(w, h), 0.5};
  for (std::size_t i = 0; i < z.size(); ++i) {
    p.numerator[i] = z[i].imag();
    p.denominator[i] = z[i].real();
  }
  return p;
}

WftParams WftParams::around_carrier(double carrier_frequency, int width, double halfwidth) {
  WftParams p;
  const double wx = kTwoPi * carrier_frequency / width;
  p.freq_lo_x = wx - halfwidth;
  p.freq_hi_x = wx + halfwidth;
  p.freq_lo_y = -halfwidth;
  p.freq_hi_y = halfwidth;
  return p;
}

void validate(const WftParams& p) {
  if (!(p.window_sigma > 0.0)) throw ConfigError("WFT window sigma must be positive");
  if (!(p.freq_step > 0.0)) throw ConfigError("WFT frequency step must be positive");
  if (!(p.threshold >= 0.0)) throw ConfigError("WFT threshold must be non-negative");
  if (!(p.freq_lo_x < p.freq_hi_x) || !(p.freq_lo_y < p.freq_hi_y))
    throw ConfigError("WFT frequency band is empty (lo must be below hi on both axes)");
}

namespace {

// Smallest n >= lo whose only prime factors are 2, 3 and 5.
int fft_friendly(int lo) {
  for (int n = std::max(lo, 1);; ++n) {
    int m = n;
    for (int p : {2, 3, 5})
      while (m % p == 0) m /= p;
    if (m == 1) return n;
  }
}

// Length-n DFT of g(t) exp(j xi t) for t in [-r, r], laid out circularly.
std::vector<Complex> modulated_window_dft(const std::vector<double>& g, int r, double xi, int n) {
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Complex sum{};
    for (int t = -r; t <= r; ++t)
      sum += g[static_cast<std::size_t>(t + r)] * std::polar(1.0, xi * t - kTwoPi * k * t / n);
    out[static_cast<std::size_t>(k)] = sum;
  }
  return out;
}

}  // namespace

PhasorField wft_demod(const Image& fringe, const WftParams& params) {
  validate(params);
  const auto xi_x = frequency_grid(params.freq_lo_x, params.freq_hi_x, params.freq_step);
  const auto xi_y = frequency_grid(params.freq_lo_y, params.freq_hi_y, params.freq_step);
  if (xi_x.empty() || xi_y.empty()) throw ConfigError("WFT frequency grid is empty");

  const int w = fringe.width();
  const int h = fringe.height();
  const int radius = static_cast<int>(std::ceil(3.0 * params.window_sigma));
  const int pw = fft_friendly(w + 2 * radius);
  const int ph = fft_friendly(h + 2 * radius);

  double mean = 0.0;
  for (double v : fringe.values()) mean += v;
  mean /= static_cast<double>(std::max<std::size_t>(1, fringe.size()));

  Fft2 fft(pw, ph);
  const std::size_t n = fft.size();
  std::vector<Complex> image_spec(n, Complex{});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) image_spec[static_cast<std::size_t>(y + radius) * pw + x + radius] = fringe(x, y) - mean;
  std::copy(image_spec.begin(), image_spec.end(), fft.data());
  fft.forward();
  std::copy(fft.data(), fft.data() + n, image_spec.begin());

  // Separable window g(tx) g(ty), unit energy in 2-D, truncated at 3 sigma.
  const double sigma = params.window_sigma;
  std::vector<double> g1;
  double energy = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    g1.push_back(std::exp(-(t * t) / (2.0 * sigma * sigma)));
    energy += g1.back() * g1.back();
  }
  for (auto& g : g1) g /= std::sqrt(energy);

  // The modulated kernel is separable too, so its 2-D spectrum is an outer product.
  std::vector<std::vector<Complex>> spec_x;
  std::vector<std::vector<Complex>> spec_y;
  for (double fx : xi_x) spec_x.push_back(modulated_window_dft(g1, radius, fx, pw));
  for (double fy : xi_y) spec_y.push_back(modulated_window_dft(g1, radius, fy, ph));

  const double inv_n = 1.0 / static_cast<double>(n);
  const double thr2 = params.threshold * params.threshold;
  const double gain = params.freq_step * params.freq_step / (4.0 * kPi * kPi);
  std::vector<Complex> acc(n, Complex{});
  Complex* buf = fft.data();
  for (const auto& ky : spec_y) {
    for (const auto& kx : spec_x) {
      // Windowed Fourier coefficients Sf = f * h, thresholded.
      for (int y = 0; y < ph; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * pw;
        for (int x = 0; x < pw; ++x) buf[row + x] = image_spec[row + x] * (ky[y] * kx[x]) * inv_n;
      }
      fft.inverse();
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::norm(buf[i]) < thr2) {
          buf[i] = 0.0;
        } else {
          any = true;
        }
      }
      if (!any) continue;
      fft.forward();
      for (int y = 0; y < ph; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * pw;
        for (int x = 0; x < pw; ++x) acc[row + x] += buf[row + x] * (ky[y] * kx[x]);
      }
    }
  }

  std::copy(acc.begin(), acc.end(), buf);
  fft.inverse();
  PhasorField p{Image(w, h), Image(w, h), 0.5};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Complex z = buf[static_cast<std::size_t>(y + radius) * pw + x + radius] * (inv_n * gain);
      p.numerator(x, y) = z.imag();
      p.denominator(x, y) = z.real();
    }
  return p;
}

}  // namespace fringe::classical
