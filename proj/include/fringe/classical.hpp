#pragma once

#include <complex>
#include <limits>
#include <memory>
#include <span>

#include "fringe/grid.hpp"

namespace fringe::classical {

using Complex = std::complex<double>;
using ComplexImage = Grid<Complex>;

// --- N-step phase shifting, delta_n = 2 pi n / N -------------------------

Image ps_background(std::span<const Image> stack);
PhasorField ps_phasor(std::span<const Image> stack);
PhaseField ps_phase(std::span<const Image> stack);

struct PhaseResult {
  PhaseField phase;
  Mask valid;  // 0 where M = D = 0
};

// Four-quadrant arctangent of (M, D) into (-pi, pi].
PhaseResult phase_from_phasor(const PhasorField& p);

// Fringe amplitude implied by a phasor: sqrt(M^2 + D^2) / c.
Image modulation(const PhasorField& p);

// --- Fourier transforms ------------------------------------------------

// Orthonormal 2-D DFT (scaled by 1/sqrt(W H) in both directions); any size.
ComplexImage dft2(const Image& img);
ComplexImage dft2(const ComplexImage& img);
ComplexImage idft2(const ComplexImage& spectrum);

// Signed frequency of DFT bin k for a transform of length n.
inline int bin_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

// --- Fourier-transform method ---------------------------------------------

struct FtParams {
  double carrier_frequency = 32.0;  // fringes per width (bins)
  double bandwidth = 20.0;          // passband half-width, bins
  double edge_width = 4.0;          // raised-cosine edge, bins
};

PhasorField ft_demod(const Image& fringe, const FtParams& params);

// --- Windowed Fourier filtering ---------------------------------------

struct WftParams {
  double window_sigma = 10.0;  // px
  double freq_lo_x = 0.0, freq_hi_x = 0.0;  // rad/px
  double freq_lo_y = 0.0, freq_hi_y = 0.0;
  double freq_step = 0.05;
  double threshold = 6.0;

  // Band of +-halfwidth rad/px around a horizontal carrier of f fringes per width.
  static WftParams around_carrier(double carrier_frequency, int width, double halfwidth = 1.0);
};

void validate(const WftParams& p);
PhasorField wft_demod(const Image& fringe, const WftParams& params);

}  // namespace fringe::classical
