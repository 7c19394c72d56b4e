#pragma once

#include "fringe/grid.hpp"

namespace fringe::unwrap {

// Wrapped phase maps of the same scene at two fringe frequencies. With
// f_low = 1 a single fringe spans the field, so a wrapped low map is taken
// to be absolute after shifting it into [0, 2 pi).
struct FrequencyPair {
  double f_high = 32.0;
  double f_low = 1.0;
  PhaseField phase_high;
  PhaseField phase_low;
};

struct UnwrapResult {
  PhaseField phase;           // unwrapped high-frequency phase
  Image fringe_order;         // integer valued
  double suspicious_fraction = 0.0;  // masked pixels with rounding residual > 0.49
  bool quality_warning = false;      // suspicious_fraction > 1 %
};

UnwrapResult temporal_unwrap(const FrequencyPair& pair, const Mask* mask = nullptr);

}  // namespace fringe::unwrap
