#include "fringe/unwrap.hpp"

#include <cmath>

namespace fringe::unwrap {

UnwrapResult temporal_unwrap(const FrequencyPair& pair, const Mask* mask) {
  require_same_shape(pair.phase_high.values, pair.phase_low.values, "temporal unwrap");
  if (mask) require_same_shape(pair.phase_high.values, *mask, "temporal unwrap mask");
  if (!(pair.f_low >= 1.0) || !(pair.f_high > pair.f_low))
    throw ValidationError("temporal unwrap needs f_high > f_low >= 1");
  if (!pair.phase_high.wrapped) throw ValidationError("high-frequency phase must be wrapped");
  if (pair.phase_low.wrapped && pair.f_low != 1.0)
    throw ValidationError("low-frequency phase must be absolute unless f_low = 1");

  const Image& high = pair.phase_high.values;
  const Image& low = pair.phase_low.values;
  const double ratio = pair.f_high / pair.f_low;
  UnwrapResult r{{Image(high.width(), high.height()), false}, Image(high.width(), high.height())};
  std::size_t counted = 0;
  std::size_t suspicious = 0;
  for (std::size_t i = 0; i < high.size(); ++i) {
    double absolute_low = low[i];
    if (pair.phase_low.wrapped && absolute_low < 0.0) absolute_low += kTwoPi;
    const double turns = (absolute_low * ratio - high[i]) / kTwoPi;
    const double order = std::round(turns);
    r.fringe_order[i] = order;
    r.phase.values[i] = high[i] + kTwoPi * order;
    if (!mask || (*mask)[i]) {
      ++counted;
      if (std::abs(turns - order) > 0.49) ++suspicious;
    }
  }
  r.suspicious_fraction = counted ? static_cast<double>(suspicious) / static_cast<double>(counted) : 0.0;
  r.quality_warning = r.suspicious_fraction > 0.01;
  return r;
}

}  // namespace fringe::unwrap
