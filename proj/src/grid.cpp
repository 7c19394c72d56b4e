#include "fringe/grid.hpp"

#include <cmath>

namespace fringe {

double wrap_phase(double phi) {
  if (phi > -kPi && phi <= kPi) return phi;
  double r = phi - kTwoPi * std::floor((phi + kPi) / kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

Image wrap_phase(const Image& phi) {
  Image out(phi.width(), phi.height());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = wrap_phase(phi[i]);
  return out;
}

}  // namespace fringe
