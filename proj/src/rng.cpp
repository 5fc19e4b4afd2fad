#include "fluxreg/rng.hpp"

#include <cmath>

namespace fluxreg {

void Rng::unit_vector(std::span<double> out) {
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : out) {
      v = normal();
      norm2 += v * v;
    }
  } while (norm2 < 1e-24);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
}

void Rng::simplex_point(std::span<double> out) {
  double sum = 0.0;
  for (double& v : out) {
    v = -std::log1p(-uniform());
    sum += v;
  }
  for (double& v : out) v /= sum;
}

}  // namespace fluxreg
