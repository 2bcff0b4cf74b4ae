#pragma once

// Laboratory parameter set: dimension, blocking exponents alpha > beta > 1,
// the wedge parameter tau (with rho = tau/8), the moment exponents (r, delta)
// of condition (C1) and the decay rates lambda / nu of (C2) / (C2').
// Derived constants are pure functions of these.

#include <cmath>
#include <stdexcept>

#include "arflab/lattice.hpp"

namespace arflab {

struct Parameters {
  int d = 2;
  Index alpha = 3;
  Index beta = 2;
  double tau = 0.8;
  double r = 1.0;
  double delta = 1.0;
  double lambda = 0.0;   // exponential covariance decay rate; 0 = unspecified
  double nu = 3.9;       // power covariance decay rate
  double sigma0sq = 1.0; // rho(0)

  double rho() const { return tau / 8.0; }

  // Derived constants.
  double r0() const { return std::max(1.0, 1.0 / (r + delta)); }
  double s_exponent() const { return 2.0 + r + delta; }
  double eps0() const { return 2.0 * r * r * beta / ((2.0 + r) * (4.0 + 3.0 * r)); }
  double alpha0() const { return 1.0 / (2.0 * (static_cast<double>(alpha) + 1.0)); }
  double delta0() const { return nu / d - 1.0; }
  double nu0() const { return r * (2.0 + r + delta) / (2.0 * delta); }

  void check() const {
    if (d < 1) throw std::invalid_argument("Parameters: d >= 1 required");
    if (!(alpha > beta && beta > 1))
      throw std::invalid_argument("Parameters: integers alpha > beta > 1 required");
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("Parameters: tau in (0,1) required");
    if (!(r > 0.0) || !(delta > 0.0))
      throw std::invalid_argument("Parameters: r, delta > 0 required");
    if (!(sigma0sq > 0.0))
      throw std::invalid_argument("Parameters: sigma0sq > 0 required");
  }
};

}  // namespace arflab
