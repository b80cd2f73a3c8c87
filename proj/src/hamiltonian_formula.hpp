#pragma once

#include <cmath>

#include "dual.hpp"

namespace efgeo::detail {

template <class T>
struct HamiltonianInputs {
  T theta, theta_t, theta_x, theta_xx;
  T phi, phi_t, phi_x, phi_xx;
  T alpha_t, alpha_x;
  T lnchi_x, lnchi_xx;
};

template <class T>
struct HamiltonianValues {
  T h0, h1, h3;
};

// Potential entries solving the four real equations of motion of the spinor
// angles and the nuclear amplitude for h0, h1, h3.
template <class T>
HamiltonianValues<T> hamiltonian_formula(const HamiltonianInputs<T>& in, double I) {
  using std::cos;
  using std::sin;
  const T st = sin(in.theta), ct = cos(in.theta);
  const T sp = sin(in.phi), cp = cos(in.phi);
  const T h1 = (-0.5 * in.theta_t - 0.5 * I * st * in.lnchi_x * in.phi_x - 0.25 * I * st * in.phi_xx -
                0.25 * I * in.theta_x * (in.alpha_x + ct * in.phi_x)) /
               sp;
  const T h3 = (h1 * ct * cp + 0.5 * st * in.phi_t - 0.5 * I * in.lnchi_x * in.theta_x +
                0.25 * I * st * in.alpha_x * in.phi_x - 0.25 * I * in.theta_xx) /
               st;
  const T h0 = -h1 * st * cp - h3 * ct - 0.5 * in.alpha_t + 0.5 * ct * in.phi_t +
               0.5 * I * in.lnchi_xx + 0.5 * I * in.lnchi_x * in.lnchi_x -
               0.125 * I *
                   (in.alpha_x * in.alpha_x + in.phi_x * in.phi_x - 2.0 * ct * in.alpha_x * in.phi_x) -
               0.125 * I * in.theta_x * in.theta_x;
  return {h0, h1, h3};
}

}  // namespace efgeo::detail
