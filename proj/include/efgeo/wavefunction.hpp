#pragma once

#include "efgeo/grid.hpp"

namespace efgeo {

// Two-component (two electronic states) wavefunction sampled on a Grid1D.
struct TwoComponentWavefunction {
  ComplexField psi1;
  ComplexField psi2;

  explicit TwoComponentWavefunction(const Grid1D& g) : psi1(g), psi2(g) {}
  TwoComponentWavefunction(ComplexField a, ComplexField b);

  const Grid1D& grid() const { return psi1.grid(); }

  // |psi1|^2 + |psi2|^2 pointwise.
  ScalarField density() const;
  // Integral of the density.
  double norm() const;
  // Multiplies both components by a pointwise phase exp(i theta(x)).
  TwoComponentWavefunction regauged(const ScalarField& theta) const;
};

}  // namespace efgeo
