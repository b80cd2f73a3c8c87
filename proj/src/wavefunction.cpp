#include "efgeo/wavefunction.hpp"

#include <cmath>

namespace efgeo {

TwoComponentWavefunction::TwoComponentWavefunction(ComplexField a, ComplexField b)
    : psi1(std::move(a)), psi2(std::move(b)) {
  if (!(psi1.grid() == psi2.grid())) throw InvalidField("wavefunction components on different grids");
}

ScalarField TwoComponentWavefunction::density() const {
  ScalarField rho(grid());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi1[i]) + std::norm(psi2[i]);
  return rho;
}

double TwoComponentWavefunction::norm() const { return integrate(density()); }

TwoComponentWavefunction TwoComponentWavefunction::regauged(const ScalarField& theta) const {
  if (!(theta.grid() == grid())) throw InvalidField("gauge phase lives on a different grid");
  TwoComponentWavefunction out(*this);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const cplx ph = std::polar(1.0, theta[i]);
    out.psi1[i] *= ph;
    out.psi2[i] *= ph;
  }
  return out;
}

}  // namespace efgeo
