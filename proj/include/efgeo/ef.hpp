#pragma once

// Exact factorization of a two-component wavefunction Psi = chi * Phi in the
// gauge where chi = |chi| is real and non-negative, together with the
// geometric fields of the conditional state Phi along x.

#include <cstdint>
#include <vector>

#include "efgeo/grid.hpp"
#include "efgeo/wavefunction.hpp"

namespace efgeo::ef {

struct DecomposeOptions {
  double floor = 1e-13;               // mask threshold relative to max |chi|^2
  double norm_tolerance = 1e-8;       // |norm - 1| allowed on input
  bool require_decay = true;          // Psi must vanish at both grid edges
  double decay_tolerance = 1e-12;     // relative to max |Psi|
};

struct EFDecomposition {
  TwoComponentWavefunction psi;
  double floor = 0.0;  // absolute density threshold actually used
  ScalarField chi_abs2;
  ScalarField chi_abs2_x;  // d|chi|^2/dx from 2 Re<Psi|Psi'>
  // Conditional state and its first three x-derivatives. Off the mask Phi is
  // continued by the nearest masked value and its derivatives are zero.
  ComplexField phi1, phi2;
  std::vector<ComplexField> dphi1, dphi2;
  std::vector<std::uint8_t> mask;
  bool extended = false;  // true when some points lie off the mask
  ScalarField A;     // Im<Phi|Phi'>
  ScalarField A_x;   // Im<Phi|Phi''>
  ScalarField A_xx;  // Im<Phi'|Phi''> + Im<Phi|Phi'''>
  ScalarField g;     // <(P-A)Phi|(P-A)Phi>
  ScalarField C;     // Re<(P-A)Phi|(P-A)(P-A)Phi>
  ScalarField D;     // Im<(P-A)Phi|(P-A)(P-A)Phi>
  ScalarField g_x;   // pointwise dg/dx
  ScalarField C_x;   // pointwise dC/dx

  const Grid1D& grid() const { return psi.grid(); }
  bool on_mask(std::size_t i) const { return mask[i] != 0; }
};

EFDecomposition decompose(const TwoComponentWavefunction& psi, const DecomposeOptions& opts = {});

// A real phase theta(x) with its first three derivatives.
struct PhaseJet {
  ScalarField theta, theta_x, theta_xx, theta_xxx;
};

// Phi -> e^{i theta} Phi with |chi| fixed; A, g, C, D and their derivatives are
// recomputed from the transformed Phi and its exact derivatives.
EFDecomposition regauged(const EFDecomposition& dec, const PhaseJet& jet);

ScalarField connection(const EFDecomposition& dec);
ScalarField metric(const EFDecomposition& dec);
ScalarField tensor_C(const EFDecomposition& dec);
ScalarField tensor_D(const EFDecomposition& dec);

// (P - A) Phi = -i Phi' - A Phi, per component.
std::vector<ComplexField> covariant_derivative(const EFDecomposition& dec);

struct Energies {
  double T_marg;
  double T_geo;
  double T_n;
};

// T_n from Psi directly; T_marg and T_geo from the factorized fields.
Energies energies(const EFDecomposition& dec, double inertia);

// J = I |chi|^2 A.
ScalarField current(const EFDecomposition& dec, double inertia);
// E_geo = I g / 2.
ScalarField geometric_energy_density(const EFDecomposition& dec, double inertia);

// Largest |v| over masked points.
double masked_max(const EFDecomposition& dec, const ScalarField& v);

}  // namespace efgeo::ef
