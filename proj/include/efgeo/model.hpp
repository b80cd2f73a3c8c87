#pragma once

// Closed-form evaluators for the exactly solvable two-level model: a gaussian
// nuclear packet with damped oscillations of centre and width, a conditional
// spinor built from two logistic fronts at x = 1, and the reverse-engineered
// potential matrix [[h0 + h3, h1], [h1, h0 - h3]] that generates the motion.

#include <filesystem>
#include <string_view>
#include <vector>

#include "efgeo/grid.hpp"
#include "efgeo/wavefunction.hpp"

namespace efgeo::model {

struct ModelParams {
  double eta = 0.1;      // damping of the oscillations, in (0, 1/2)
  double mass = 10.0;    // nuclear mass M (a.u.)
  double gamma = 40.0;   // steepness of the logistic fronts
  double inertia = 0.1;  // inverse inertia; defaults to 1/M

  void validate() const;
};

// Keys: eta, mass, gamma, inertia. A missing inertia resolves to 1/mass.
ModelParams parse_model_params(std::string_view json_text);
ModelParams load_model_params(const std::filesystem::path& path);

// Packet centre and width with their first two time derivatives.
struct Trajectory {
  double xbar, xbar_t, xbar_tt;
  double sigma, sigma_t, sigma_tt;
};

Trajectory trajectory(double t, const ModelParams& p);
double mean_position(double t, const ModelParams& p);
double width(double t, const ModelParams& p);

// Normalized gaussian |chi|^2.
double nuclear_density(double x, double t, const ModelParams& p);
// Closed-form d/dt |chi|^2.
double nuclear_density_rate(double x, double t, const ModelParams& p);
// A = (xbar' + u sigma') / I, u = (x - xbar)/sigma; the CDF form of
// -I^{-1} |chi|^-2 * integral_{-inf}^x d_t |chi|^2.
double vector_potential(double x, double t, const ModelParams& p);

enum class ResolutionPolicy { advisory, strict };

struct BlochState {
  ScalarField w;        // cos(theta)
  ScalarField phi;
  ScalarField alpha;    // integral from x_min of 2A + w phi_x
  ScalarField chi_abs;  // |chi|
  bool front_resolved = true;
};

// Points per front width 1/(gamma (1 + eta t)) on this grid.
double front_points_per_width(double t, const Grid1D& g, const ModelParams& p);

BlochState bloch_fields(double t, const Grid1D& g, const ModelParams& p,
                        ResolutionPolicy policy = ResolutionPolicy::advisory);

enum class DerivativeRoute { analytic, autodiff };

// Pointwise values and derivatives of every field entering the potential.
// Spatial derivatives are exact (closed form); alpha and alpha_t carry the
// cumulative integral over the grid.
struct ModelDerivatives {
  double t = 0.0;
  std::vector<double> w, w_x, w_xx, w_xxx, w_t, w_xt;
  std::vector<double> theta, theta_x, theta_xx, theta_xxx, theta_t, theta_xt;
  std::vector<double> phi, phi_x, phi_xx, phi_xxx, phi_t, phi_xt;
  std::vector<double> alpha, alpha_x, alpha_xx, alpha_xxx, alpha_t, alpha_xt;
  std::vector<double> lnchi, lnchi_x, lnchi_xx, lnchi_t;
};

ModelDerivatives model_derivatives(double t, const Grid1D& g, const ModelParams& p,
                                   DerivativeRoute route = DerivativeRoute::analytic);

struct HamiltonianFields {
  ScalarField h0;
  ScalarField h1;
  ScalarField h3;
};

enum class TimeDerivative { analytic, central_difference };

struct HamiltonianOptions {
  TimeDerivative time = TimeDerivative::analytic;
  double dt = 1e-5;  // step of the 4th-order central difference route
  DerivativeRoute route = DerivativeRoute::analytic;
};

HamiltonianFields hamiltonian_entries(double t, const Grid1D& g, const ModelParams& p,
                                      const HamiltonianOptions& opts = {});

// Entries together with their exact spatial derivative.
struct HamiltonianGradient {
  HamiltonianFields h;
  HamiltonianFields dh;
};

HamiltonianGradient hamiltonian_with_gradient(double t, const Grid1D& g, const ModelParams& p,
                                              DerivativeRoute route = DerivativeRoute::autodiff);

// Psi = |chi| (e^{i(alpha-phi)/2} cos(theta/2), e^{i(alpha+phi)/2} sin(theta/2)).
TwoComponentWavefunction assemble_psi(double t, const Grid1D& g, const ModelParams& p);

// The printed closed forms of g, C and D in terms of w and phi.
struct ClosedFormGeometry {
  ScalarField g;
  ScalarField C;
  ScalarField D;
};

ClosedFormGeometry closed_form_geometry(double t, const Grid1D& g, const ModelParams& p);

// Residuals of the four equations the potential was built from, one field per
// line: d_t ln|chi|, theta_t, sin(theta) phi_t, alpha_t - cos(theta) phi_t.
std::vector<ScalarField> implicit_equation_residuals(const ModelDerivatives& d,
                                                     const HamiltonianFields& h,
                                                     const ModelParams& p, const Grid1D& g);

}  // namespace efgeo::model
