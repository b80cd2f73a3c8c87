#pragma once

// Strang-split propagation of the two-level model under its potential matrix,
// compared against the closed-form state.

#include <functional>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "efgeo/grid.hpp"
#include "efgeo/model.hpp"
#include "efgeo/wavefunction.hpp"

namespace efgeo::propagator {

// per_step: both potential halves use h(t + dt/2).
// per_half_step: each half uses h at its own midpoint, t + dt/4 and t + 3dt/4.
enum class HUpdate { per_step, per_half_step };

struct PropagatorConfig {
  double dt = 1e-4;
  double t_end = 2.0;
  HUpdate h_update = HUpdate::per_step;
  std::size_t samples = 11;  // evenly spaced comparison times, both ends included
  double max_dt = 1e-3;      // accuracy guard

  void validate() const;
};

// exp(-i tau (h0 + h1 sigma1 + h3 sigma3)) applied pointwise.
void apply_potential(TwoComponentWavefunction& psi, const model::HamiltonianFields& h, double tau);
// exp(-i dt I k^2 / 2) applied in Fourier space.
void apply_kinetic(TwoComponentWavefunction& psi, double dt, double inertia);

// One Strang step with the given potential for both halves.
void step(TwoComponentWavefunction& psi, const model::HamiltonianFields& h, double dt, double inertia);
// One step of the model from t to t + dt.
void step(TwoComponentWavefunction& psi, double t, double dt, const model::ModelParams& p,
          HUpdate update = HUpdate::per_step);

struct Sample {
  double t = 0.0;
  double l2_error = 0.0;       // ||Psi_num - Psi_closed||
  double norm = 0.0;
  double density_error = 0.0;  // max | |chi|^2_num - |chi|^2_closed |
  double w_error = 0.0;        // max |w_num - w_closed| where |chi|^2 > 1e-6 max
  double t_geo = 0.0;
  double t_geo_error = 0.0;
  double xbar = 0.0, sigma = 0.0;  // from the first two moments of |chi|^2_num
  double xbar_error = 0.0, sigma_error = 0.0;
};

struct PropagationResult {
  TwoComponentWavefunction psi;
  std::vector<Sample> samples;
  std::size_t steps = 0;
  double norm_drift = 0.0;  // max |norm - norm(0)| over samples
};

using SnapshotHook = std::function<void(double t, const TwoComponentWavefunction& psi)>;

PropagationResult propagate(const model::ModelParams& p, const Grid1D& g, const PropagatorConfig& cfg,
                            const SnapshotHook& on_sample = {});

struct OrderStudy {
  std::vector<double> dt;
  std::vector<double> error;  // final L2 error per dt
  double slope = 0.0;         // least-squares slope of log error against log dt
};

OrderStudy convergence_order(const model::ModelParams& p, const Grid1D& g, const PropagatorConfig& cfg,
                             const std::vector<double>& dts);

nlohmann::json to_json(const PropagationResult& r);
nlohmann::json to_json(const OrderStudy& s);
// Columns t, l2_error, norm, density_error, w_error, T_geo, T_geo_error, xbar, sigma.
void write_csv(std::ostream& out, const PropagationResult& r);
// Columns x, re_psi1, im_psi1, re_psi2, im_psi2.
void write_snapshot_csv(std::ostream& out, const TwoComponentWavefunction& psi);

}  // namespace efgeo::propagator
