#include "efgeo/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "efgeo/ef.hpp"
#include "efgeo/errors.hpp"
#include "fft.hpp"
#include "format.hpp"

namespace efgeo::propagator {

void PropagatorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("propagator dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("propagator t_end must be non-negative");
  if (samples < 1) throw ConfigError("propagator needs at least one sample");
  if (dt > max_dt)
    throw AccuracyGuard("dt = " + detail::g17(dt) + " exceeds the accuracy limit " + detail::g17(max_dt));
}

void apply_potential(TwoComponentWavefunction& psi, const model::HamiltonianFields& h, double tau) {
  for (std::size_t i = 0; i < psi.psi1.size(); ++i) {
    const double b1 = h.h1[i], b3 = h.h3[i];
    const double b = std::hypot(b1, b3);
    const double c = std::cos(tau * b);
    const double s = b > 0.0 ? std::sin(tau * b) / b : tau;
    const cplx u1 = psi.psi1[i], u2 = psi.psi2[i];
    const cplx phase = std::polar(1.0, -tau * h.h0[i]);
    const cplx mi(0.0, -s);
    psi.psi1[i] = phase * (c * u1 + mi * (b3 * u1 + b1 * u2));
    psi.psi2[i] = phase * (c * u2 + mi * (b1 * u1 - b3 * u2));
  }
}

void apply_kinetic(TwoComponentWavefunction& psi, double dt, double inertia) {
  // Double-precision transforms lose ~1e-16 of norm per step systematically;
  // long double keeps the drift over 1e4 steps well under 1e-12.
  using lcplx = std::complex<long double>;
  const Grid1D& g = psi.grid();
  const std::size_t n = g.n();
  std::vector<lcplx> x(n), buf(n);
  for (ComplexField* f : {&psi.psi1, &psi.psi2}) {
    for (std::size_t i = 0; i < n; ++i) x[i] = lcplx((*f)[i].real(), (*f)[i].imag());
    detail::fft_forward(x, buf);
    for (std::size_t j = 0; j < n; ++j) {
      const long double k = g.wavenumber(j);
      buf[j] *= std::polar(1.0L / static_cast<long double>(n), -0.5L * dt * inertia * k * k);
    }
    detail::fft_backward(buf, x);
    for (std::size_t i = 0; i < n; ++i)
      (*f)[i] = cplx(static_cast<double>(x[i].real()), static_cast<double>(x[i].imag()));
  }
}

namespace {

void check_finite(const TwoComponentWavefunction& psi, double t) {
  for (std::size_t i = 0; i < psi.psi1.size(); ++i)
    if (!std::isfinite(psi.psi1[i].real()) || !std::isfinite(psi.psi1[i].imag()) ||
        !std::isfinite(psi.psi2[i].real()) || !std::isfinite(psi.psi2[i].imag()))
      throw NumericalBlowup("non-finite wavefunction after the step ending at t = " + detail::g17(t));
}

}  // namespace

void step(TwoComponentWavefunction& psi, const model::HamiltonianFields& h, double dt, double inertia) {
  apply_potential(psi, h, 0.5 * dt);
  apply_kinetic(psi, dt, inertia);
  apply_potential(psi, h, 0.5 * dt);
}

void step(TwoComponentWavefunction& psi, double t, double dt, const model::ModelParams& p, HUpdate update) {
  const Grid1D& g = psi.grid();
  if (update == HUpdate::per_step) {
    step(psi, model::hamiltonian_entries(t + 0.5 * dt, g, p), dt, p.inertia);
  } else {
    apply_potential(psi, model::hamiltonian_entries(t + 0.25 * dt, g, p), 0.5 * dt);
    apply_kinetic(psi, dt, p.inertia);
    apply_potential(psi, model::hamiltonian_entries(t + 0.75 * dt, g, p), 0.5 * dt);
  }
  check_finite(psi, t + dt);
}

namespace {

Sample compare(double t, const TwoComponentWavefunction& psi, const model::ModelParams& p) {
  const Grid1D& g = psi.grid();
  const TwoComponentWavefunction ref = model::assemble_psi(t, g, p);
  Sample s;
  s.t = t;
  const ScalarField rho = psi.density(), rho_ref = ref.density();
  double l2 = 0.0, m0 = 0.0, m1 = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    l2 += std::norm(psi.psi1[i] - ref.psi1[i]) + std::norm(psi.psi2[i] - ref.psi2[i]);
    s.density_error = std::max(s.density_error, std::abs(rho[i] - rho_ref[i]));
    m0 += rho[i];
    m1 += rho[i] * g.x(i);
    peak = std::max(peak, rho_ref[i]);
  }
  s.l2_error = std::sqrt(l2 * g.dx());
  s.norm = m0 * g.dx();
  s.xbar = m1 / m0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double d = g.x(i) - s.xbar;
    m2 += rho[i] * d * d;
    if (rho_ref[i] > 1e-6 * peak) {
      const double w = (std::norm(psi.psi1[i]) - std::norm(psi.psi2[i])) / rho[i];
      const double w_ref = (std::norm(ref.psi1[i]) - std::norm(ref.psi2[i])) / rho_ref[i];
      s.w_error = std::max(s.w_error, std::abs(w - w_ref));
    }
  }
  // |chi|^2 = exp(-u^2) / (sqrt(pi) sigma) has variance sigma^2 / 2
  s.sigma = std::sqrt(2.0 * m2 / m0);
  const model::Trajectory tr = model::trajectory(t, p);
  s.xbar_error = std::abs(s.xbar - tr.xbar);
  s.sigma_error = std::abs(s.sigma - tr.sigma);

  ef::DecomposeOptions opts;
  opts.norm_tolerance = 1e-6;
  opts.require_decay = false;
  s.t_geo = ef::energies(ef::decompose(psi, opts), p.inertia).T_geo;
  s.t_geo_error = std::abs(s.t_geo - ef::energies(ef::decompose(ref, opts), p.inertia).T_geo);
  return s;
}

}  // namespace

PropagationResult propagate(const model::ModelParams& p, const Grid1D& g, const PropagatorConfig& cfg,
                            const SnapshotHook& on_sample) {
  cfg.validate();
  PropagationResult r{model::assemble_psi(0.0, g, p), {}, 0, 0.0};
  const auto total = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  if (std::abs(static_cast<double>(total) * cfg.dt - cfg.t_end) > 1e-9 * std::max(1.0, cfg.t_end))
    throw ConfigError("t_end must be a whole number of steps dt");
  // sample k sits at step round(k total / (samples - 1))
  std::vector<std::size_t> at;
  if (cfg.samples == 1 || total == 0) {
    at.push_back(total);
    if (total > 0) at.insert(at.begin(), 0);
  } else {
    for (std::size_t k = 0; k < cfg.samples; ++k) at.push_back((k * total + (cfg.samples - 1) / 2) / (cfg.samples - 1));
    at.erase(std::unique(at.begin(), at.end()), at.end());
  }
  const double norm0 = r.psi.norm();
  std::size_t next = 0;
  for (std::size_t n = 0;; ++n) {
    if (next < at.size() && at[next] == n) {
      const double t = static_cast<double>(n) * cfg.dt;
      r.samples.push_back(compare(t, r.psi, p));
      r.norm_drift = std::max(r.norm_drift, std::abs(r.samples.back().norm - norm0));
      if (on_sample) on_sample(t, r.psi);
      ++next;
    }
    if (n == total) break;
    step(r.psi, static_cast<double>(n) * cfg.dt, cfg.dt, p, cfg.h_update);
    ++r.steps;
  }
  return r;
}

OrderStudy convergence_order(const model::ModelParams& p, const Grid1D& g, const PropagatorConfig& cfg,
                             const std::vector<double>& dts) {
  if (dts.size() < 2) throw ConfigError("an order study needs at least two step sizes");
  OrderStudy s;
  for (double dt : dts) {
    PropagatorConfig c = cfg;
    c.dt = dt;
    c.samples = 1;
    s.dt.push_back(dt);
    s.error.push_back(propagate(p, g, c).samples.back().l2_error);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(s.dt[i]), y = std::log(s.error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  s.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return s;
}

nlohmann::json to_json(const PropagationResult& r) {
  nlohmann::json j;
  j["steps"] = r.steps;
  j["norm_drift"] = r.norm_drift;
  j["samples"] = nlohmann::json::array();
  for (const Sample& s : r.samples)
    j["samples"].push_back({{"t", s.t},
                            {"l2_error", s.l2_error},
                            {"norm", s.norm},
                            {"density_error", s.density_error},
                            {"w_error", s.w_error},
                            {"T_geo", s.t_geo},
                            {"T_geo_error", s.t_geo_error},
                            {"xbar", s.xbar},
                            {"sigma", s.sigma},
                            {"xbar_error", s.xbar_error},
                            {"sigma_error", s.sigma_error}});
  return j;
}

nlohmann::json to_json(const OrderStudy& s) {
  return {{"dt", s.dt}, {"error", s.error}, {"slope", s.slope}};
}

void write_csv(std::ostream& out, const PropagationResult& r) {
  using detail::g17;
  out << "t,l2_error,norm,density_error,w_error,T_geo,T_geo_error,xbar,sigma\n";
  for (const Sample& s : r.samples)
    out << g17(s.t) << ',' << g17(s.l2_error) << ',' << g17(s.norm) << ',' << g17(s.density_error) << ','
        << g17(s.w_error) << ',' << g17(s.t_geo) << ',' << g17(s.t_geo_error) << ',' << g17(s.xbar) << ','
        << g17(s.sigma) << '\n';
}

void write_snapshot_csv(std::ostream& out, const TwoComponentWavefunction& psi) {
  using detail::g17;
  out << "x,re_psi1,im_psi1,re_psi2,im_psi2\n";
  for (std::size_t i = 0; i < psi.psi1.size(); ++i)
    out << g17(psi.grid().x(i)) << ',' << g17(psi.psi1[i].real()) << ',' << g17(psi.psi1[i].imag()) << ','
        << g17(psi.psi2[i].real()) << ',' << g17(psi.psi2[i].imag()) << '\n';
}

}  // namespace efgeo::propagator
