#include "efgeo/identity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include "format.hpp"

namespace efgeo::identity {

using cplx = std::complex<double>;

const char* name(Reading r) { return r == Reading::A ? "A" : "B"; }

bool Mutation::active() const {
  return drop_T1_weight || std::any_of(sign.begin(), sign.end(), [](double s) { return s != 1.0; });
}

namespace {

// Decomposed state at t with the x-derivative of the potential matrix.
struct State {
  ef::EFDecomposition dec;
  model::HamiltonianFields dh;
};

State state_at(const model::ModelParams& p, const Grid1D& g, double t, const ef::DecomposeOptions& opts) {
  auto dec = ef::decompose(model::assemble_psi(t, g, p), opts);
  auto grad = model::hamiltonian_with_gradient(t, g, p, model::DerivativeRoute::analytic);
  return {std::move(dec), std::move(grad.dh)};
}

// <u|H'|v> at point i, H' = [[h0' + h3', h1'], [h1', h0' - h3']].
cplx dH_element(const State& s, std::size_t i, cplx u1, cplx u2, cplx v1, cplx v2) {
  const double a = s.dh.h0[i] + s.dh.h3[i], b = s.dh.h1[i], c = s.dh.h0[i] - s.dh.h3[i];
  return std::conj(u1) * (a * v1 + b * v2) + std::conj(u2) * (b * v1 + c * v2);
}

cplx phi_dH(const State& s, std::size_t i, cplx v1, cplx v2) {
  return dH_element(s, i, s.dec.phi1[i], s.dec.phi2[i], v1, v2);
}

}  // namespace

namespace {

RhsTerms rhs_from_state(const State& s, double I, Reading reading, const Mutation& mutation) {
  const ef::EFDecomposition& d = s.dec;
  const Grid1D& g = d.grid();
  RhsTerms r;
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (!d.on_mask(i)) continue;
    const double rho = d.chi_abs2[i];
    const double w = reading == Reading::B ? rho : 1.0;
    const double force = phi_dH(s, i, d.dphi1[0][i], d.dphi2[0][i]).imag();
    const double diag = phi_dH(s, i, d.phi1[i], d.phi2[i]).real();
    r.T1 -= I * force * (mutation.drop_T1_weight ? 1.0 : rho);
    r.T2 += I * d.A[i] * diag * w;
    r.T3 -= 0.5 * I * I * (d.C_x[i] * rho + d.C[i] * d.chi_abs2_x[i]);
    r.T4 -= I * I * d.g[i] * d.A_x[i] * w;
  }
  const double h = g.dx();
  return {mutation.sign[0] * r.T1 * h, mutation.sign[1] * r.T2 * h, mutation.sign[2] * r.T3 * h,
          mutation.sign[3] * r.T4 * h};
}

}  // namespace

RhsTerms rhs_terms(const model::ModelParams& p, const Grid1D& g, double t, Reading reading,
                   const Mutation& mutation, const ef::DecomposeOptions& opts) {
  return rhs_from_state(state_at(p, g, t, opts), p.inertia, reading, mutation);
}

GeneralTerms general_terms(const model::ModelParams& p, const Grid1D& g, double t,
                           const ef::DecomposeOptions& opts) {
  const State s = state_at(p, g, t, opts);
  const ef::EFDecomposition& d = s.dec;
  const double I = p.inertia;
  const auto V = ef::covariant_derivative(d);
  const ScalarField J = ef::current(d, I);
  GeneralTerms r;
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (!d.on_mask(i)) continue;
    const double rho = d.chi_abs2[i], rho_x = d.chi_abs2_x[i];
    // (J/|chi|^2)' from J' = I (|chi|^2' A + |chi|^2 A')
    const double J_x = I * (rho_x * d.A[i] + rho * d.A_x[i]);
    const double velocity_x = (J_x * rho - J[i] * rho_x) / (rho * rho);
    r.force -= rho * I * phi_dH(s, i, V[0][i], V[1][i]).real();
    r.flow -= rho * I * d.g[i] * velocity_x;
  }
  // In one dimension B = A' - A' = 0, so its derivative term is zero.
  r.curvature = 0.0;
  r.force *= g.dx();
  r.flow *= g.dx();
  return r;
}

std::vector<double> t_geo_series(const model::ModelParams& p, const Grid1D& g, const std::vector<double>& times,
                                 const ef::DecomposeOptions& opts) {
  if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("times must be sorted");
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(ef::energies(ef::decompose(model::assemble_psi(t, g, p), opts), p.inertia).T_geo);
  return out;
}

std::vector<double> lhs_rate(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  if (n < 5) throw ConfigError("lhs_rate needs at least 5 samples, got " + std::to_string(n));
  if (!(dt > 0.0)) throw ConfigError("lhs_rate needs a positive step");
  std::vector<double> out(n);
  const double s = 12.0 * dt;
  out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / s;
  out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / s;
  for (std::size_t i = 2; i + 2 < n; ++i) out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / s;
  out[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / s;
  out[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / s;
  return out;
}

double lhs_at(const model::ModelParams& p, const Grid1D& g, double t, double dt, double t_min,
              const ef::DecomposeOptions& opts) {
  const bool forward = t - 2.0 * dt < t_min;
  const double first = forward ? t : t - 2.0 * dt;
  std::vector<double> times(5);
  for (std::size_t j = 0; j < 5; ++j) times[j] = first + static_cast<double>(j) * dt;
  return lhs_rate(t_geo_series(p, g, times, opts), dt)[forward ? 0 : 2];
}

PointwiseReport pointwise_dEgeo_check(const model::ModelParams& p, const Grid1D& g, double t, double dt,
                                      const ef::DecomposeOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("pointwise check needs a positive step");
  const double I = p.inertia;
  std::vector<ef::EFDecomposition> around;
  for (int j = -2; j <= 2; ++j)
    if (j != 0) around.push_back(ef::decompose(model::assemble_psi(t + j * dt, g, p), opts));
  const State s = state_at(p, g, t, opts);
  const ef::EFDecomposition& d = s.dec;
  const auto V = ef::covariant_derivative(d);

  PointwiseReport rep;
  rep.t = t;
  rep.dt = dt;
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (!d.on_mask(i) || std::any_of(around.begin(), around.end(), [&](const auto& a) { return !a.on_mask(i); }))
      continue;
    const double rate =
        0.5 * I * (around[0].g[i] - 8.0 * around[1].g[i] + 8.0 * around[2].g[i] - around[3].g[i]) / (12.0 * dt);
    const double rho = d.chi_abs2[i];
    const double velocity = I * d.A[i];  // J / |chi|^2
    const double rhs = -I * phi_dH(s, i, V[0][i], V[1][i]).real() - 0.5 * I * I * d.C_x[i] -
                       0.5 * I * I * d.C[i] * d.chi_abs2_x[i] / rho - velocity * 0.5 * I * d.g_x[i] -
                       I * I * d.g[i] * d.A_x[i];
    rep.x.push_back(g.x(i));
    rep.rate.push_back(rate);
    rep.rhs.push_back(rhs);
    rep.max_residual = std::max(rep.max_residual, std::abs(rate - rhs));
    rep.max_rate = std::max(rep.max_rate, std::abs(rate));
  }
  return rep;
}

IdentityReport evaluate(const model::ModelParams& p, const Grid1D& g, const VerifyOptions& opts) {
  if (opts.samples < 2) throw ConfigError("identity verification needs at least two time samples");
  if (!(opts.t_end > opts.t_start)) throw ConfigError("identity verification needs t_end > t_start");
  if (!(opts.dt > 0.0)) throw ConfigError("identity verification needs a positive dt");
  if (!(opts.tolerance > 0.0)) throw ConfigError("identity verification needs a positive tolerance");
  IdentityReport rep;
  rep.tolerance = opts.tolerance;
  rep.mutated = opts.mutation.active();
  const double step = (opts.t_end - opts.t_start) / static_cast<double>(opts.samples - 1);
  for (std::size_t k = 0; k < opts.samples; ++k) {
    const double t = opts.t_start + static_cast<double>(k) * step;
    rep.times.push_back(t);
    const State s = state_at(p, g, t, opts.decompose);
    rep.t_geo.push_back(ef::energies(s.dec, p.inertia).T_geo);
    rep.lhs.push_back(lhs_at(p, g, t, opts.dt, opts.t_start, opts.decompose));
    for (Reading r : kReadings) {
      const auto idx = static_cast<std::size_t>(r);
      const RhsTerms terms = rhs_from_state(s, p.inertia, r, opts.mutation);
      rep.terms[idx].push_back(terms);
      rep.rhs[idx].push_back(terms.total());
      rep.residual[idx].push_back(std::abs(rep.lhs.back() - terms.total()));
    }
  }
  double scale = 0.0;
  for (double v : rep.lhs) scale = std::max(scale, std::abs(v));
  for (Reading r : kReadings) {
    const auto idx = static_cast<std::size_t>(r);
    const double worst = *std::max_element(rep.residual[idx].begin(), rep.residual[idx].end());
    rep.relative[idx] = scale > 0.0 ? worst / scale : worst;
  }
  rep.winner = rep.relative[0] < rep.relative[1] ? Reading::A : Reading::B;
  rep.pass = rep.relative_of(rep.winner) <= opts.tolerance;
  return rep;
}

IdentityReport verify(const model::ModelParams& p, const Grid1D& g, const VerifyOptions& opts) {
  IdentityReport rep = evaluate(p, g, opts);
  if (!rep.pass)
    throw VerificationFailure("identity residual " + detail::g17(rep.relative_of(rep.winner)) +
                                  " (reading " + name(rep.winner) + ") exceeds tolerance " +
                                  detail::g17(opts.tolerance),
                              std::move(rep));
  return rep;
}

Adjudication adjudicate(const model::ModelParams& p, const Grid1D& g, const VerifyOptions& opts,
                        double min_reduction) {
  Adjudication a;
  a.base = evaluate(p, g, opts);
  VerifyOptions fine = opts;
  fine.dt = opts.dt / 2.0;
  a.refined = evaluate(p, Grid1D(g.x_min(), g.x_max(), 2 * g.n()), fine);
  for (std::size_t k = 0; k < 2; ++k)
    a.reduction[k] = a.refined.relative[k] > 0.0 ? a.base.relative[k] / a.refined.relative[k] : INFINITY;
  a.winner = a.base.winner;
  const auto w = static_cast<std::size_t>(a.winner);
  a.converges = a.base.pass && a.reduction[w] >= min_reduction;
  return a;
}

nlohmann::json to_json(const IdentityReport& r) {
  nlohmann::json j;
  j["times"] = r.times;
  j["t_geo"] = r.t_geo;
  j["lhs"] = r.lhs;
  for (Reading rd : kReadings) {
    const auto idx = static_cast<std::size_t>(rd);
    nlohmann::json e;
    std::vector<double> t1, t2, t3, t4;
    for (const RhsTerms& t : r.terms[idx]) {
      t1.push_back(t.T1);
      t2.push_back(t.T2);
      t3.push_back(t.T3);
      t4.push_back(t.T4);
    }
    e["T1"] = t1;
    e["T2"] = t2;
    e["T3"] = t3;
    e["T4"] = t4;
    e["rhs"] = r.rhs[idx];
    e["residual"] = r.residual[idx];
    e["relative_residual"] = r.relative[idx];
    j["readings"][name(rd)] = std::move(e);
  }
  j["winner"] = name(r.winner);
  j["tolerance"] = r.tolerance;
  j["mutated"] = r.mutated;
  j["pass"] = r.pass;
  return j;
}

nlohmann::json to_json(const Adjudication& a) {
  return {{"base", to_json(a.base)},
          {"refined", to_json(a.refined)},
          {"reduction", {{"A", a.reduction[0]}, {"B", a.reduction[1]}}},
          {"winner", name(a.winner)},
          {"converges", a.converges}};
}

nlohmann::json to_json(const PointwiseReport& r) {
  return {{"t", r.t},
          {"dt", r.dt},
          {"max_residual", r.max_residual},
          {"max_rate", r.max_rate},
          {"relative", r.relative()},
          {"points", r.x.size()}};
}

void write_csv(std::ostream& out, const IdentityReport& r) {
  out << "t,T_geo,lhs";
  for (Reading rd : kReadings)
    for (const char* c : {"T1", "T2", "T3", "T4", "rhs", "residual"}) out << ',' << c << '_' << name(rd);
  out << '\n';
  using detail::g17;
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out << g17(r.times[k]) << ',' << g17(r.t_geo[k]) << ',' << g17(r.lhs[k]);
    for (std::size_t idx = 0; idx < 2; ++idx) {
      const RhsTerms& t = r.terms[idx][k];
      for (double v : {t.T1, t.T2, t.T3, t.T4, r.rhs[idx][k], r.residual[idx][k]}) out << ',' << g17(v);
    }
    out << '\n';
  }
}

}  // namespace efgeo::identity
