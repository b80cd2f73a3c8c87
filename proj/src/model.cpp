#include "efgeo/model.hpp"

#include <boost/math/differentiation/autodiff.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>

#include "dual.hpp"
#include "hamiltonian_formula.hpp"

namespace efgeo::model {

namespace ad = boost::math::differentiation;

void ModelParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(eta) || !(eta > 0.0 && eta < 0.5)) throw ConfigError("eta must lie in (0, 1/2)");
  if (!finite(mass) || !(mass > 0.0)) throw ConfigError("mass must be positive");
  if (!finite(gamma) || !(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!finite(inertia) || !(inertia > 0.0)) throw ConfigError("inertia must be positive");
}

ModelParams parse_model_params(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("model parameters are not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("model parameters must be a JSON object");
  ModelParams p;
  auto read = [&](const char* key, double& target) {
    if (!j.contains(key)) return false;
    if (!j[key].is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
    target = j[key].get<double>();
    return true;
  };
  read("eta", p.eta);
  read("mass", p.mass);
  read("gamma", p.gamma);
  if (!read("inertia", p.inertia)) p.inertia = 1.0 / p.mass;
  p.validate();
  return p;
}

ModelParams load_model_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model parameter file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model_params(buf.str());
}

namespace {

double width_prefactor(const ModelParams& p) { return 1.0 / (3.0 * std::sqrt(p.mass)); }

void require_time(double t, const ModelParams& p) {
  if (!std::isfinite(t) || !(1.0 + p.eta * t > 0.0))
    throw DomainError("model time outside the range where 1 + eta t > 0");
}

template <class T>
T xbar_of(const T& t, double eta) {
  using std::cos;
  return 1.0 - cos(t) / (1.0 + eta * t);
}

template <class T>
T sigma_of(const T& t, const ModelParams& p) {
  using std::cos;
  const T c = cos(t);
  return width_prefactor(p) * (1.0 + (1.0 + p.eta * t) * c * c);
}

}  // namespace

Trajectory trajectory(double t, const ModelParams& p) {
  require_time(t, p);
  const double q = 1.0 + p.eta * t;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double c0 = width_prefactor(p);
  Trajectory tr{};
  tr.xbar = 1.0 - c / q;
  tr.xbar_t = s / q + p.eta * c / (q * q);
  tr.xbar_tt = c / q - 2.0 * p.eta * s / (q * q) - 2.0 * p.eta * p.eta * c / (q * q * q);
  tr.sigma = c0 * (1.0 + q * c * c);
  tr.sigma_t = c0 * (p.eta * c * c - q * std::sin(2.0 * t));
  tr.sigma_tt = c0 * (-2.0 * p.eta * std::sin(2.0 * t) - 2.0 * q * std::cos(2.0 * t));
  return tr;
}

double mean_position(double t, const ModelParams& p) { return trajectory(t, p).xbar; }
double width(double t, const ModelParams& p) { return trajectory(t, p).sigma; }

double nuclear_density(double x, double t, const ModelParams& p) {
  const Trajectory tr = trajectory(t, p);
  const double u = (x - tr.xbar) / tr.sigma;
  return std::exp(-u * u) / (std::sqrt(std::numbers::pi) * tr.sigma);
}

double nuclear_density_rate(double x, double t, const ModelParams& p) {
  const Trajectory tr = trajectory(t, p);
  const double u = (x - tr.xbar) / tr.sigma;
  const double rho = std::exp(-u * u) / (std::sqrt(std::numbers::pi) * tr.sigma);
  return rho * (2.0 * u * (tr.xbar_t + u * tr.sigma_t) - tr.sigma_t) / tr.sigma;
}

double vector_potential(double x, double t, const ModelParams& p) {
  const Trajectory tr = trajectory(t, p);
  const double u = (x - tr.xbar) / tr.sigma;
  return (tr.xbar_t + u * tr.sigma_t) / p.inertia;
}

double front_points_per_width(double t, const Grid1D& g, const ModelParams& p) {
  return 1.0 / (p.gamma * (1.0 + p.eta * t) * g.dx());
}

namespace {

// Logistic S(y) = 1/(1 + e^y) of the front variable y = k (x - 1) - ln(1 + rate t),
// k = gamma (1 + eta t), with its x- and t-derivatives.
struct FrontJet {
  double s, s_x, s_xx, s_xxx, s_t, s_xt;
};

FrontJet front_jet(double x, double t, double rate, const ModelParams& p) {
  const double k = p.gamma * (1.0 + p.eta * t);
  const double k_t = p.gamma * p.eta;
  const double a = 1.0 + rate * t;
  const double y = k * (x - 1.0) - std::log(a);
  const double y_t = k_t * (x - 1.0) - rate / a;
  double S, Sc;  // S and 1 - S without cancellation
  if (y > 0.0) {
    const double e = std::exp(-y);
    S = e / (1.0 + e);
    Sc = 1.0 / (1.0 + e);
  } else {
    const double e = std::exp(y);
    S = 1.0 / (1.0 + e);
    Sc = e / (1.0 + e);
  }
  const double P = S * Sc;
  const double S1 = -P;
  const double S2 = P * (Sc - S);
  const double S3 = -P * (1.0 - 6.0 * P);
  return {S, S1 * k, S2 * k * k, S3 * k * k * k, S1 * y_t, S2 * k * y_t + S1 * k_t};
}

// Same logistic in boost autodiff form; branch keeps exp from overflowing.
template <class X, class Tv>
auto front_ad(const X& xv, const Tv& tv, double rate, const ModelParams& p) {
  using std::exp;
  using std::log;
  const auto y = p.gamma * (1.0 + p.eta * tv) * (xv - 1.0) - log(1.0 + rate * tv);
  using R = std::decay_t<decltype(y)>;
  if (static_cast<double>(y) > 0.0) {
    const R e = exp(-y);
    return R(e / (1.0 + e));
  }
  return R(1.0 / (1.0 + exp(y)));
}

void resize_all(ModelDerivatives& d, std::size_t n) {
  for (auto* v : {&d.w, &d.w_x, &d.w_xx, &d.w_xxx, &d.w_t, &d.w_xt, &d.theta, &d.theta_x,
                  &d.theta_xx, &d.theta_xxx, &d.theta_t, &d.theta_xt, &d.phi, &d.phi_x, &d.phi_xx,
                  &d.phi_xxx, &d.phi_t, &d.phi_xt, &d.alpha, &d.alpha_x, &d.alpha_xx,
                  &d.alpha_xxx, &d.alpha_t, &d.alpha_xt, &d.lnchi, &d.lnchi_x, &d.lnchi_xx,
                  &d.lnchi_t})
    v->assign(n, 0.0);
}

// Closed-form parts: x-derivatives of alpha beyond the cumulative integral,
// and the integrals of 2A and 2A_t from x_min.
struct PotentialPart {
  double a, a_x, a_t;  // A, A_x, A_t
  double int_a, int_a_t;
};

PotentialPart potential_part(double x, double x_min, const Trajectory& tr, double inertia) {
  const double u = (x - tr.xbar) / tr.sigma;
  const double c0 = tr.xbar_tt - tr.sigma_t * tr.xbar_t / tr.sigma;
  const double c1 = (tr.sigma_tt - tr.sigma_t * tr.sigma_t / tr.sigma) / tr.sigma;
  const double sq = ((x - tr.xbar) * (x - tr.xbar) - (x_min - tr.xbar) * (x_min - tr.xbar)) / 2.0;
  PotentialPart out{};
  out.a = (tr.xbar_t + u * tr.sigma_t) / inertia;
  out.a_x = tr.sigma_t / (tr.sigma * inertia);
  out.a_t = (c0 + c1 * (x - tr.xbar)) / inertia;
  out.int_a = (tr.xbar_t * (x - x_min) + tr.sigma_t / tr.sigma * sq) / inertia;
  out.int_a_t = (c0 * (x - x_min) + c1 * sq) / inertia;
  return out;
}

Trajectory trajectory_autodiff(double t, const ModelParams& p) {
  const auto tv = ad::make_fvar<double, 2>(t);
  const auto xb = xbar_of(tv, p.eta);
  const auto sg = sigma_of(tv, p);
  return {xb.derivative(0), xb.derivative(1), xb.derivative(2),
          sg.derivative(0), sg.derivative(1), sg.derivative(2)};
}

void fill_point_analytic(ModelDerivatives& d, std::size_t i, double x, double t,
                         const Trajectory& tr, const ModelParams& p) {
  const double eta = p.eta;
  const double amp = 1.0 - 2.0 * eta;
  const FrontJet f1 = front_jet(x, t, 1.0, p);
  const FrontJet f2 = front_jet(x, t, 3.0, p);

  const double w = eta + amp * f1.s;
  d.w[i] = w;
  d.w_x[i] = amp * f1.s_x;
  d.w_xx[i] = amp * f1.s_xx;
  d.w_xxx[i] = amp * f1.s_xxx;
  d.w_t[i] = amp * f1.s_t;
  d.w_xt[i] = amp * f1.s_xt;

  d.phi[i] = -eta - amp * f2.s;
  d.phi_x[i] = -amp * f2.s_x;
  d.phi_xx[i] = -amp * f2.s_xx;
  d.phi_xxx[i] = -amp * f2.s_xxx;
  d.phi_t[i] = -amp * f2.s_t;
  d.phi_xt[i] = -amp * f2.s_xt;

  const double wx = d.w_x[i], wxx = d.w_xx[i], wxxx = d.w_xxx[i];
  const double s = std::sqrt(1.0 - w * w);
  const double s3 = s * s * s;
  const double s5 = s3 * s * s;
  d.theta[i] = std::acos(w);
  d.theta_x[i] = -wx / s;
  d.theta_xx[i] = -wxx / s - w * wx * wx / s3;
  d.theta_xxx[i] = -wxxx / s - 3.0 * w * wx * wxx / s3 - wx * wx * wx / s3 -
                   3.0 * w * w * wx * wx * wx / s5;
  d.theta_t[i] = -d.w_t[i] / s;
  d.theta_xt[i] = -d.w_xt[i] / s - w * wx * d.w_t[i] / s3;

  const double u = (x - tr.xbar) / tr.sigma;
  d.lnchi[i] = -0.5 * u * u - 0.5 * std::log(std::sqrt(std::numbers::pi) * tr.sigma);
  d.lnchi_x[i] = -u / tr.sigma;
  d.lnchi_xx[i] = -1.0 / (tr.sigma * tr.sigma);
  d.lnchi_t[i] = (u * (tr.xbar_t + u * tr.sigma_t) - 0.5 * tr.sigma_t) / tr.sigma;
}

void fill_point_autodiff(ModelDerivatives& d, std::size_t i, double x, double t,
                         const Trajectory& tr, const ModelParams& p) {
  const auto vars = ad::make_ftuple<double, 3, 1>(x, t);
  const auto& X = std::get<0>(vars);
  const auto& T = std::get<1>(vars);
  const double amp = 1.0 - 2.0 * p.eta;
  const auto w = p.eta + amp * front_ad(X, T, 1.0, p);
  const auto phi = -p.eta - amp * front_ad(X, T, 3.0, p);
  const auto theta = acos(w);

  d.w[i] = w.derivative(0, 0);
  d.w_x[i] = w.derivative(1, 0);
  d.w_xx[i] = w.derivative(2, 0);
  d.w_xxx[i] = w.derivative(3, 0);
  d.w_t[i] = w.derivative(0, 1);
  d.w_xt[i] = w.derivative(1, 1);
  d.theta[i] = theta.derivative(0, 0);
  d.theta_x[i] = theta.derivative(1, 0);
  d.theta_xx[i] = theta.derivative(2, 0);
  d.theta_xxx[i] = theta.derivative(3, 0);
  d.theta_t[i] = theta.derivative(0, 1);
  d.theta_xt[i] = theta.derivative(1, 1);
  d.phi[i] = phi.derivative(0, 0);
  d.phi_x[i] = phi.derivative(1, 0);
  d.phi_xx[i] = phi.derivative(2, 0);
  d.phi_xxx[i] = phi.derivative(3, 0);
  d.phi_t[i] = phi.derivative(0, 1);
  d.phi_xt[i] = phi.derivative(1, 1);

  const auto lv = ad::make_ftuple<double, 2, 1>(x, t);
  const auto& LX = std::get<0>(lv);
  const auto& LT = std::get<1>(lv);
  const auto sg = sigma_of(LT, p);
  const auto u = (LX - xbar_of(LT, p.eta)) / sg;
  using std::log;
  const auto lnchi = -0.5 * u * u - 0.5 * log(std::sqrt(std::numbers::pi) * sg);
  d.lnchi[i] = lnchi.derivative(0, 0);
  d.lnchi_x[i] = lnchi.derivative(1, 0);
  d.lnchi_xx[i] = lnchi.derivative(2, 0);
  d.lnchi_t[i] = lnchi.derivative(0, 1);
  (void)tr;
}

// Cumulative integral from x_min of a field that vanishes at both edges.
ScalarField localized_cumulative(const Grid1D& g, std::vector<double> integrand) {
  if (edge_ratio(integrand, 3) > 1e-12)
    throw DomainError("front is not contained in the grid: integrand does not decay at the edges");
  return cumulative_integral(ScalarField(g, std::move(integrand)), g.x_min(),
                             CumulativeMethod::spectral);
}

}  // namespace

ModelDerivatives model_derivatives(double t, const Grid1D& g, const ModelParams& p,
                                   DerivativeRoute route) {
  p.validate();
  require_time(t, p);
  const std::size_t n = g.n();
  ModelDerivatives d;
  d.t = t;
  resize_all(d, n);
  const Trajectory tr = route == DerivativeRoute::analytic ? trajectory(t, p) : trajectory_autodiff(t, p);

  std::vector<double> local(n), local_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.x(i);
    if (route == DerivativeRoute::analytic)
      fill_point_analytic(d, i, x, t, tr, p);
    else
      fill_point_autodiff(d, i, x, t, tr, p);
    const PotentialPart pp = potential_part(x, g.x_min(), tr, p.inertia);
    const double w = d.w[i];
    d.alpha_x[i] = 2.0 * pp.a + w * d.phi_x[i];
    d.alpha_xx[i] = 2.0 * pp.a_x + d.w_x[i] * d.phi_x[i] + w * d.phi_xx[i];
    d.alpha_xxx[i] = d.w_xx[i] * d.phi_x[i] + 2.0 * d.w_x[i] * d.phi_xx[i] + w * d.phi_xxx[i];
    d.alpha_xt[i] = 2.0 * pp.a_t + d.w_t[i] * d.phi_x[i] + w * d.phi_xt[i];
    local[i] = w * d.phi_x[i];
    local_t[i] = d.w_t[i] * d.phi_x[i] + w * d.phi_xt[i];
    d.alpha[i] = 2.0 * pp.int_a;
    d.alpha_t[i] = 2.0 * pp.int_a_t;
  }
  const ScalarField cum = localized_cumulative(g, std::move(local));
  const ScalarField cum_t = localized_cumulative(g, std::move(local_t));
  for (std::size_t i = 0; i < n; ++i) {
    d.alpha[i] += cum[i];
    d.alpha_t[i] += cum_t[i];
  }
  return d;
}

BlochState bloch_fields(double t, const Grid1D& g, const ModelParams& p, ResolutionPolicy policy) {
  const bool resolved = front_points_per_width(t, g, p) >= 10.0;
  if (!resolved && policy == ResolutionPolicy::strict)
    throw ResolutionError("fewer than 10 grid points across the logistic front at t = " +
                          std::to_string(t));
  const ModelDerivatives d = model_derivatives(t, g, p);
  BlochState b{ScalarField(g, d.w), ScalarField(g, d.phi), ScalarField(g, d.alpha), ScalarField(g),
               resolved};
  for (std::size_t i = 0; i < g.n(); ++i) b.chi_abs[i] = std::exp(d.lnchi[i]);
  return b;
}

namespace {

using detail::Dual;
using detail::HamiltonianInputs;

HamiltonianInputs<double> inputs_at(const ModelDerivatives& d, std::size_t i) {
  return {d.theta[i], d.theta_t[i], d.theta_x[i], d.theta_xx[i], d.phi[i],     d.phi_t[i],
          d.phi_x[i], d.phi_xx[i],  d.alpha_t[i], d.alpha_x[i],  d.lnchi_x[i], d.lnchi_xx[i]};
}

HamiltonianInputs<Dual> dual_inputs_at(const ModelDerivatives& d, std::size_t i) {
  // lnchi is quadratic in x, so its third derivative vanishes
  return {{d.theta[i], d.theta_x[i]},    {d.theta_t[i], d.theta_xt[i]},
          {d.theta_x[i], d.theta_xx[i]}, {d.theta_xx[i], d.theta_xxx[i]},
          {d.phi[i], d.phi_x[i]},        {d.phi_t[i], d.phi_xt[i]},
          {d.phi_x[i], d.phi_xx[i]},     {d.phi_xx[i], d.phi_xxx[i]},
          {d.alpha_t[i], d.alpha_xt[i]}, {d.alpha_x[i], d.alpha_xx[i]},
          {d.lnchi_x[i], d.lnchi_xx[i]},
          {d.lnchi_xx[i], 0.0}};
}

void check_gauge(double sin_theta, double sin_phi, double x) {
  if (std::abs(sin_theta) < 1e-6 || std::abs(sin_phi) < 1e-6)
    throw SingularGauge("sin(theta) or sin(phi) vanishes near x = " + std::to_string(x));
}

double fd4(double fm2, double fm1, double fp1, double fp2, double h) {
  return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

}  // namespace

HamiltonianFields hamiltonian_entries(double t, const Grid1D& g, const ModelParams& p,
                                      const HamiltonianOptions& opts) {
  ModelDerivatives d = model_derivatives(t, g, p, opts.route);
  if (opts.time == TimeDerivative::central_difference) {
    if (!(opts.dt > 0.0)) throw ConfigError("time-difference step must be positive");
    const double h = opts.dt;
    const ModelDerivatives m2 = model_derivatives(t - 2.0 * h, g, p, opts.route);
    const ModelDerivatives m1 = model_derivatives(t - h, g, p, opts.route);
    const ModelDerivatives p1 = model_derivatives(t + h, g, p, opts.route);
    const ModelDerivatives p2 = model_derivatives(t + 2.0 * h, g, p, opts.route);
    for (std::size_t i = 0; i < g.n(); ++i) {
      d.theta_t[i] = fd4(m2.theta[i], m1.theta[i], p1.theta[i], p2.theta[i], h);
      d.phi_t[i] = fd4(m2.phi[i], m1.phi[i], p1.phi[i], p2.phi[i], h);
      d.alpha_t[i] = fd4(m2.alpha[i], m1.alpha[i], p1.alpha[i], p2.alpha[i], h);
    }
  }
  HamiltonianFields out{ScalarField(g), ScalarField(g), ScalarField(g)};
  for (std::size_t i = 0; i < g.n(); ++i) {
    check_gauge(std::sin(d.theta[i]), std::sin(d.phi[i]), g.x(i));
    const auto h = detail::hamiltonian_formula(inputs_at(d, i), p.inertia);
    out.h0[i] = h.h0;
    out.h1[i] = h.h1;
    out.h3[i] = h.h3;
  }
  return out;
}

HamiltonianGradient hamiltonian_with_gradient(double t, const Grid1D& g, const ModelParams& p,
                                              DerivativeRoute route) {
  const ModelDerivatives d = model_derivatives(t, g, p, route);
  HamiltonianGradient out{{ScalarField(g), ScalarField(g), ScalarField(g)},
                          {ScalarField(g), ScalarField(g), ScalarField(g)}};
  for (std::size_t i = 0; i < g.n(); ++i) {
    check_gauge(std::sin(d.theta[i]), std::sin(d.phi[i]), g.x(i));
    const auto h = detail::hamiltonian_formula(dual_inputs_at(d, i), p.inertia);
    out.h.h0[i] = h.h0.v;
    out.h.h1[i] = h.h1.v;
    out.h.h3[i] = h.h3.v;
    out.dh.h0[i] = h.h0.d;
    out.dh.h1[i] = h.h1.d;
    out.dh.h3[i] = h.h3.d;
  }
  return out;
}

TwoComponentWavefunction assemble_psi(double t, const Grid1D& g, const ModelParams& p) {
  const BlochState b = bloch_fields(t, g, p);
  TwoComponentWavefunction psi(g);
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double w = b.w[i];
    const double up = std::sqrt(0.5 * (1.0 + w));
    const double down = std::sqrt(0.5 * (1.0 - w));
    psi.psi1[i] = b.chi_abs[i] * up * std::polar(1.0, 0.5 * (b.alpha[i] - b.phi[i]));
    psi.psi2[i] = b.chi_abs[i] * down * std::polar(1.0, 0.5 * (b.alpha[i] + b.phi[i]));
  }
  return psi;
}

ClosedFormGeometry closed_form_geometry(double t, const Grid1D& g, const ModelParams& p) {
  const ModelDerivatives d = model_derivatives(t, g, p);
  ClosedFormGeometry out{ScalarField(g), ScalarField(g), ScalarField(g)};
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double w = d.w[i], wx = d.w_x[i], wxx = d.w_xx[i];
    const double px = d.phi_x[i], pxx = d.phi_xx[i];
    const double q = 1.0 - w * w;
    out.g[i] = 0.25 * wx * wx / q + 0.25 * q * px * px;
    out.C[i] = -0.25 / q *
               (-w * q * q * px * px * px - 3.0 * w * wx * wx * px + q * (wx * pxx - wxx * px));
    out.D[i] = -0.125 / (q * q) *
               (2.0 * w * wx * (q * q * px * px + wx * wx) -
                q * (4.0 * w * q * wx * px * px - 2.0 * q * q * px * pxx - 2.0 * wx * wxx));
  }
  return out;
}

std::vector<ScalarField> implicit_equation_residuals(const ModelDerivatives& d,
                                                     const HamiltonianFields& h,
                                                     const ModelParams& p, const Grid1D& g) {
  const double I = p.inertia;
  std::vector<ScalarField> r(4, ScalarField(g));
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double c = std::cos(d.theta[i]);
    const double s = std::sin(d.theta[i]);
    const double Lx = d.lnchi_x[i], Lxx = d.lnchi_xx[i];
    const double ax = d.alpha_x[i], axx = d.alpha_xx[i];
    const double px = d.phi_x[i], pxx = d.phi_xx[i];
    const double tx = d.theta_x[i], txx = d.theta_xx[i];
    const double h0 = h.h0[i], h1 = h.h1[i], h3 = h.h3[i];
    const double sp = std::sin(d.phi[i]), cp = std::cos(d.phi[i]);
    r[0][i] = d.lnchi_t[i] -
              (-0.5 * I * Lx * (ax - c * px) - 0.25 * I * (axx - c * pxx) - 0.25 * I * s * tx * px);
    r[1][i] = d.theta_t[i] -
              (-2.0 * h1 * sp - I * s * Lx * px - 0.5 * I * s * pxx - 0.5 * I * tx * (ax + c * px));
    r[2][i] = s * d.phi_t[i] -
              (2.0 * (-h1 * c * cp + h3 * s) + I * Lx * tx - 0.5 * I * s * ax * px + 0.5 * I * txx);
    r[3][i] = d.alpha_t[i] - c * d.phi_t[i] -
              (-2.0 * (h0 + h1 * s * cp + h3 * c) + I * Lxx + I * Lx * Lx -
               0.25 * I * (ax * ax + px * px - 2.0 * c * ax * px) - 0.25 * I * tx * tx);
  }
  return r;
}

}  // namespace efgeo::model
