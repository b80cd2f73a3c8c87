#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "efgeo/model.hpp"

using namespace efgeo;
using namespace efgeo::model;

namespace {

const ModelParams P{};
const Grid1D G(-4.0, 6.0, 4096);

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double fd_t(auto&& f, double t, double h = 1e-4) {
  return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("parameters") {
  const ModelParams a = parse_model_params(R"({"eta": 0.2, "mass": 4})");
  CHECK(a.eta == 0.2);
  CHECK(a.inertia == 0.25);
  CHECK(a.gamma == 40.0);
  CHECK(parse_model_params("{}").inertia == doctest::Approx(0.1));
  CHECK(parse_model_params(R"({"inertia": 0.3})").inertia == 0.3);
  CHECK_THROWS_AS(parse_model_params(R"({"eta": 0.5})"), ConfigError);
  CHECK_THROWS_AS(parse_model_params(R"({"mass": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_model_params(R"({"mass": "ten"})"), ConfigError);
  CHECK_THROWS_AS(parse_model_params("{"), ConfigError);
  CHECK_THROWS_AS(load_model_params("/nonexistent/model.json"), ConfigError);
}

TEST_CASE("trajectory values") {
  const double pi = std::numbers::pi;
  CHECK(mean_position(0.0, P) == 0.0);
  CHECK(mean_position(pi / 2, P) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mean_position(2 * pi, P) == doctest::Approx(0.385870).epsilon(1e-6));
  CHECK(width(pi / 2, P) == doctest::Approx(0.105409).epsilon(1e-6));
  CHECK(width(0.0, P) == doctest::Approx(0.210819).epsilon(1e-6));
  CHECK(width(pi, P) == doctest::Approx(0.243935).epsilon(1e-6));
}

TEST_CASE("trajectory derivatives match finite differences") {
  for (double t : {0.0, 0.7, 3.1, 9.4}) {
    const Trajectory tr = trajectory(t, P);
    auto xb = [](double s) { return trajectory(s, P).xbar; };
    auto xbt = [](double s) { return trajectory(s, P).xbar_t; };
    auto sg = [](double s) { return trajectory(s, P).sigma; };
    auto sgt = [](double s) { return trajectory(s, P).sigma_t; };
    CHECK(tr.xbar_t == doctest::Approx(fd_t(xb, t)).epsilon(1e-9));
    CHECK(tr.xbar_tt == doctest::Approx(fd_t(xbt, t)).epsilon(1e-8));
    CHECK(tr.sigma_t == doctest::Approx(fd_t(sg, t)).epsilon(1e-8));
    CHECK(tr.sigma_tt == doctest::Approx(fd_t(sgt, t)).epsilon(1e-8));
  }
}

TEST_CASE("nuclear density") {
  const double t = 0.8;
  const Trajectory tr = trajectory(t, P);
  const double peak = 1.0 / (std::sqrt(std::numbers::pi) * tr.sigma);
  CHECK(nuclear_density(tr.xbar, t, P) == doctest::Approx(peak));
  CHECK(nuclear_density(tr.xbar + tr.sigma, t, P) == doctest::Approx(peak * std::exp(-1.0)));
  const auto rho = ScalarField::from_function(G, [&](double x) { return nuclear_density(x, t, P); });
  CHECK(std::abs(integrate(rho) - 1.0) <= 1e-12);
  for (double x : {0.1, 0.3, 0.5}) {
    auto r = [&](double s) { return nuclear_density(x, s, P); };
    CHECK(nuclear_density_rate(x, t, P) == doctest::Approx(fd_t(r, t, 1e-5)).epsilon(1e-7));
  }
}

TEST_CASE("vector potential agrees with its quadrature definition") {
  for (double t : {0.0, 1.3, 4.0}) {
    const auto rate =
        ScalarField::from_function(G, [&](double x) { return nuclear_density_rate(x, t, P); });
    const ScalarField F = cumulative_integral(rate, G.x_min(), CumulativeMethod::spectral);
    const Trajectory tr = trajectory(t, P);
    double flux_err = 0.0;
    double a_err = 0.0;
    for (std::size_t i = 0; i < G.n(); ++i) {
      const double x = G.x(i);
      const double rho = nuclear_density(x, t, P);
      const double u = (x - tr.xbar) / tr.sigma;
      flux_err = std::max(flux_err, std::abs(F[i] + rho * (tr.xbar_t + u * tr.sigma_t)));
      if (rho > 1e-3) {
        const double a_quad = -F[i] / (P.inertia * rho);
        a_err = std::max(a_err, std::abs(a_quad - vector_potential(x, t, P)));
      }
    }
    CHECK(flux_err <= 1e-8);
    CHECK(a_err <= 1e-8);
  }
  {
    // the local fourth-order rule reaches the same bound at t = 0
    const auto rate =
        ScalarField::from_function(G, [&](double x) { return nuclear_density_rate(x, 0.0, P); });
    const ScalarField F = cumulative_integral(rate, G.x_min());
    double flux_err = 0.0;
    for (std::size_t i = 0; i < G.n(); ++i)
      flux_err = std::max(flux_err, std::abs(F[i] + P.inertia * nuclear_density(G.x(i), 0.0, P) *
                                                        vector_potential(G.x(i), 0.0, P)));
    CHECK(flux_err <= 1e-8);
  }
  CHECK(vector_potential(0.0, 0.0, P) == doctest::Approx(1.0).epsilon(1e-14));
  const double t = 2.2;
  CHECK(vector_potential(mean_position(t, P), t, P) ==
        doctest::Approx(trajectory(t, P).xbar_t / P.inertia));
}

TEST_CASE("continuity with the closed-form current") {
  const double t = 0.0;
  const auto J = ScalarField::from_function(G, [&](double x) {
    return P.inertia * nuclear_density(x, t, P) * vector_potential(x, t, P);
  });
  const ScalarField dJ = derivative(J);
  double r = 0.0;
  for (std::size_t i = 0; i < G.n(); ++i) {
    auto rho = [&](double s) { return nuclear_density(G.x(i), s, P); };
    r = std::max(r, std::abs(fd_t(rho, t, 1e-5) + dJ[i]));
  }
  CHECK(r <= 1e-7);
}

TEST_CASE("bloch fields") {
  const BlochState b = bloch_fields(0.0, G, P);
  const std::size_t i1 = 2048;
  REQUIRE(G.x(i1) == doctest::Approx(1.0));
  CHECK(b.w[i1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b.phi[i1] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(b.w[G.n() - 1] == doctest::Approx(P.eta).epsilon(1e-12));
  CHECK(b.w[0] == doctest::Approx(1.0 - P.eta).epsilon(1e-12));
  CHECK(std::abs(b.alpha[0]) <= 1e-15);
  CHECK(b.front_resolved);
  for (std::size_t i = 0; i < G.n(); ++i) {
    CHECK(std::abs(b.w[i]) < 1.0);
    CHECK(b.chi_abs[i] >= 0.0);
  }
  // alpha from its definition with an independent local quadrature on a 4x finer grid
  const Grid1D fine(G.x_min(), G.x_max(), 4 * G.n());
  const ModelDerivatives d = model_derivatives(0.0, fine, P);
  ScalarField integrand(fine);
  for (std::size_t i = 0; i < fine.n(); ++i)
    integrand[i] = 2.0 * vector_potential(fine.x(i), 0.0, P) + d.w[i] * d.phi_x[i];
  const ScalarField alpha = cumulative_integral(integrand, fine.x_min());
  double e_alpha = 0.0;
  for (std::size_t i = 0; i < G.n(); ++i) e_alpha = std::max(e_alpha, std::abs(alpha[4 * i] - b.alpha[i]));
  CHECK(e_alpha <= 1e-8);

  CHECK(front_points_per_width(10.0, G, P) < 10.0);
  const BlochState late = bloch_fields(10.0, G, P);
  CHECK_FALSE(late.front_resolved);
  CHECK_THROWS_AS(bloch_fields(10.0, G, P, ResolutionPolicy::strict), ResolutionError);
  CHECK_THROWS_AS(bloch_fields(0.0, Grid1D(-4.0, 1.2, 512), P), DomainError);
}

TEST_CASE("analytic and autodiff derivative routes agree") {
  for (double t : {0.0, 0.5, 3.0}) {
    const ModelDerivatives a = model_derivatives(t, G, P, DerivativeRoute::analytic);
    const ModelDerivatives b = model_derivatives(t, G, P, DerivativeRoute::autodiff);
    auto rel = [](const std::vector<double>& x, const std::vector<double>& y) {
      return max_abs(x, y) / std::max(1.0, max_abs(x));
    };
    CHECK(rel(a.w_xxx, b.w_xxx) <= 1e-12);
    CHECK(rel(a.w_xt, b.w_xt) <= 1e-12);
    CHECK(rel(a.theta_xxx, b.theta_xxx) <= 1e-12);
    CHECK(rel(a.theta_xt, b.theta_xt) <= 1e-12);
    CHECK(rel(a.phi_xxx, b.phi_xxx) <= 1e-12);
    CHECK(rel(a.phi_xt, b.phi_xt) <= 1e-12);
    CHECK(rel(a.alpha_t, b.alpha_t) <= 1e-12);
    CHECK(rel(a.lnchi_t, b.lnchi_t) <= 1e-12);
    CHECK(rel(a.lnchi_xx, b.lnchi_xx) <= 1e-12);
  }
}

TEST_CASE("analytic time derivatives match finite differences") {
  const double t = 1.7, h = 1e-5;
  const ModelDerivatives d = model_derivatives(t, G, P);
  const ModelDerivatives m2 = model_derivatives(t - 2 * h, G, P);
  const ModelDerivatives m1 = model_derivatives(t - h, G, P);
  const ModelDerivatives p1 = model_derivatives(t + h, G, P);
  const ModelDerivatives p2 = model_derivatives(t + 2 * h, G, P);
  auto fd = [&](auto field) {
    std::vector<double> out(G.n());
    for (std::size_t i = 0; i < G.n(); ++i)
      out[i] = ((m2.*field)[i] - 8 * (m1.*field)[i] + 8 * (p1.*field)[i] - (p2.*field)[i]) / (12 * h);
    return out;
  };
  CHECK(max_abs(fd(&ModelDerivatives::theta), d.theta_t) <= 1e-8);
  CHECK(max_abs(fd(&ModelDerivatives::phi), d.phi_t) <= 1e-8);
  CHECK(max_abs(fd(&ModelDerivatives::alpha), d.alpha_t) <= 1e-7);
  CHECK(max_abs(fd(&ModelDerivatives::lnchi), d.lnchi_t) <= 1e-6);
}

TEST_CASE("reverse-engineered potential solves the implicit equations") {
  for (double t : {0.0, 0.5, 2.0}) {
    const ModelDerivatives d = model_derivatives(t, G, P);
    HamiltonianOptions fd_opts;
    fd_opts.time = TimeDerivative::central_difference;
    const HamiltonianFields h_fd = hamiltonian_entries(t, G, P, fd_opts);
    const auto r = implicit_equation_residuals(d, h_fd, P, G);
    for (const auto& line : r) CHECK(max_abs(line.data()) <= 1e-6);
    const HamiltonianFields h = hamiltonian_entries(t, G, P);
    for (const auto& line : implicit_equation_residuals(d, h, P, G))
      CHECK(max_abs(line.data()) <= 1e-10);
    CHECK(max_abs(h.h1.data(), h_fd.h1.data()) <= 1e-6);
    CHECK(max_abs(h.h3.data(), h_fd.h3.data()) <= 1e-6);
    CHECK(max_abs(h.h0.data(), h_fd.h0.data()) <= 1e-6);
  }
}

TEST_CASE("potential gradient matches a stencil derivative") {
  const double t = 0.5;
  const HamiltonianGradient hg = hamiltonian_with_gradient(t, G, P);
  const HamiltonianGradient ha = hamiltonian_with_gradient(t, G, P, DerivativeRoute::analytic);
  const HamiltonianFields plain = hamiltonian_entries(t, G, P);
  CHECK(max_abs(hg.h.h0.data(), plain.h0.data()) <= 1e-10);
  auto check = [&](const ScalarField& f, const ScalarField& df, const ScalarField& df_alt) {
    const ScalarField num = derivative(f, 1, DerivativeMethod::fd4);
    double e = 0.0, scale = 0.0;
    for (std::size_t i = 16; i + 16 < G.n(); ++i) {
      e = std::max(e, std::abs(num[i] - df[i]));
      scale = std::max(scale, std::abs(df[i]));
    }
    CHECK(e <= 1e-4 * scale);
    CHECK(max_abs(df.data(), df_alt.data()) <= 1e-9 * scale);
  };
  check(hg.h.h0, hg.dh.h0, ha.dh.h0);
  check(hg.h.h1, hg.dh.h1, ha.dh.h1);
  check(hg.h.h3, hg.dh.h3, ha.dh.h3);
}

TEST_CASE("assembled wavefunction") {
  for (double t : {0.0, 1.0}) {
    const TwoComponentWavefunction psi = assemble_psi(t, G, P);
    CHECK(std::abs(psi.norm() - 1.0) <= 1e-12);
    const ScalarField rho = psi.density();
    const BlochState b = bloch_fields(t, G, P);
    double e_rho = 0.0, e_w = 0.0;
    for (std::size_t i = 0; i < G.n(); ++i) {
      const double r = nuclear_density(G.x(i), t, P);
      e_rho = std::max(e_rho, std::abs(rho[i] - r) / std::max(r, 1e-300));
      if (r > 1e-200)
        e_w = std::max(e_w, std::abs((std::norm(psi.psi1[i]) - std::norm(psi.psi2[i])) / rho[i] - b.w[i]));
    }
    CHECK(e_rho <= 1e-13);
    CHECK(e_w <= 1e-12);
  }
}

TEST_CASE("closed-form geometry: D is minus half the metric gradient") {
  for (double t : {0.0, 1.0}) {
    const ClosedFormGeometry cf = closed_form_geometry(t, G, P);
    const ScalarField dg = derivative(cf.g);
    double e = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < G.n(); ++i) {
      e = std::max(e, std::abs(cf.D[i] + 0.5 * dg[i]));
      scale = std::max(scale, std::abs(cf.D[i]));
      CHECK(cf.g[i] >= 0.0);
    }
    CHECK(e <= 1e-9 * scale);
  }
}
