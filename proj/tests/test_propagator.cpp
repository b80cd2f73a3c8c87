#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "efgeo/errors.hpp"
#include "efgeo/propagator.hpp"

using namespace efgeo;

namespace {

const model::ModelParams P{};

// Free gaussian of initial width s under i psi_t = -(I/2) psi''.
cplx free_gaussian(double x, double t, double s, double I) {
  const cplx a(1.0, I * t / (2.0 * s * s));
  return std::pow(2.0 * std::numbers::pi * s * s, -0.25) / std::sqrt(a) * std::exp(-x * x / (4.0 * s * s * a));
}

model::HamiltonianFields uniform_h(const Grid1D& g, double h0, double h1, double h3) {
  auto c = [&](double v) { return ScalarField::from_function(g, [v](double) { return v; }); };
  return {c(h0), c(h1), c(h3)};
}

}  // namespace

TEST_CASE("potential factor") {
  const Grid1D g(-5.0, 5.0, 64);
  TwoComponentWavefunction psi(g);
  for (std::size_t i = 0; i < g.n(); ++i) {
    psi.psi1[i] = cplx(std::cos(g.x(i)), 0.3);
    psi.psi2[i] = cplx(0.2, std::sin(g.x(i)));
  }
  // h1 = h3 = 0: a global phase
  TwoComponentWavefunction a = psi;
  propagator::apply_potential(a, uniform_h(g, 1.7, 0.0, 0.0), 0.3);
  const cplx ph = std::polar(1.0, -1.7 * 0.3);
  for (std::size_t i = 0; i < g.n(); ++i) {
    CHECK(std::abs(a.psi1[i] - ph * psi.psi1[i]) <= 1e-15);
    CHECK(std::abs(a.psi2[i] - ph * psi.psi2[i]) <= 1e-15);
  }
  // against the spectral decomposition of [[h0 + h3, h1], [h1, h0 - h3]]
  const double h0 = 0.4, h1 = -0.9, h3 = 0.6, tau = 0.7;
  TwoComponentWavefunction b = psi;
  propagator::apply_potential(b, uniform_h(g, h0, h1, h3), tau);
  const double r = std::hypot(h1, h3);
  const double ev[2] = {h0 + r, h0 - r};
  // eigenvectors of [[h3, h1], [h1, -h3]] for +r and -r
  const double th = std::atan2(h1, h3);
  const double v[2][2] = {{std::cos(th / 2), std::sin(th / 2)}, {-std::sin(th / 2), std::cos(th / 2)}};
  for (std::size_t i = 0; i < g.n(); ++i) {
    cplx o1 = 0.0, o2 = 0.0;
    for (int k = 0; k < 2; ++k) {
      const cplx c = v[k][0] * psi.psi1[i] + v[k][1] * psi.psi2[i];
      const cplx e = std::polar(1.0, -tau * ev[k]) * c;
      o1 += v[k][0] * e;
      o2 += v[k][1] * e;
    }
    CHECK(std::abs(b.psi1[i] - o1) <= 1e-14);
    CHECK(std::abs(b.psi2[i] - o2) <= 1e-14);
  }
}

TEST_CASE("free gaussian") {
  const Grid1D g(-12.0, 12.0, 512);
  const double s = 0.6, I = 0.1;
  TwoComponentWavefunction psi(g);
  for (std::size_t i = 0; i < g.n(); ++i) psi.psi1[i] = free_gaussian(g.x(i), 0.0, s, I);
  const auto h = uniform_h(g, 0.0, 0.0, 0.0);
  for (int k = 0; k < 100; ++k) propagator::step(psi, h, 0.01, I);
  double err = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    err = std::max(err, std::abs(psi.psi1[i] - free_gaussian(g.x(i), 1.0, s, I)));
    CHECK(psi.psi2[i] == cplx(0.0, 0.0));
  }
  CHECK(err <= 1e-8);
}

TEST_CASE("configuration") {
  const Grid1D g(-4.0, 6.0, 256);
  propagator::PropagatorConfig c;
  c.dt = 2e-3;
  CHECK_THROWS_AS(propagator::propagate(P, g, c), AccuracyGuard);
  c.dt = 0.0;
  CHECK_THROWS_AS(propagator::propagate(P, g, c), ConfigError);
  c.dt = 1e-4;
  c.t_end = -1.0;
  CHECK_THROWS_AS(propagator::propagate(P, g, c), ConfigError);
  c.t_end = 1.5e-4;
  CHECK_THROWS_AS(propagator::propagate(P, g, c), ConfigError);

  c.t_end = 0.0;
  const auto r = propagator::propagate(P, g, c);
  CHECK(r.steps == 0);
  REQUIRE(r.samples.size() == 1);
  CHECK(r.samples[0].l2_error == 0.0);
}

TEST_CASE("model propagation") {
  const Grid1D g(-4.0, 6.0, 4096);
  propagator::PropagatorConfig c;
  c.dt = 1e-3;
  c.samples = 5;
  std::size_t snapshots = 0;
  const auto r = propagator::propagate(P, g, c, [&](double, const TwoComponentWavefunction&) { ++snapshots; });
  CHECK(snapshots == 5);
  CHECK(r.steps == 2000);
  REQUIRE(r.samples.size() == 5);
  CHECK(r.samples.back().t == doctest::Approx(2.0));
  for (const auto& s : r.samples) {
    CAPTURE(s.t);
    CHECK(s.l2_error <= 1e-3);
    CHECK(s.xbar_error <= 1e-3);
    CHECK(s.sigma_error <= 1e-3);
    CHECK(s.t_geo > 0.0);
  }
  CHECK(r.norm_drift <= 1e-12);

  std::ostringstream csv;
  propagator::write_csv(csv, r);
  CHECK(csv.str().rfind("t,l2_error,norm", 0) == 0);
  CHECK(propagator::to_json(r)["samples"].size() == 5);
}

TEST_CASE("second order in dt") {
  const Grid1D g(-4.0, 6.0, 2048);
  propagator::PropagatorConfig c;
  c.t_end = 1.0;
  for (auto update : {propagator::HUpdate::per_step, propagator::HUpdate::per_half_step}) {
    c.h_update = update;
    const auto s = propagator::convergence_order(P, g, c, {1e-3, 5e-4, 2.5e-4});
    CHECK(s.slope >= 1.8);
    CHECK(s.slope <= 2.2);
    CHECK(s.error[1] / s.error[2] == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("norm over 10^4 steps") {
  const Grid1D g(-4.0, 6.0, 1024);
  propagator::PropagatorConfig c;
  c.t_end = 1.0;
  c.samples = 3;
  const auto r = propagator::propagate(P, g, c);
  CHECK(r.steps == 10000);
  CHECK(r.norm_drift <= 1e-12);
}

TEST_CASE("snapshot output") {
  const Grid1D g(0.0, 1.0, 32);
  TwoComponentWavefunction psi(g);
  psi.psi1[3] = cplx(0.5, -0.25);
  std::ostringstream out;
  propagator::write_snapshot_csv(out, psi);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,re_psi1,im_psi1,re_psi2,im_psi2");
  for (int k = 0; k < 4; ++k) std::getline(in, line);
  CHECK(line == "0.09375,0.5,-0.25,0,0");
}
