#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "efgeo/identity.hpp"

using namespace efgeo;
using identity::Reading;

namespace {

const model::ModelParams P{};
const Grid1D G(-4.0, 6.0, 4096);

}  // namespace

TEST_CASE("lhs_rate") {
  const double dt = 0.1;
  std::vector<double> c(7, 2.5), ramp, quartic;
  for (int k = 0; k < 7; ++k) {
    const double t = 1.0 + k * dt;
    ramp.push_back(3.0 * t - 1.0);
    quartic.push_back(t * t * t * t - 2.0 * t * t);
  }
  for (double v : identity::lhs_rate(c, dt)) CHECK(v == 0.0);
  for (double v : identity::lhs_rate(ramp, dt)) CHECK(v == doctest::Approx(3.0).epsilon(1e-13));
  const auto q = identity::lhs_rate(quartic, dt);
  for (int k = 0; k < 7; ++k) {
    const double t = 1.0 + k * dt;
    CHECK(q[k] == doctest::Approx(4.0 * t * t * t - 4.0 * t).epsilon(1e-12));
  }
  CHECK_THROWS_AS(identity::lhs_rate({1.0, 2.0, 3.0, 4.0}, dt), ConfigError);
  CHECK_THROWS_AS(identity::lhs_rate(c, 0.0), ConfigError);
}

TEST_CASE("T_geo series") {
  const std::vector<double> times{0.0, 0.5, 1.0, 2.5, 5.0, 10.0};
  const auto s = identity::t_geo_series(P, G, times);
  for (double v : s) CHECK(v > 0.0);
  CHECK_THROWS_AS(identity::t_geo_series(P, G, {1.0, 0.5}), ConfigError);

  // closed-form g against |chi|^2 on a finer grid
  for (double t : {0.0, 1.0, 5.0}) {
    const Grid1D fine(-4.0, 6.0, 16384);
    const auto cf = model::closed_form_geometry(t, fine, P);
    double sum = 0.0;
    for (std::size_t i = 0; i < fine.n(); ++i) sum += model::nuclear_density(fine.x(i), t, P) * cf.g[i];
    const double oracle = 0.5 * P.inertia * sum * fine.dx();
    CHECK(identity::t_geo_series(P, G, {t})[0] == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("lhs converges in the step") {
  // at t = 1 the rate is ~6e-5 and the 1e-12 roundoff of the differences is
  // already 1.5e-8 of it, so the check uses times where the rate is O(0.1)
  for (double t : {5.0, 7.5}) {
    const double coarse = identity::lhs_at(P, G, t, 1e-3);
    const double fine = identity::lhs_at(P, G, t, 1e-4);
    CHECK(std::abs(coarse - fine) <= 1e-8 * std::abs(fine));
  }
  // the forward stencil at the start of the range agrees with the centred one
  const double centred = identity::lhs_at(P, G, 3.0, 1e-4);
  const double forward = identity::lhs_at(P, G, 3.0, 1e-4, 3.0);
  CHECK(std::abs(centred - forward) <= 1e-8 * std::abs(centred));
}

TEST_CASE("right-hand side terms") {
  for (double t : {0.5, 2.0, 5.0, 8.0}) {
    CAPTURE(t);
    const auto a = identity::rhs_terms(P, G, t, Reading::A);
    const auto b = identity::rhs_terms(P, G, t, Reading::B);
    CHECK(std::abs(b.T3) <= 1e-10);
    CHECK(a.T1 == b.T1);
    CHECK(a.T3 == b.T3);
    // the general result, specialised, against the model form of reading B
    const auto gen = identity::general_terms(P, G, t);
    CHECK(gen.curvature == 0.0);
    const double scale = std::abs(b.T1) + std::abs(b.T2) + std::abs(b.T4);
    CHECK(std::abs(gen.force - (b.T1 + b.T2)) <= 1e-12 * scale);
    CHECK(std::abs(gen.flow - b.T4) <= 1e-12 * scale);
    // reading B reproduces the rate; reading A misses by far more than the rate itself
    const double lhs = identity::lhs_at(P, G, t, 1e-4);
    CHECK(std::abs(b.total() - lhs) <= 1e-9 * std::max(std::abs(lhs), 1e-3));
    CHECK(std::abs(a.total() - lhs) > 1.0);
  }
}

TEST_CASE("pointwise E_geo equation") {
  const auto r = identity::pointwise_dEgeo_check(P, G, 0.5, 1e-5);
  CHECK(r.max_rate > 0.1);
  CHECK(r.relative() <= 1e-4);
  // order check below the roundoff floor of the time differences
  const auto coarse = identity::pointwise_dEgeo_check(P, Grid1D(-4.0, 6.0, 1024), 0.5, 4e-5);
  const auto fine = identity::pointwise_dEgeo_check(P, Grid1D(-4.0, 6.0, 2048), 0.5, 1e-5);
  CHECK(coarse.max_residual >= 8.0 * fine.max_residual);
}

TEST_CASE("verification") {
  identity::VerifyOptions o;
  o.t_end = 6.0;
  o.samples = 13;
  const Grid1D g(-4.0, 6.0, 2048);
  const auto rep = identity::verify(P, g, o);
  CHECK(rep.pass);
  CHECK(rep.winner == Reading::B);
  CHECK(rep.relative_of(Reading::B) <= 1e-8);
  CHECK(rep.relative_of(Reading::A) > 1.0);
  CHECK(rep.times.size() == 13);
  CHECK(rep.terms[1].size() == 13);

  o.mutation.sign = {1.0, -1.0, 1.0, -1.0};
  CHECK_THROWS_AS(identity::verify(P, g, o), identity::VerificationFailure);
  try {
    identity::verify(P, g, o);
  } catch (const identity::VerificationFailure& e) {
    CHECK(e.report().mutated);
    CHECK_FALSE(e.report().pass);
  }

  identity::VerifyOptions single;
  single.samples = 1;
  CHECK_THROWS_AS(identity::verify(P, g, single), ConfigError);
  identity::VerifyOptions empty;
  empty.t_end = 0.0;
  CHECK_THROWS_AS(identity::verify(P, g, empty), ConfigError);
}

TEST_CASE("report output") {
  identity::VerifyOptions o;
  o.t_end = 1.0;
  o.samples = 3;
  const auto rep = identity::evaluate(P, Grid1D(-4.0, 6.0, 1024), o);
  const auto j = identity::to_json(rep);
  CHECK(j["readings"]["B"]["T1"].size() == 3);
  CHECK(j["winner"] == "B");
  std::ostringstream csv;
  identity::write_csv(csv, rep);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("t,T_geo,lhs,T1_A", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
