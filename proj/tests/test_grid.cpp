#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "efgeo/grid.hpp"

using namespace efgeo;

namespace {

double max_abs_diff(const ScalarField& a, const auto& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - f(a.grid().x(i))));
  return m;
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 8), GridError);
  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 32), GridError);
  const Grid1D g(-1.0, 3.0, 64);
  CHECK(g.dx() == doctest::Approx(4.0 / 64));
  for (std::size_t i = 1; i < g.n(); ++i) CHECK(g.x(i) > g.x(i - 1));
  CHECK(g.x(g.n() - 1) < g.x_max());
}

TEST_CASE("spectral derivative of a single mode") {
  const Grid1D g(0.0, 3.0, 64);
  const double k = 2.0 * std::numbers::pi / 3.0;
  const auto f = ScalarField::from_function(g, [&](double x) { return std::sin(k * x); });
  CHECK(max_abs_diff(derivative(f), [&](double x) { return k * std::cos(k * x); }) <= 1e-12);
  CHECK(max_abs_diff(derivative(f, 2), [&](double x) { return -k * k * std::sin(k * x); }) <= 1e-11);
  CHECK(max_abs_diff(derivative(f, 3), [&](double x) { return -k * k * k * std::cos(k * x); }) <=
        1e-10);
  const auto c = ScalarField::from_function(g, [](double) { return 2.5; });
  CHECK(max_abs_diff(derivative(c), [](double) { return 0.0; }) == 0.0);
}

TEST_CASE("spectral derivative of a decayed gaussian") {
  const Grid1D g(-10.0, 10.0, 512);
  const auto f = ScalarField::from_function(g, [](double x) { return std::exp(-x * x); });
  CHECK(max_abs_diff(derivative(f), [](double x) { return -2.0 * x * std::exp(-x * x); }) <= 1e-10);
}

TEST_CASE("fd4 derivative converges at fourth order") {
  auto err = [](std::size_t n) {
    const Grid1D g(0.0, 2.0 * std::numbers::pi, n);
    const auto f = ScalarField::from_function(g, [](double x) { return std::exp(std::sin(x)); });
    return max_abs_diff(derivative(f, 1, DerivativeMethod::fd4),
                        [](double x) { return std::cos(x) * std::exp(std::sin(x)); });
  };
  const double slope = std::log2(err(64) / err(128));
  CHECK(slope > 3.8);
  CHECK(slope < 4.2);
}

TEST_CASE("complex derivative and errors") {
  const Grid1D g(0.0, 1.0, 32);
  ComplexField f(g);
  f[3] = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(derivative(f), InvalidField);
  CHECK_THROWS_AS(derivative(ComplexField(g), 4), GridError);
  CHECK_THROWS_AS(derivative(ComplexField(Grid1D(0.0, 1.0, 33))), GridError);
  CHECK_NOTHROW(derivative(ComplexField(Grid1D(0.0, 1.0, 33)), 1, DerivativeMethod::fd4));
}

TEST_CASE("integrate") {
  const Grid1D g(0.0, 1.0, 37);
  CHECK(integrate(ScalarField::from_function(g, [](double) { return 1.0; })) ==
        doctest::Approx(1.0).epsilon(1e-15));
  const Grid1D p(0.0, 4.0, 64);
  CHECK(std::abs(integrate(ScalarField::from_function(
            p, [](double x) { return std::sin(2.0 * std::numbers::pi * x / 4.0); }))) <= 1e-14);
  const Grid1D w(-5.0, 5.0, 256);
  const double s = 0.4;
  const auto rho = ScalarField::from_function(w, [&](double x) {
    return std::exp(-x * x / (s * s)) / (std::sqrt(std::numbers::pi) * s);
  });
  CHECK(std::abs(integrate(rho) - 1.0) <= 1e-12);
  auto a = ScalarField::from_function(w, [](double x) { return std::cos(x); });
  auto b = ScalarField::from_function(w, [](double x) { return x * x; });
  CHECK(std::abs(integrate(2.0 * a + 3.0 * b) - (2.0 * integrate(a) + 3.0 * integrate(b))) <= 1e-12);
  ScalarField bad(w);
  bad[0] = INFINITY;
  CHECK_THROWS_AS(integrate(bad), InvalidField);
}

TEST_CASE("cumulative integral") {
  const Grid1D g(-1.0, 1.0, 64);
  const auto one = ScalarField::from_function(g, [](double) { return 1.0; });
  for (auto m : {CumulativeMethod::trapezoid, CumulativeMethod::fourth_order}) {
    CHECK(max_abs_diff(cumulative_integral(one, 0.0, m), [](double x) { return x; }) <= 1e-14);
  }
  const auto lin = ScalarField::from_function(g, [](double x) { return 2.0 * x; });
  const double dx = g.dx();
  CHECK(max_abs_diff(cumulative_integral(lin, 0.0, CumulativeMethod::trapezoid),
                     [](double x) { return x * x; }) <= dx * dx);
  CHECK(max_abs_diff(cumulative_integral(lin, 0.0), [](double x) { return x * x; }) <= 1e-13);
  CHECK_THROWS_AS(cumulative_integral(one, 2.0), DomainError);
  CHECK_THROWS_AS(cumulative_integral(one, -1.5), DomainError);

  // derivative of the cumulative integral returns the integrand
  const Grid1D h(-8.0, 8.0, 256);
  const auto f = ScalarField::from_function(h, [](double x) { return std::exp(-x * x) * std::cos(3 * x); });
  for (auto m : {CumulativeMethod::trapezoid, CumulativeMethod::fourth_order}) {
    const ScalarField F = cumulative_integral(f, h.x_min(), m);
    const ScalarField dF = derivative(F, 1, DerivativeMethod::fd4);
    double e = 0.0;
    for (std::size_t i = 8; i + 8 < h.n(); ++i) e = std::max(e, std::abs(dF[i] - f[i]));
    CHECK(e <= 4.0 * h.dx() * h.dx());
  }
}

TEST_CASE("spectral cumulative integral of a localized integrand") {
  const Grid1D g(-10.0, 10.0, 256);
  const auto f = ScalarField::from_function(g, [](double x) { return std::exp(-x * x); });
  const ScalarField F = cumulative_integral(f, -10.0, CumulativeMethod::spectral);
  const double root_pi = std::sqrt(std::numbers::pi);
  CHECK(max_abs_diff(F, [&](double x) { return 0.5 * root_pi * (1.0 + std::erf(x)); }) <= 1e-13);
  const ScalarField G = cumulative_integral(f, 0.3, CumulativeMethod::spectral);
  CHECK(max_abs_diff(G, [&](double x) { return 0.5 * root_pi * (std::erf(x) - std::erf(0.3)); }) <=
        1e-13);
}

TEST_CASE("edge ratio") {
  std::vector<double> v{1e-14, 0.5, 2.0, 1.0, 1e-13};
  CHECK(edge_ratio(v, 1) == doctest::Approx(0.5e-13));
}
