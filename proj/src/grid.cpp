#include "efgeo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"

namespace efgeo {

Grid1D::Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
    throw GridError("grid requires finite x_min < x_max");
  if (n < 16) throw GridError("grid requires at least 16 points, got " + std::to_string(n));
}

std::vector<double> Grid1D::points() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

double Grid1D::wavenumber(std::size_t j) const {
  const auto n = static_cast<long>(n_);
  const auto jj = static_cast<long>(j);
  const long m = jj <= n / 2 ? jj : jj - n;
  return 2.0 * std::numbers::pi * static_cast<double>(m) / length();
}

void require_finite(const ScalarField& f, const char* what) {
  for (double v : f)
    if (!std::isfinite(v)) throw InvalidField(std::string("non-finite value in ") + what);
}

void require_finite(const ComplexField& f, const char* what) {
  for (const cplx& v : f)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw InvalidField(std::string("non-finite value in ") + what);
}

namespace {

void check_order(int order) {
  if (order < 1 || order > 3) throw GridError("derivative order must be 1, 2 or 3");
}

// (i k)^order, with the unpaired Nyquist mode dropped for odd orders.
cplx spectral_symbol(const Grid1D& g, std::size_t j, int order) {
  const double k = g.wavenumber(j);
  const bool nyquist = g.n() % 2 == 0 && j == g.n() / 2;
  if (nyquist && order % 2 == 1) return 0.0;
  cplx s = 1.0;
  for (int p = 0; p < order; ++p) s *= cplx(0.0, k);
  return s;
}

ComplexField fd4_derivative(const ComplexField& f, int order) {
  const Grid1D& g = f.grid();
  const std::size_t n = g.n();
  const double h = g.dx();
  ComplexField out(g);
  auto at = [&](std::size_t i, long off) {
    const long idx = (static_cast<long>(i) + off + static_cast<long>(n)) % static_cast<long>(n);
    return f[static_cast<std::size_t>(idx)];
  };
  for (std::size_t i = 0; i < n; ++i) {
    switch (order) {
      case 1:
        out[i] = (-at(i, 2) + 8.0 * at(i, 1) - 8.0 * at(i, -1) + at(i, -2)) / (12.0 * h);
        break;
      case 2:
        out[i] = (-at(i, 2) + 16.0 * at(i, 1) - 30.0 * at(i, 0) + 16.0 * at(i, -1) - at(i, -2)) /
                 (12.0 * h * h);
        break;
      default:
        out[i] = (-at(i, 3) + 8.0 * at(i, 2) - 13.0 * at(i, 1) + 13.0 * at(i, -1) -
                  8.0 * at(i, -2) + at(i, -3)) /
                 (8.0 * h * h * h);
    }
  }
  return out;
}

void require_spectral_size(const Grid1D& g) {
  if (g.n() % 2 != 0) throw GridError("spectral differentiation needs an even point count");
}

}  // namespace

std::vector<ComplexField> spectral_derivatives(const ComplexField& f, int max_order) {
  check_order(max_order);
  require_finite(f, "derivative input");
  const Grid1D& g = f.grid();
  require_spectral_size(g);
  const std::size_t n = g.n();
  std::vector<cplx> spec(n), work(n);
  detail::fft_forward(f.values(), spec);
  std::vector<ComplexField> out;
  out.reserve(static_cast<std::size_t>(max_order));
  for (int order = 1; order <= max_order; ++order) {
    for (std::size_t j = 0; j < n; ++j)
      work[j] = spec[j] * spectral_symbol(g, j, order) / static_cast<double>(n);
    ComplexField d(g);
    detail::fft_backward(work, d.values());
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<std::vector<lcplx>> spectral_derivatives_extended(const ComplexField& f, int max_order) {
  check_order(max_order);
  require_finite(f, "derivative input");
  const Grid1D& g = f.grid();
  require_spectral_size(g);
  const std::size_t n = g.n();
  std::vector<lcplx> in(f.begin(), f.end()), spec(n), work(n);
  detail::fft_forward(in, spec);
  const long double two_pi_over_l = 2.0L * std::numbers::pi_v<long double> / g.length();
  std::vector<std::vector<lcplx>> out;
  for (int order = 1; order <= max_order; ++order) {
    for (std::size_t j = 0; j < n; ++j) {
      const long m = j <= n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
      const long double k = two_pi_over_l * static_cast<long double>(m);
      lcplx s = 1.0L;
      if (j == n / 2 && order % 2 == 1) s = 0.0L;
      for (int p = 0; p < order; ++p) s *= lcplx(0.0L, k);
      work[j] = spec[j] * s / static_cast<long double>(n);
    }
    std::vector<lcplx> d(n);
    detail::fft_backward(work, d);
    out.push_back(std::move(d));
  }
  return out;
}

ComplexField derivative(const ComplexField& f, int order, DerivativeMethod method) {
  check_order(order);
  require_finite(f, "derivative input");
  if (method == DerivativeMethod::fd4) return fd4_derivative(f, order);
  const Grid1D& g = f.grid();
  require_spectral_size(g);
  const std::size_t n = g.n();
  std::vector<cplx> spec(n);
  detail::fft_forward(f.values(), spec);
  for (std::size_t j = 0; j < n; ++j) spec[j] *= spectral_symbol(g, j, order) / static_cast<double>(n);
  ComplexField d(g);
  detail::fft_backward(spec, d.values());
  return d;
}

ScalarField derivative(const ScalarField& f, int order, DerivativeMethod method) {
  ComplexField c(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
  const ComplexField d = derivative(c, order, method);
  ScalarField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = d[i].real();
  return out;
}

double integrate(std::span<const double> f, double dx) {
  double sum = 0.0;
  for (double v : f) {
    if (!std::isfinite(v)) throw InvalidField("non-finite value in integrand");
    sum += v;
  }
  return sum * dx;
}

double integrate(const ScalarField& f) { return integrate(f.values(), f.grid().dx()); }

namespace {

// Cubic Lagrange interpolation of samples F at an arbitrary point inside the grid.
double interpolate_cubic(const Grid1D& g, std::span<const double> F, double x) {
  const std::size_t n = g.n();
  const double s = (x - g.x_min()) / g.dx();
  auto base = static_cast<long>(std::floor(s)) - 1;
  base = std::clamp(base, 0L, static_cast<long>(n) - 4);
  double result = 0.0;
  for (long a = 0; a < 4; ++a) {
    double w = 1.0;
    for (long b = 0; b < 4; ++b) {
      if (a == b) continue;
      w *= (s - static_cast<double>(base + b)) / static_cast<double>(a - b);
    }
    result += w * F[static_cast<std::size_t>(base + a)];
  }
  return result;
}

std::vector<double> cumulative_from_start(const ScalarField& f, CumulativeMethod method) {
  const Grid1D& g = f.grid();
  const std::size_t n = g.n();
  const double h = g.dx();
  std::vector<double> F(n, 0.0);
  if (method == CumulativeMethod::trapezoid) {
    for (std::size_t i = 0; i + 1 < n; ++i) F[i + 1] = F[i] + 0.5 * h * (f[i] + f[i + 1]);
    return F;
  }
  // cubic-Lagrange cell rule; one-sided stencils in the first and last cells
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double cell;
    if (i == 0) {
      cell = 9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3];
    } else if (i + 2 >= n) {
      cell = f[i - 2] - 5.0 * f[i - 1] + 19.0 * f[i] + 9.0 * f[i + 1];
    } else {
      cell = -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2];
    }
    F[i + 1] = F[i] + h * cell / 24.0;
  }
  return F;
}

}  // namespace

ScalarField cumulative_integral(const ScalarField& f, double x_ref, CumulativeMethod method) {
  require_finite(f, "cumulative integrand");
  const Grid1D& g = f.grid();
  const std::size_t n = g.n();
  if (!(x_ref >= g.x_min() && x_ref <= g.x(n - 1)))
    throw DomainError("cumulative_integral reference point outside the grid");

  ScalarField out(g);
  if (method == CumulativeMethod::spectral) {
    require_spectral_size(g);
    std::vector<cplx> spec(n), work(n);
    for (std::size_t i = 0; i < n; ++i) work[i] = f[i];
    detail::fft_forward(work, spec);
    const double mean = spec[0].real() / static_cast<double>(n);
    // periodic antiderivative P of f - mean
    std::vector<cplx> anti(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
      const bool nyquist = j == n / 2;
      if (nyquist) continue;
      anti[j] = spec[j] / (cplx(0.0, g.wavenumber(j)) * static_cast<double>(n));
    }
    detail::fft_backward(anti, work);
    // P at x_ref from the trigonometric interpolant
    cplx p_ref = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      if (j == n / 2) continue;
      p_ref += anti[j] * std::exp(cplx(0.0, g.wavenumber(j) * (x_ref - g.x_min())));
    }
    for (std::size_t i = 0; i < n; ++i)
      out[i] = mean * (g.x(i) - x_ref) + work[i].real() - p_ref.real();
    return out;
  }

  const std::vector<double> F = cumulative_from_start(f, method);
  double offset;
  if (method == CumulativeMethod::trapezoid) {
    const double s = (x_ref - g.x_min()) / g.dx();
    const auto i = std::min(static_cast<std::size_t>(s), n - 2);
    const double frac = s - static_cast<double>(i);
    offset = F[i] * (1.0 - frac) + F[i + 1] * frac;
  } else {
    offset = interpolate_cubic(g, F, x_ref);
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = F[i] - offset;
  return out;
}

double edge_ratio(std::span<const double> magnitude, std::size_t edge) {
  double peak = 0.0;
  for (double v : magnitude) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  double at_edge = 0.0;
  const std::size_t n = magnitude.size();
  for (std::size_t i = 0; i < std::min(edge, n); ++i) {
    at_edge = std::max(at_edge, std::abs(magnitude[i]));
    at_edge = std::max(at_edge, std::abs(magnitude[n - 1 - i]));
  }
  return at_edge / peak;
}

}  // namespace efgeo
