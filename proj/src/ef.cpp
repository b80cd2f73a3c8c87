#include "efgeo/ef.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace efgeo::ef {

namespace {

// <a|b> for two-component vectors.
template <class C>
C braket(C a1, C a2, C b1, C b2) {
  return std::conj(a1) * b1 + std::conj(a2) * b2;
}

cplx narrow(lcplx z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

// Index of the nearest masked point for every grid point.
std::vector<std::size_t> nearest_masked(const std::vector<std::uint8_t>& mask) {
  const std::size_t n = mask.size();
  std::vector<std::size_t> left(n, n), right(n, n), out(n);
  std::size_t last = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) last = i;
    left[i] = last;
  }
  last = n;
  for (std::size_t i = n; i-- > 0;) {
    if (mask[i]) last = i;
    right[i] = last;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (left[i] == n) out[i] = right[i];
    else if (right[i] == n) out[i] = left[i];
    else out[i] = (i - left[i] <= right[i] - i) ? left[i] : right[i];
  }
  return out;
}

// Stores Phi and its derivatives at point i (jets u, d of the two components:
// value, first, second, third derivative) and evaluates the geometric fields.
void set_point(EFDecomposition& dec, std::size_t i, const std::array<lcplx, 4>& u,
               const std::array<lcplx, 4>& d) {
  using R = long double;
  using Z = lcplx;
  const Z I(0.0L, 1.0L);
  const auto& [f1, f1x, f1xx, f1xxx] = u;
  const auto& [f2, f2x, f2xx, f2xxx] = d;
    dec.phi1[i] = narrow(f1);
    dec.phi2[i] = narrow(f2);
    dec.dphi1[0][i] = narrow(f1x);
    dec.dphi1[1][i] = narrow(f1xx);
    dec.dphi1[2][i] = narrow(f1xxx);
    dec.dphi2[0][i] = narrow(f2x);
    dec.dphi2[1][i] = narrow(f2xx);
    dec.dphi2[2][i] = narrow(f2xxx);

    const R A = braket(f1, f2, f1x, f2x).imag();
    const R A_x = braket(f1, f2, f1xx, f2xx).imag();
    const R A_xx = braket(f1x, f2x, f1xx, f2xx).imag() + braket(f1, f2, f1xxx, f2xxx).imag();
    dec.A[i] = static_cast<double>(A);
    dec.A_x[i] = static_cast<double>(A_x);
    dec.A_xx[i] = static_cast<double>(A_xx);
    dec.g[i] = static_cast<double>(braket(f1x, f2x, f1x, f2x).real() - A * A);
    dec.g_x[i] = static_cast<double>(2.0L * braket(f1x, f2x, f1xx, f2xx).real() - 2.0L * A * A_x);

    // V = (P - A) Phi, W = (P - A) V, and their x-derivatives
    const Z v1 = -I * f1x - A * f1, v2 = -I * f2x - A * f2;
    const Z v1x = -I * f1xx - A_x * f1 - A * f1x;
    const Z v2x = -I * f2xx - A_x * f2 - A * f2x;
    const Z v1xx = -I * f1xxx - A_xx * f1 - 2.0L * A_x * f1x - A * f1xx;
    const Z v2xx = -I * f2xxx - A_xx * f2 - 2.0L * A_x * f2x - A * f2xx;
    const Z w1 = -I * v1x - A * v1, w2 = -I * v2x - A * v2;
    const Z w1x = -I * v1xx - A_x * v1 - A * v1x;
    const Z w2x = -I * v2xx - A_x * v2 - A * v2x;
    const Z vw = braket(v1, v2, w1, w2);
    dec.C[i] = static_cast<double>(vw.real());
    dec.D[i] = static_cast<double>(vw.imag());
    dec.C_x[i] = static_cast<double>((braket(v1x, v2x, w1, w2) + braket(v1, v2, w1x, w2x)).real());
}

}  // namespace

EFDecomposition decompose(const TwoComponentWavefunction& psi, const DecomposeOptions& opts) {
  if (!(opts.floor > 0.0) || !std::isfinite(opts.floor))
    throw ConfigError("density floor must be positive");
  require_finite(psi.psi1, "psi1");
  require_finite(psi.psi2, "psi2");
  const Grid1D& grid = psi.grid();
  const std::size_t n = grid.n();

  const ScalarField rho = psi.density();
  const double rho_max = *std::max_element(rho.begin(), rho.end());
  if (!(rho_max > 0.0)) throw DegenerateState("wavefunction vanishes identically");
  const double norm = integrate(rho);
  if (std::abs(norm - 1.0) > opts.norm_tolerance)
    throw InvalidField("wavefunction is not normalized (norm " + std::to_string(norm) + ")");
  if (opts.require_decay) {
    std::vector<double> amp(n);
    for (std::size_t i = 0; i < n; ++i) amp[i] = std::sqrt(rho[i]);
    if (edge_ratio(amp) > opts.decay_tolerance)
      throw DomainError("wavefunction does not decay at the grid edges");
  }

  // The Leibniz step below divides by |chi|, which is many orders of magnitude
  // below its peak at the edge of the mask; extended precision keeps the
  // transform roundoff from dominating there.
  const auto d1 = spectral_derivatives_extended(psi.psi1, 3);
  const auto d2 = spectral_derivatives_extended(psi.psi2, 3);

  EFDecomposition dec{psi,
                      opts.floor * rho_max,
                      rho,
                      ScalarField(grid),
                      ComplexField(grid),
                      ComplexField(grid),
                      std::vector<ComplexField>(3, ComplexField(grid)),
                      std::vector<ComplexField>(3, ComplexField(grid)),
                      std::vector<std::uint8_t>(n, 0),
                      false,
                      ScalarField(grid),
                      ScalarField(grid),
                      ScalarField(grid),
                      ScalarField(grid),
                      ScalarField(grid),
                      ScalarField(grid),
                      ScalarField(grid),
                      ScalarField(grid)};

  std::size_t masked = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dec.mask[i] = rho[i] > dec.floor ? 1 : 0;
    masked += dec.mask[i];
  }
  if (masked == 0) throw DegenerateState("no grid point above the density floor");
  dec.extended = masked < n;

  using R = long double;
  using Z = lcplx;
  for (std::size_t i = 0; i < n; ++i) {
    const Z p1 = psi.psi1[i], p2 = psi.psi2[i];
    const Z a1 = d1[0][i], a2 = d2[0][i];
    const Z b1 = d1[1][i], b2 = d2[1][i];
    const Z c1 = d1[2][i], c2 = d2[2][i];
    const R rho = std::norm(p1) + std::norm(p2);
    const R rho_x = 2.0L * braket(p1, p2, a1, a2).real();
    dec.chi_abs2_x[i] = static_cast<double>(rho_x);
    if (!dec.mask[i]) continue;

    // derivatives of |chi| relative to |chi| from those of |chi|^2
    const R r = std::sqrt(rho);
    const R rho_xx = 2.0L * braket(p1, p2, b1, b2).real() + 2.0L * braket(a1, a2, a1, a2).real();
    const R rho_xxx = 2.0L * braket(p1, p2, c1, c2).real() + 6.0L * braket(a1, a2, b1, b2).real();
    const R L1 = rho_x / (2.0L * rho);
    const R L2 = rho_xx / (2.0L * rho) - L1 * L1;
    const R L3 = rho_xxx / (2.0L * rho) - 3.0L * L1 * L2;

    // Leibniz rule for Psi = |chi| Phi solved for the derivatives of Phi
    const Z f1 = p1 / r, f2 = p2 / r;
    const Z f1x = a1 / r - L1 * f1, f2x = a2 / r - L1 * f2;
    const Z f1xx = b1 / r - L2 * f1 - 2.0L * L1 * f1x;
    const Z f2xx = b2 / r - L2 * f2 - 2.0L * L1 * f2x;
    const Z f1xxx = c1 / r - L3 * f1 - 3.0L * L2 * f1x - 3.0L * L1 * f1xx;
    const Z f2xxx = c2 / r - L3 * f2 - 3.0L * L2 * f2x - 3.0L * L1 * f2xx;
    set_point(dec, i, {f1, f1x, f1xx, f1xxx}, {f2, f2x, f2xx, f2xxx});
  }

  if (dec.extended) {
    const auto nearest = nearest_masked(dec.mask);
    for (std::size_t i = 0; i < n; ++i) {
      if (dec.mask[i]) continue;
      dec.phi1[i] = dec.phi1[nearest[i]];
      dec.phi2[i] = dec.phi2[nearest[i]];
    }
  }
  return dec;
}

EFDecomposition regauged(const EFDecomposition& dec, const PhaseJet& jet) {
  const Grid1D& grid = dec.grid();
  for (const ScalarField* f : {&jet.theta, &jet.theta_x, &jet.theta_xx, &jet.theta_xxx})
    if (!(f->grid() == grid)) throw InvalidField("gauge phase lives on a different grid");
  EFDecomposition out = dec;
  out.psi = dec.psi.regauged(jet.theta);
  using Z = lcplx;
  const Z I(0.0L, 1.0L);
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const Z e = std::polar(1.0L, static_cast<long double>(jet.theta[i]));
    if (!dec.on_mask(i)) {
      out.phi1[i] = narrow(e * Z(dec.phi1[i]));
      out.phi2[i] = narrow(e * Z(dec.phi2[i]));
      continue;
    }
    // derivatives of exp(q) Phi with q = i theta
    const Z q1 = I * static_cast<long double>(jet.theta_x[i]);
    const Z q2 = I * static_cast<long double>(jet.theta_xx[i]);
    const Z q3 = I * static_cast<long double>(jet.theta_xxx[i]);
    auto transform = [&](cplx f, cplx fx, cplx fxx, cplx fxxx) {
      const Z a = f, b = fx, c = fxx, d = fxxx;
      return std::array<Z, 4>{e * a, e * (b + q1 * a), e * (c + 2.0L * q1 * b + (q2 + q1 * q1) * a),
                              e * (d + 3.0L * q1 * c + 3.0L * (q2 + q1 * q1) * b +
                                   (q3 + 3.0L * q1 * q2 + q1 * q1 * q1) * a)};
    };
    set_point(out, i, transform(dec.phi1[i], dec.dphi1[0][i], dec.dphi1[1][i], dec.dphi1[2][i]),
              transform(dec.phi2[i], dec.dphi2[0][i], dec.dphi2[1][i], dec.dphi2[2][i]));
  }
  return out;
}

ScalarField connection(const EFDecomposition& dec) { return dec.A; }
ScalarField metric(const EFDecomposition& dec) { return dec.g; }
ScalarField tensor_C(const EFDecomposition& dec) { return dec.C; }
ScalarField tensor_D(const EFDecomposition& dec) { return dec.D; }

std::vector<ComplexField> covariant_derivative(const EFDecomposition& dec) {
  const cplx I(0.0, 1.0);
  std::vector<ComplexField> v(2, ComplexField(dec.grid()));
  for (std::size_t i = 0; i < dec.grid().n(); ++i) {
    v[0][i] = -I * dec.dphi1[0][i] - dec.A[i] * dec.phi1[i];
    v[1][i] = -I * dec.dphi2[0][i] - dec.A[i] * dec.phi2[i];
    if (!dec.on_mask(i)) v[0][i] = v[1][i] = 0.0;
  }
  return v;
}

Energies energies(const EFDecomposition& dec, double inertia) {
  const Grid1D& grid = dec.grid();
  const ComplexField dd1 = derivative(dec.psi.psi1, 2);
  const ComplexField dd2 = derivative(dec.psi.psi2, 2);
  double tn = 0.0, tm = 0.0, tg = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    tn += braket(dec.psi.psi1[i], dec.psi.psi2[i], dd1[i], dd2[i]).real();
    if (!dec.on_mask(i)) continue;
    const double rho = dec.chi_abs2[i];
    const double rx = dec.chi_abs2_x[i];
    tm += rx * rx / (4.0 * rho) + rho * dec.A[i] * dec.A[i];
    tg += rho * dec.g[i];
  }
  const double h = grid.dx();
  return {0.5 * inertia * tm * h, 0.5 * inertia * tg * h, -0.5 * inertia * tn * h};
}

ScalarField current(const EFDecomposition& dec, double inertia) {
  ScalarField j(dec.grid());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = inertia * dec.chi_abs2[i] * dec.A[i];
  return j;
}

ScalarField geometric_energy_density(const EFDecomposition& dec, double inertia) {
  ScalarField e(dec.grid());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = 0.5 * inertia * dec.g[i];
  return e;
}

double masked_max(const EFDecomposition& dec, const ScalarField& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (dec.on_mask(i)) m = std::max(m, std::abs(v[i]));
  return m;
}

}  // namespace efgeo::ef
