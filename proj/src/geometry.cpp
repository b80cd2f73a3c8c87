#include "efgeo/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>

namespace efgeo::geometry {

// Spinor fields are differenced twice; long double keeps their roundoff
// below the truncation error of the stencils.
using lcplx = std::complex<long double>;
using ComplexArray = std::vector<lcplx>;

ParamGrid::ParamGrid(std::vector<std::size_t> shape, std::vector<double> length)
    : shape_(std::move(shape)), length_(std::move(length)) {
  if (shape_.empty() || shape_.size() > 3) throw GridError("parameter grid dimension must be 1, 2 or 3");
  if (length_.size() != shape_.size()) throw GridError("parameter grid needs one length per axis");
  for (std::size_t mu = 0; mu < shape_.size(); ++mu) {
    if (shape_[mu] < 32)
      throw GridError("parameter grid needs at least 32 points per axis, got " +
                      std::to_string(shape_[mu]));
    if (!(length_[mu] > 0.0) || !std::isfinite(length_[mu]))
      throw GridError("parameter grid lengths must be positive");
  }
  stride_.assign(shape_.size(), 1);
  for (std::size_t mu = shape_.size() - 1; mu-- > 0;) stride_[mu] = stride_[mu + 1] * shape_[mu + 1];
  size_ = stride_[0] * shape_[0];
}

ParamGrid ParamGrid::cube(std::size_t d, std::size_t n) {
  return ParamGrid(std::vector<std::size_t>(d, n), std::vector<double>(d, 2.0 * std::numbers::pi));
}

double ParamGrid::cell_volume() const {
  double v = 1.0;
  for (std::size_t mu = 0; mu < d(); ++mu) v *= spacing(mu);
  return v;
}

std::vector<double> ParamGrid::coordinates(std::size_t p) const {
  std::vector<double> q(d());
  for (std::size_t mu = 0; mu < d(); ++mu)
    q[mu] = static_cast<double>((p / stride_[mu]) % shape_[mu]) * spacing(mu);
  return q;
}

std::size_t ParamGrid::shifted(std::size_t p, std::size_t mu, long offset) const {
  const auto n = static_cast<long>(shape_[mu]);
  const auto i = static_cast<long>((p / stride_[mu]) % shape_[mu]);
  const long j = ((i + offset) % n + n) % n;
  return static_cast<std::size_t>(static_cast<long>(p) + (j - i) * static_cast<long>(stride_[mu]));
}

double FieldRecipe::operator()(const std::vector<double>& Q, const ParamGrid& grid) const {
  double v = constant;
  for (std::size_t mu = 0; mu < slope.size(); ++mu) v += slope[mu] * Q[mu];
  for (const FourierTerm& m : modes) {
    double arg = m.phase;
    for (std::size_t mu = 0; mu < m.k.size(); ++mu)
      arg += 2.0 * std::numbers::pi * m.k[mu] * Q[mu] / grid.length(mu);
    v += m.amplitude * std::cos(arg);
  }
  return v;
}

namespace {

FieldRecipe parse_field(const nlohmann::json& j, std::size_t d, const char* which) {
  FieldRecipe f;
  if (j.is_number()) {
    f.constant = j.get<double>();
    return f;
  }
  if (!j.is_object()) throw RecipeError(std::string("field '") + which + "' must be a number or object");
  f.constant = j.value("constant", 0.0);
  if (j.contains("slope")) {
    f.slope = j.at("slope").get<std::vector<double>>();
    if (f.slope.size() != d) throw RecipeError(std::string("slope of '") + which + "' needs d entries");
  }
  if (j.contains("modes")) {
    for (const auto& m : j.at("modes")) {
      FourierTerm t;
      t.amplitude = m.at("amplitude").get<double>();
      t.k = m.at("k").get<std::vector<int>>();
      t.phase = m.value("phase", 0.0);
      if (t.k.size() != d) throw RecipeError(std::string("mode of '") + which + "' needs d wavenumbers");
      f.modes.push_back(std::move(t));
    }
  }
  return f;
}

nlohmann::json field_to_json(const FieldRecipe& f) {
  nlohmann::json j;
  j["constant"] = f.constant;
  if (!f.slope.empty()) j["slope"] = f.slope;
  j["modes"] = nlohmann::json::array();
  for (const FourierTerm& m : f.modes)
    j["modes"].push_back({{"amplitude", m.amplitude}, {"k", m.k}, {"phase", m.phase}});
  return j;
}

FourierTerm mode(double amplitude, std::vector<int> k, double phase = 0.0) {
  return {amplitude, std::move(k), phase};
}

}  // namespace

FamilyRecipe parse_recipe(const nlohmann::json& j) {
  try {
    FamilyRecipe r;
    r.name = j.value("name", std::string("unnamed"));
    r.d = j.value("d", std::size_t{2});
    if (r.d < 1 || r.d > 3) throw RecipeError("recipe dimension must be 1, 2 or 3");
    r.w = parse_field(j.value("w", nlohmann::json(0.0)), r.d, "w");
    r.phi = parse_field(j.value("phi", nlohmann::json(0.0)), r.d, "phi");
    r.a = parse_field(j.value("a", nlohmann::json(0.0)), r.d, "a");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw RecipeError(std::string("malformed recipe: ") + e.what());
  }
}

nlohmann::json recipe_to_json(const FamilyRecipe& r) {
  return {{"name", r.name}, {"d", r.d}, {"w", field_to_json(r.w)}, {"phi", field_to_json(r.phi)},
          {"a", field_to_json(r.a)}};
}

std::vector<FamilyRecipe> default_recipes() {
  std::vector<FamilyRecipe> out;
  {
    FamilyRecipe r{"smooth", 2, {}, {}, {}};
    r.w = {0.1, {}, {mode(0.08, {1, 0}, 0.3), mode(0.05, {0, 1})}};
    r.phi = {0.4, {2.0, 0.0}, {mode(0.12, {0, 1}), mode(0.08, {1, 0}, 0.7)}};
    r.a = {0.0, {0.0, 1.0}, {mode(0.1, {1, 0}, -0.4), mode(0.05, {1, 1})}};
    out.push_back(r);
  }
  {
    FamilyRecipe r{"twisted", 2, {}, {}, {}};
    r.w = {-0.2, {}, {mode(0.08, {1, 1}, 0.2), mode(0.05, {1, -1})}};
    r.phi = {1.1, {0.0, -2.0}, {mode(0.12, {1, 0}, 0.5), mode(0.05, {1, 1})}};
    r.a = {0.3, {1.0, 0.0}, {mode(0.1, {0, 1}), mode(0.05, {1, 1}, 1.3)}};
    out.push_back(r);
  }
  {
    FamilyRecipe r{"linear_phi", 2, {}, {}, {}};
    r.w = {0.4, {}, {}};
    r.phi = {0.0, {2.0, 0.0}, {}};
    out.push_back(r);
  }
  {
    // a separates into a(Q1) + a(Q2), so B vanishes exactly on the grid too
    FamilyRecipe r{"pure_gauge", 2, {}, {}, {}};
    r.w = {0.3, {}, {}};
    r.phi = {-0.6, {}, {}};
    r.a = {0.0, {1.0, 0.0}, {mode(0.05, {1, 0}), mode(0.02, {0, 2}, 0.4)}};
    out.push_back(r);
  }
  return out;
}

TwoLevelFamily build_family(const FamilyRecipe& recipe, const ParamGrid& grid) {
  if (recipe.d != grid.d())
    throw RecipeError("recipe '" + recipe.name + "' has dimension " + std::to_string(recipe.d) +
                      " but the grid has " + std::to_string(grid.d()));
  auto check_slope = [&](const FieldRecipe& f, double period, const char* which) {
    for (std::size_t mu = 0; mu < f.slope.size(); ++mu) {
      const double turns = f.slope[mu] * grid.length(mu) / period;
      if (std::abs(turns - std::round(turns)) > 1e-9)
        throw RecipeError(std::string("slope of '") + which + "' makes Phi non-periodic on the grid");
    }
  };
  if (!recipe.w.slope.empty())
    for (double s : recipe.w.slope)
      if (s != 0.0) throw RecipeError("w cannot carry a linear slope on a periodic grid");
  check_slope(recipe.phi, 4.0 * std::numbers::pi, "phi");
  check_slope(recipe.a, 2.0 * std::numbers::pi, "a");

  TwoLevelFamily f{grid, RealField(grid.size()), RealField(grid.size()), RealField(grid.size())};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto q = grid.coordinates(p);
    f.w[p] = recipe.w(q, grid);
    f.phi[p] = recipe.phi(q, grid);
    f.a[p] = recipe.a(q, grid);
    if (!std::isfinite(f.w[p]) || std::abs(f.w[p]) > 1.0 - 1e-3)
      throw RecipeError("recipe '" + recipe.name + "' violates |w| <= 1 - 1e-3");
  }
  return f;
}

TwoLevelFamily shift_gauge(const TwoLevelFamily& family, const std::vector<double>& theta) {
  if (theta.size() != family.grid.size()) throw RecipeError("gauge shift has the wrong size");
  TwoLevelFamily out = family;
  for (std::size_t p = 0; p < theta.size(); ++p) out.a[p] += theta[p];
  return out;
}

namespace {

template <class T>
std::vector<T> d1_step(const std::vector<T>& f, const ParamGrid& g, std::size_t mu, long m) {
  using S = decltype(std::abs(T{}));
  const S h = static_cast<S>(g.spacing(mu) * static_cast<double>(m));
  std::vector<T> out(f.size());
  for (std::size_t p = 0; p < f.size(); ++p)
    out[p] = (f[g.shifted(p, mu, -2 * m)] - S(8) * f[g.shifted(p, mu, -m)] + S(8) * f[g.shifted(p, mu, m)] -
              f[g.shifted(p, mu, 2 * m)]) /
             (S(12) * h);
  return out;
}

template <class T>
std::vector<T> d2_step(const std::vector<T>& f, const ParamGrid& g, std::size_t mu, long m) {
  using S = decltype(std::abs(T{}));
  const S h = static_cast<S>(g.spacing(mu) * static_cast<double>(m));
  std::vector<T> out(f.size());
  for (std::size_t p = 0; p < f.size(); ++p)
    out[p] = (-f[g.shifted(p, mu, -2 * m)] + S(16) * f[g.shifted(p, mu, -m)] - S(30) * f[p] +
              S(16) * f[g.shifted(p, mu, m)] - f[g.shifted(p, mu, 2 * m)]) /
             (S(12) * h * h);
  return out;
}

template <class T, class Op>
std::vector<T> with_stencil(Op op, const std::vector<T>& f, const ParamGrid& g, std::size_t mu, Stencil s) {
  if (s == Stencil::fourth_order) return op(f, g, mu, 1);
  std::vector<T> fine = op(f, g, mu, 1);
  const std::vector<T> coarse = op(f, g, mu, 2);
  using S = decltype(std::abs(T{}));
  for (std::size_t p = 0; p < fine.size(); ++p) fine[p] = (S(16) * fine[p] - coarse[p]) / S(15);
  return fine;
}

template <class T>
std::vector<T> d1(const std::vector<T>& f, const ParamGrid& g, std::size_t mu, Stencil s) {
  return with_stencil([](const auto&... a) { return d1_step<T>(a...); }, f, g, mu, s);
}

template <class T>
std::vector<T> d2(const std::vector<T>& f, const ParamGrid& g, std::size_t mu, Stencil s) {
  return with_stencil([](const auto&... a) { return d2_step<T>(a...); }, f, g, mu, s);
}

// Two-component field.
struct Spinor {
  ComplexArray c1, c2;
};

Spinor d1(const Spinor& s, const ParamGrid& g, std::size_t mu, Stencil st) {
  return {d1(s.c1, g, mu, st), d1(s.c2, g, mu, st)};
}

Spinor d_mixed(const Spinor& s, const ParamGrid& g, std::size_t nu, std::size_t tau, Stencil st) {
  if (nu == tau) return {d2(s.c1, g, nu, st), d2(s.c2, g, nu, st)};
  return d1(d1(s, g, tau, st), g, nu, st);
}

lcplx braket(const Spinor& a, const Spinor& b, std::size_t p) {
  return std::conj(a.c1[p]) * b.c1[p] + std::conj(a.c2[p]) * b.c2[p];
}

Spinor conditional_state(const TwoLevelFamily& f) {
  const std::size_t n = f.grid.size();
  Spinor s{ComplexArray(n), ComplexArray(n)};
  for (std::size_t p = 0; p < n; ++p) {
    const long double w = f.w[p], phi = f.phi[p], a = f.a[p];
    s.c1[p] = std::polar(std::sqrt(0.5L * (1.0L + w)), a - 0.5L * phi);
    s.c2[p] = std::polar(std::sqrt(0.5L * (1.0L - w)), a + 0.5L * phi);
  }
  return s;
}

std::vector<Spinor> gradients(const Spinor& phi, const ParamGrid& g, Stencil st) {
  std::vector<Spinor> out;
  for (std::size_t mu = 0; mu < g.d(); ++mu) out.push_back(d1(phi, g, mu, st));
  return out;
}

RealField connection_component(const Spinor& phi, const Spinor& dphi) {
  RealField a(phi.c1.size());
  for (std::size_t p = 0; p < a.size(); ++p) a[p] = static_cast<double>(braket(phi, dphi, p).imag());
  return a;
}

class ResidualAccumulator {
 public:
  ResidualAccumulator(std::string name, double dv) : r_{std::move(name), 0.0, 0.0}, dv_(dv) {}
  void add(double v) {
    r_.max = std::max(r_.max, std::abs(v));
    sum_ += v * v;
  }
  Residual result() const {
    Residual r = r_;
    r.l2 = std::sqrt(sum_ * dv_);
    return r;
  }

 private:
  Residual r_;
  double dv_;
  double sum_ = 0.0;
};

}  // namespace

TensorFieldSet tensors(const TwoLevelFamily& family, Stencil st) {
  const ParamGrid& g = family.grid;
  const std::size_t d = g.d(), n = g.size();
  const Spinor phi = conditional_state(family);
  const auto dphi = gradients(phi, g, st);

  TensorFieldSet ts{g, st, {}, {}, {}, {}, {}, {}, {}};
  for (std::size_t mu = 0; mu < d; ++mu) ts.A.push_back(connection_component(phi, dphi[mu]));
  ts.dA.resize(d * d);
  for (std::size_t mu = 0; mu < d; ++mu)
    for (std::size_t nu = 0; nu < d; ++nu) ts.dA[ts.i2(mu, nu)] = d1(ts.A[nu], g, mu, st);
  ts.B.assign(d * d, RealField(n));
  for (std::size_t mu = 0; mu < d; ++mu)
    for (std::size_t nu = 0; nu < d; ++nu)
      for (std::size_t p = 0; p < n; ++p)
        ts.B[ts.i2(mu, nu)][p] = ts.dA[ts.i2(mu, nu)][p] - ts.dA[ts.i2(nu, mu)][p];

  // V_mu = (P_mu - A_mu) Phi
  const lcplx I(0.0L, 1.0L);
  std::vector<Spinor> V(d, Spinor{ComplexArray(n), ComplexArray(n)});
  for (std::size_t mu = 0; mu < d; ++mu)
    for (std::size_t p = 0; p < n; ++p) {
      V[mu].c1[p] = -I * dphi[mu].c1[p] - static_cast<long double>(ts.A[mu][p]) * phi.c1[p];
      V[mu].c2[p] = -I * dphi[mu].c2[p] - static_cast<long double>(ts.A[mu][p]) * phi.c2[p];
    }
  ts.g.assign(d * d, RealField(n));
  for (std::size_t mu = 0; mu < d; ++mu)
    for (std::size_t nu = 0; nu < d; ++nu)
      for (std::size_t p = 0; p < n; ++p) ts.g[ts.i2(mu, nu)][p] = static_cast<double>(braket(V[mu], V[nu], p).real());

  // W_{nu tau} = (P_nu - A_nu) V_tau with a stencil derivative of V_tau
  ts.C.assign(d * d * d, RealField(n));
  ts.D.assign(d * d * d, RealField(n));
  for (std::size_t nu = 0; nu < d; ++nu)
    for (std::size_t tau = 0; tau < d; ++tau) {
      const Spinor dv = d1(V[tau], g, nu, st);
      Spinor W{ComplexArray(n), ComplexArray(n)};
      for (std::size_t p = 0; p < n; ++p) {
        W.c1[p] = -I * dv.c1[p] - static_cast<long double>(ts.A[nu][p]) * V[tau].c1[p];
        W.c2[p] = -I * dv.c2[p] - static_cast<long double>(ts.A[nu][p]) * V[tau].c2[p];
      }
      for (std::size_t mu = 0; mu < d; ++mu)
        for (std::size_t p = 0; p < n; ++p) {
          const lcplx z = braket(V[mu], W, p);
          ts.C[ts.i3(mu, nu, tau)][p] = static_cast<double>(z.real());
          ts.D[ts.i3(mu, nu, tau)][p] = static_cast<double>(z.imag());
        }
    }

  // dg[tau][mu nu] = d_tau g_{mu nu}
  std::vector<std::vector<RealField>> dg(d, std::vector<RealField>(d * d));
  for (std::size_t tau = 0; tau < d; ++tau)
    for (std::size_t k = 0; k < d * d; ++k) dg[tau][k] = d1(ts.g[k], g, tau, st);
  ts.Gamma.assign(d * d * d, RealField(n));
  for (std::size_t mu = 0; mu < d; ++mu)
    for (std::size_t nu = 0; nu < d; ++nu)
      for (std::size_t tau = 0; tau < d; ++tau)
        for (std::size_t p = 0; p < n; ++p)
          ts.Gamma[ts.i3(mu, nu, tau)][p] = 0.5 * dg[tau][ts.i2(mu, nu)][p] +
                                            0.5 * dg[nu][ts.i2(mu, tau)][p] -
                                            0.5 * dg[mu][ts.i2(nu, tau)][p];
  return ts;
}

Residual check_CB_identity(const TensorFieldSet& ts) {
  const std::size_t d = ts.d(), n = ts.grid.size();
  ResidualAccumulator acc("C/B identity", ts.grid.cell_volume());
  for (std::size_t tau = 0; tau < d; ++tau)
    for (std::size_t sigma = 0; sigma < d; ++sigma)
      for (std::size_t mu = 0; mu < d; ++mu) {
        const RealField dB = d1(ts.B[ts.i2(tau, mu)], ts.grid, sigma, ts.stencil);
        for (std::size_t p = 0; p < n; ++p)
          acc.add(ts.C[ts.i3(tau, sigma, mu)][p] - ts.C[ts.i3(mu, sigma, tau)][p] - 0.5 * dB[p]);
      }
  return acc.result();
}

std::vector<Residual> check_decompositions(const TwoLevelFamily& family, const TensorFieldSet& ts) {
  const ParamGrid& g = family.grid;
  const std::size_t d = g.d(), n = g.size();
  const Stencil st = ts.stencil;
  const Spinor phi = conditional_state(family);
  const auto dphi = gradients(phi, g, st);
  const double dv = g.cell_volume();
  ResidualAccumulator r_d("D expanded", dv), r_c("C expanded", dv), r_re("real-part identity", dv);

  // G_{mu nu} = g_{mu nu} + A_mu A_nu and its gradient
  std::vector<RealField> G(d * d, RealField(n));
  for (std::size_t mu = 0; mu < d; ++mu)
    for (std::size_t nu = 0; nu < d; ++nu)
      for (std::size_t p = 0; p < n; ++p)
        G[ts.i2(mu, nu)][p] = ts.g[ts.i2(mu, nu)][p] + ts.A[mu][p] * ts.A[nu][p];
  std::vector<std::vector<RealField>> dG(d, std::vector<RealField>(d * d));
  for (std::size_t s = 0; s < d; ++s)
    for (std::size_t k = 0; k < d * d; ++k) dG[s][k] = d1(G[k], g, s, st);

  for (std::size_t nu = 0; nu < d; ++nu)
    for (std::size_t tau = 0; tau < d; ++tau) {
      const Spinor ddphi = d_mixed(phi, g, nu, tau, st);
      for (std::size_t mu = 0; mu < d; ++mu) {
        const auto& A = ts.A;
        for (std::size_t p = 0; p < n; ++p) {
          const lcplx p3 = braket(dphi[mu], ddphi, p);
          const double d_expanded = -p3.real() - 0.5 * ts.B[ts.i2(mu, nu)][p] * A[tau][p] -
                                    0.5 * ts.B[ts.i2(mu, tau)][p] * A[nu][p] +
                                    0.5 * A[mu][p] * ts.dA[ts.i2(nu, tau)][p] +
                                    0.5 * A[mu][p] * ts.dA[ts.i2(tau, nu)][p];
          const double c_expanded = p3.imag() - A[mu][p] * ts.g[ts.i2(nu, tau)][p] -
                                    A[nu][p] * ts.g[ts.i2(mu, tau)][p] -
                                    A[tau][p] * ts.g[ts.i2(mu, nu)][p] - A[mu][p] * A[nu][p] * A[tau][p];
          const double re_rhs = dG[tau][ts.i2(mu, nu)][p] + dG[nu][ts.i2(mu, tau)][p] -
                                dG[mu][ts.i2(nu, tau)][p];
          r_d.add(ts.D[ts.i3(mu, nu, tau)][p] - d_expanded);
          r_c.add(ts.C[ts.i3(mu, nu, tau)][p] - c_expanded);
          r_re.add(2.0 * p3.real() - re_rhs);
        }
      }
    }
  return {r_d.result(), r_c.result(), r_re.result()};
}

Residual check_christoffel(const TensorFieldSet& ts) {
  ResidualAccumulator acc("D = -Gamma", ts.grid.cell_volume());
  for (std::size_t k = 0; k < ts.D.size(); ++k)
    for (std::size_t p = 0; p < ts.grid.size(); ++p) acc.add(ts.D[k][p] + ts.Gamma[k][p]);
  return acc.result();
}

std::vector<Residual> check_symmetries(const TensorFieldSet& ts) {
  const std::size_t d = ts.d(), n = ts.grid.size();
  const double dv = ts.grid.cell_volume();
  ResidualAccumulator rg("g symmetry", dv), rc("C symmetry", dv), rd("D symmetry", dv);
  for (std::size_t mu = 0; mu < d; ++mu)
    for (std::size_t nu = 0; nu < d; ++nu) {
      for (std::size_t p = 0; p < n; ++p) rg.add(ts.g[ts.i2(mu, nu)][p] - ts.g[ts.i2(nu, mu)][p]);
      for (std::size_t tau = 0; tau < d; ++tau)
        for (std::size_t p = 0; p < n; ++p) {
          rc.add(ts.C[ts.i3(mu, nu, tau)][p] - ts.C[ts.i3(mu, tau, nu)][p]);
          rd.add(ts.D[ts.i3(mu, nu, tau)][p] - ts.D[ts.i3(mu, tau, nu)][p]);
        }
    }
  return {rg.result(), rc.result(), rd.result()};
}

double min_metric_eigenvalue(const TensorFieldSet& ts) {
  const std::size_t d = ts.d();
  double lowest = INFINITY;
  Eigen::MatrixXd m(d, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  for (std::size_t p = 0; p < ts.grid.size(); ++p) {
    for (std::size_t mu = 0; mu < d; ++mu)
      for (std::size_t nu = 0; nu < d; ++nu)
        m(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(nu)) = ts.g[ts.i2(mu, nu)][p];
    solver.compute(m, Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, solver.eigenvalues().minCoeff());
  }
  return lowest;
}

std::vector<Residual> identity_residuals(const TwoLevelFamily& family, Stencil stencil) {
  const TensorFieldSet ts = tensors(family, stencil);
  std::vector<Residual> out = check_decompositions(family, ts);
  out.push_back(check_christoffel(ts));
  out.push_back(check_CB_identity(ts));
  for (Residual& r : check_symmetries(ts)) out.push_back(std::move(r));
  return out;
}

RecipeReport run_recipe(const FamilyRecipe& recipe, const SuiteOptions& opts) {
  if (opts.refinement.size() < 3) throw ConfigError("convergence study needs at least three grids");
  RecipeReport rep;
  rep.recipe = recipe;
  {
    const auto family = build_family(recipe, ParamGrid::cube(recipe.d, opts.reference_points));
    const TensorFieldSet ts = tensors(family, opts.stencil);
    rep.at_reference = check_decompositions(family, ts);
    rep.at_reference.push_back(check_christoffel(ts));
    rep.at_reference.push_back(check_CB_identity(ts));
    for (Residual& r : check_symmetries(ts)) rep.at_reference.push_back(std::move(r));
    rep.min_eigenvalue = min_metric_eigenvalue(ts);
  }
  std::map<std::string, Convergence> conv;
  std::vector<std::string> order;
  for (std::size_t n : opts.refinement) {
    for (const Residual& r : identity_residuals(build_family(recipe, ParamGrid::cube(recipe.d, n)), opts.stencil)) {
      if (!conv.count(r.name)) {
        conv[r.name].name = r.name;
        order.push_back(r.name);
      }
      conv[r.name].points.push_back(n);
      conv[r.name].max_residual.push_back(r.max);
    }
  }
  bool pass = rep.min_eigenvalue >= -1e-10;
  for (const Residual& r : rep.at_reference) pass = pass && r.max <= opts.tolerance;
  for (const std::string& name : order) {
    Convergence c = conv[name];
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      if (c.max_residual[i] <= opts.exact_floor) continue;
      const double x = std::log(2.0 * std::numbers::pi / static_cast<double>(c.points[i]));
      const double y = std::log(c.max_residual[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      m += 1;
    }
    if (m >= 2) c.order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    // With fewer than three levels above the floor the residual has already
    // reached roundoff and there is no slope to hold it to.
    if (m >= 3) pass = pass && *c.order >= opts.min_order;
    rep.convergence.push_back(std::move(c));
  }
  rep.pass = pass;
  return rep;
}

nlohmann::json to_json(const RecipeReport& report) {
  nlohmann::json j;
  j["recipe"] = recipe_to_json(report.recipe);
  j["pass"] = report.pass;
  j["min_metric_eigenvalue"] = report.min_eigenvalue;
  j["residuals"] = nlohmann::json::array();
  for (const Residual& r : report.at_reference)
    j["residuals"].push_back({{"name", r.name}, {"max", r.max}, {"l2", r.l2}});
  j["convergence"] = nlohmann::json::array();
  for (const Convergence& c : report.convergence) {
    nlohmann::json e{{"name", c.name}, {"points", c.points}, {"max_residual", c.max_residual}};
    e["order"] = c.order ? nlohmann::json(*c.order) : nlohmann::json(nullptr);
    j["convergence"].push_back(std::move(e));
  }
  return j;
}

}  // namespace efgeo::geometry
