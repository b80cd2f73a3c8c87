#pragma once

// Rank-2 and rank-3 geometric tensors of a two-level conditional state
// Phi(Q) = e^{ia} (e^{-i phi/2} sqrt((1+w)/2), e^{i phi/2} sqrt((1-w)/2)) over a
// periodic d-dimensional parameter grid, and residuals of the identities that
// relate them. All derivatives are fourth-order periodic central stencils.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "efgeo/errors.hpp"

namespace efgeo::geometry {

// Periodic box [0, length_mu) sampled with shape_mu points per axis; axis 0 is
// the slowest-varying index of the flat storage.
class ParamGrid {
 public:
  ParamGrid(std::vector<std::size_t> shape, std::vector<double> length);
  // d axes of n points over [0, 2 pi).
  static ParamGrid cube(std::size_t d, std::size_t n);

  std::size_t d() const { return shape_.size(); }
  std::size_t size() const { return size_; }
  std::size_t shape(std::size_t mu) const { return shape_[mu]; }
  double length(std::size_t mu) const { return length_[mu]; }
  double spacing(std::size_t mu) const { return length_[mu] / static_cast<double>(shape_[mu]); }
  double cell_volume() const;
  std::vector<double> coordinates(std::size_t p) const;
  // Flat index of the neighbour `offset` steps along axis mu, with wrap.
  std::size_t shifted(std::size_t p, std::size_t mu, long offset) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> length_;
  std::vector<std::size_t> stride_;
  std::size_t size_;
};

struct FourierTerm {
  double amplitude = 0.0;
  std::vector<int> k;  // integer wavenumbers: cos(sum_mu 2 pi k_mu Q_mu / L_mu + phase)
  double phase = 0.0;
};

// constant + slope . Q + sum of Fourier terms.
struct FieldRecipe {
  double constant = 0.0;
  std::vector<double> slope;
  std::vector<FourierTerm> modes;

  double operator()(const std::vector<double>& Q, const ParamGrid& grid) const;
};

struct FamilyRecipe {
  std::string name;
  std::size_t d = 2;
  FieldRecipe w, phi, a;
};

FamilyRecipe parse_recipe(const nlohmann::json& j);
nlohmann::json recipe_to_json(const FamilyRecipe& r);
// Built-in d=2 recipes: two generic smooth families, a linear-phi family and a
// pure-gauge family.
std::vector<FamilyRecipe> default_recipes();

struct TwoLevelFamily {
  ParamGrid grid;
  std::vector<double> w, phi, a;
};

// Throws RecipeError if |w| exceeds 1 - 1e-3 anywhere or if a linear slope
// makes Phi non-periodic on the box.
TwoLevelFamily build_family(const FamilyRecipe& recipe, const ParamGrid& grid);
// Same family with a -> a + theta.
TwoLevelFamily shift_gauge(const TwoLevelFamily& family, const std::vector<double>& theta);

using RealField = std::vector<double>;

// fourth_order: 5-point central stencils. richardson: (16 D_h - D_2h) / 15 of
// the same stencils, sixth order.
enum class Stencil { fourth_order, richardson };

struct TensorFieldSet {
  ParamGrid grid;
  Stencil stencil = Stencil::fourth_order;
  std::vector<RealField> A;      // A_mu
  std::vector<RealField> dA;     // d_mu A_nu at [mu d + nu]
  std::vector<RealField> B;      // d_mu A_nu - d_nu A_mu
  std::vector<RealField> g;      // Re<(P_mu - A_mu)Phi|(P_nu - A_nu)Phi>
  std::vector<RealField> C;      // [(mu d + nu) d + tau]
  std::vector<RealField> D;
  std::vector<RealField> Gamma;  // 1/2 d_tau g_{mu nu} + 1/2 d_nu g_{mu tau} - 1/2 d_mu g_{nu tau}

  std::size_t d() const { return grid.d(); }
  std::size_t i2(std::size_t mu, std::size_t nu) const { return mu * d() + nu; }
  std::size_t i3(std::size_t mu, std::size_t nu, std::size_t tau) const {
    return (mu * d() + nu) * d() + tau;
  }
};

// g, C, D from their definitions: (P - A) is applied twice by literal
// composition, the outer derivative being a stencil on the field (P - A)Phi.
TensorFieldSet tensors(const TwoLevelFamily& family, Stencil stencil = Stencil::fourth_order);

struct Residual {
  std::string name;
  double max = 0.0;
  double l2 = 0.0;  // sqrt(sum r^2 dV) over grid points and index tuples
};

// C_{tau sigma mu} - C_{mu sigma tau} - 1/2 d_sigma B_{tau mu}.
Residual check_CB_identity(const TensorFieldSet& ts);
// D from the definition against the expanded form with Re<d_mu Phi|d_nu d_tau Phi>;
// C likewise with the Im part; and the real-part identity for
// 2 Re<d_mu Phi|d_nu d_tau Phi>.
std::vector<Residual> check_decompositions(const TwoLevelFamily& family, const TensorFieldSet& ts);
// D + Gamma.
Residual check_christoffel(const TensorFieldSet& ts);
// g_{mu nu} - g_{nu mu}, C_{mu nu tau} - C_{mu tau nu}, D likewise.
std::vector<Residual> check_symmetries(const TensorFieldSet& ts);
// Smallest eigenvalue of g over the grid.
double min_metric_eigenvalue(const TensorFieldSet& ts);

// All of the above for one family.
std::vector<Residual> identity_residuals(const TwoLevelFamily& family,
                                         Stencil stencil = Stencil::fourth_order);

struct Convergence {
  std::string name;
  std::vector<std::size_t> points;  // per axis
  std::vector<double> max_residual;
  std::optional<double> order;      // least-squares slope of log r against log h over levels above
                                    // the roundoff floor; none if exact
};

struct RecipeReport {
  FamilyRecipe recipe;
  std::vector<Residual> at_reference;  // residuals on the reference grid
  std::vector<Convergence> convergence;
  double min_eigenvalue = 0.0;
  bool pass = false;
};

struct SuiteOptions {
  std::size_t reference_points = 64;
  std::vector<std::size_t> refinement = {32, 64, 128, 256};
  double tolerance = 1e-6;
  double min_order = 3.5;
  // Levels below this are roundoff; a residual below it everywhere counts as exact.
  double exact_floor = 1e-10;
  // Plain fourth-order stencils reach 1e-6 on a 64^2 grid only for very weak
  // families, so the suite extrapolates by default.
  Stencil stencil = Stencil::richardson;
};

RecipeReport run_recipe(const FamilyRecipe& recipe, const SuiteOptions& opts = {});
nlohmann::json to_json(const RecipeReport& report);

}  // namespace efgeo::geometry
