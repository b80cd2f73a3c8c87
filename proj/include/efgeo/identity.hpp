#pragma once

// Both sides of the rate equation for the geometric kinetic energy T_geo of
// the two-level model, and a pointwise check of the underlying equation for
// the geometric energy density E_geo = I g / 2.

#include <array>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "efgeo/ef.hpp"
#include "efgeo/errors.hpp"
#include "efgeo/grid.hpp"
#include "efgeo/model.hpp"

namespace efgeo::identity {

// The printed model form weights T2 and T4 by 1 (reading A); the general
// result specialised to one dimension weights them by |chi|^2 (reading B).
enum class Reading { A, B };
inline constexpr std::array<Reading, 2> kReadings{Reading::A, Reading::B};
const char* name(Reading r);

// T1 = -I int Im<Phi|H'|Phi'> |chi|^2
// T2 = +I int A <Phi|H'|Phi> w
// T3 = -I^2/2 int (C |chi|^2)'
// T4 = -I^2 int g A' w
// with w = 1 (A) or |chi|^2 (B) and H' the x-derivative of the potential matrix.
struct RhsTerms {
  double T1 = 0.0, T2 = 0.0, T3 = 0.0, T4 = 0.0;
  double total() const { return T1 + T2 + T3 + T4; }
};

// Deliberate corruption of the right-hand side, for checking that the
// verification can fail.
struct Mutation {
  std::array<double, 4> sign{1.0, 1.0, 1.0, 1.0};
  bool drop_T1_weight = false;
  bool active() const;
};

RhsTerms rhs_terms(const model::ModelParams& p, const Grid1D& g, double t, Reading reading,
                   const Mutation& mutation = {}, const ef::DecomposeOptions& opts = {});

// The general identity in one dimension with constant inverse inertia:
//   force = -int |chi|^2 I Re<Phi|H'|(P - A)Phi>
//   curvature = -1/4 int I dB I |chi|^2'  (B vanishes identically in 1D)
//   flow = -int |chi|^2 I g (J/|chi|^2)'
struct GeneralTerms {
  double force = 0.0, curvature = 0.0, flow = 0.0;
  double total() const { return force + curvature + flow; }
};

GeneralTerms general_terms(const model::ModelParams& p, const Grid1D& g, double t,
                           const ef::DecomposeOptions& opts = {});

std::vector<double> t_geo_series(const model::ModelParams& p, const Grid1D& g,
                                 const std::vector<double>& times, const ef::DecomposeOptions& opts = {});

// Fourth-order differences of a uniformly sampled series: central inside,
// one-sided at the two points next to each end.
std::vector<double> lhs_rate(const std::vector<double>& series, double dt);

// dT_geo/dt at t from five T_geo samples dt apart: centred, or forward when
// t - 2 dt would precede t_min.
double lhs_at(const model::ModelParams& p, const Grid1D& g, double t, double dt, double t_min = 0.0,
              const ef::DecomposeOptions& opts = {});

struct PointwiseReport {
  double t = 0.0;
  double dt = 0.0;
  double max_residual = 0.0;  // over points on every mask involved
  double max_rate = 0.0;      // max |dE_geo/dt| over the same points
  std::vector<double> x, rate, rhs;  // masked points only
  double relative() const { return max_rate > 0.0 ? max_residual / max_rate : max_residual; }
};

// dE_geo/dt by central time differences of I g / 2 against
//   -I Re<Phi|H'|(P - A)Phi> - I^2 C'/2 - I^2 C |chi|^2' / (2 |chi|^2)
//   - (J/|chi|^2) E_geo' - I^2 g A'.
PointwiseReport pointwise_dEgeo_check(const model::ModelParams& p, const Grid1D& g, double t,
                                      double dt = 1e-5, const ef::DecomposeOptions& opts = {});

struct VerifyOptions {
  double t_start = 0.0;
  double t_end = 10.0;
  std::size_t samples = 101;
  double dt = 1e-4;  // step of the lhs differences
  double tolerance = 1e-3;
  Mutation mutation;
  ef::DecomposeOptions decompose;
};

struct IdentityReport {
  std::vector<double> times;
  std::vector<double> t_geo;
  std::vector<double> lhs;
  std::array<std::vector<RhsTerms>, 2> terms;  // indexed by reading
  std::array<std::vector<double>, 2> rhs;
  std::array<std::vector<double>, 2> residual;  // |lhs - rhs|
  std::array<double, 2> relative{};            // max residual / max |lhs|
  Reading winner = Reading::B;
  double tolerance = 0.0;
  bool mutated = false;
  bool pass = false;

  double relative_of(Reading r) const { return relative[static_cast<std::size_t>(r)]; }
};

class VerificationFailure : public Error {
 public:
  VerificationFailure(const std::string& what, IdentityReport report)
      : Error(what), report_(std::move(report)) {}
  const IdentityReport& report() const { return report_; }

 private:
  IdentityReport report_;
};

// Evaluates both readings over the sampled range. Throws VerificationFailure
// when neither reading meets the tolerance; evaluate() returns the report
// either way.
IdentityReport evaluate(const model::ModelParams& p, const Grid1D& g, const VerifyOptions& opts);
IdentityReport verify(const model::ModelParams& p, const Grid1D& g, const VerifyOptions& opts);

// The same evaluation on the grid with twice the points and half the lhs step.
struct Adjudication {
  IdentityReport base;
  IdentityReport refined;
  std::array<double, 2> reduction{};  // base relative / refined relative, per reading
  Reading winner = Reading::B;
  bool converges = false;  // the winner meets the tolerance and drops by min_reduction
};

Adjudication adjudicate(const model::ModelParams& p, const Grid1D& g, const VerifyOptions& opts,
                        double min_reduction = 8.0);

nlohmann::json to_json(const IdentityReport& r);
nlohmann::json to_json(const Adjudication& a);
nlohmann::json to_json(const PointwiseReport& r);
// Columns t, T_geo, lhs, then per reading T1..T4, rhs and residual.
void write_csv(std::ostream& out, const IdentityReport& r);

}  // namespace efgeo::identity
