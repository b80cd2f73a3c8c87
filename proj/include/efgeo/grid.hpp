#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "efgeo/errors.hpp"

namespace efgeo {

using cplx = std::complex<double>;
using lcplx = std::complex<long double>;

// Uniform periodic grid: point i sits at x_min + i*dx, i = 0..n-1, and
// dx = (x_max - x_min)/n, so x_max itself is the periodic image of x_min.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t n() const { return n_; }
  double dx() const { return (x_max_ - x_min_) / static_cast<double>(n_); }
  double length() const { return x_max_ - x_min_; }
  double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx(); }
  std::vector<double> points() const;

  // Angular wavenumber of FFT bin j in standard FFTW ordering.
  double wavenumber(std::size_t j) const;

  bool operator==(const Grid1D&) const = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
};

template <class T>
class Field {
 public:
  explicit Field(const Grid1D& grid) : grid_(grid), values_(grid.n(), T{}) {}
  Field(const Grid1D& grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n()) throw InvalidField("field length does not match grid");
  }
  template <class F>
  static Field from_function(const Grid1D& grid, F&& f) {
    Field out(grid);
    for (std::size_t i = 0; i < grid.n(); ++i) out.values_[i] = f(grid.x(i));
    return out;
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  const std::vector<T>& data() const { return values_; }
  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  Field& operator*=(T s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, T s) { return a *= s; }
  friend Field operator*(T s, Field a) { return a *= s; }

 private:
  void check_same(const Field& o) const {
    if (!(o.grid_ == grid_)) throw InvalidField("fields live on different grids");
  }

  Grid1D grid_;
  std::vector<T> values_;
};

using ScalarField = Field<double>;
using ComplexField = Field<cplx>;

enum class DerivativeMethod { spectral, fd4 };
enum class CumulativeMethod { trapezoid, fourth_order, spectral };

// Pointwise derivative of order 1..3. Spectral requires an even n and a field
// that is periodic on the domain (or decayed at both edges).
ComplexField derivative(const ComplexField& f, int order = 1,
                        DerivativeMethod method = DerivativeMethod::spectral);
ScalarField derivative(const ScalarField& f, int order = 1,
                       DerivativeMethod method = DerivativeMethod::spectral);

// Spectral derivatives of orders 1..max_order from a single forward transform.
std::vector<ComplexField> spectral_derivatives(const ComplexField& f, int max_order);

// Same, with the transforms carried out in long double. Worth it when the
// derivatives are later divided by amplitudes far below the field maximum.
std::vector<std::vector<lcplx>> spectral_derivatives_extended(const ComplexField& f, int max_order);

// Periodic rectangle rule sum f_i dx.
double integrate(const ScalarField& f);
double integrate(std::span<const double> f, double dx);

// F(x) = integral of f from x_ref to x; F(x_ref) = 0. The spectral method
// treats f as periodic (exact for band-limited f); the others are local.
ScalarField cumulative_integral(const ScalarField& f, double x_ref,
                                CumulativeMethod method = CumulativeMethod::fourth_order);

// Largest |f| over the first and last `edge` points relative to max|f|.
double edge_ratio(std::span<const double> magnitude, std::size_t edge = 2);

void require_finite(const ScalarField& f, const char* what);
void require_finite(const ComplexField& f, const char* what);

}  // namespace efgeo
