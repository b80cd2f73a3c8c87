#pragma once

#include <complex>
#include <span>

namespace efgeo::detail {

// Unnormalized complex DFTs backed by cached FFTW plans. Safe to call from
// several threads; plan creation is serialized internally.
void fft_forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void fft_backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
void fft_forward(std::span<const std::complex<long double>> in,
                 std::span<std::complex<long double>> out);
void fft_backward(std::span<const std::complex<long double>> in,
                  std::span<std::complex<long double>> out);

}  // namespace efgeo::detail
