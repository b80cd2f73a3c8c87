#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace efgeo::detail {
namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// FFTW's double and long double interfaces differ only by prefix.
struct DoubleApi {
  using real = double;
  using complex = fftw_complex;
  using plan = fftw_plan;
  static plan make(int n, int sign) {
    auto* a = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* b = fftw_alloc_complex(static_cast<std::size_t>(n));
    plan p = fftw_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    return p;
  }
  static void execute(plan p, complex* in, complex* out) { fftw_execute_dft(p, in, out); }
};

struct LongDoubleApi {
  using real = long double;
  using complex = fftwl_complex;
  using plan = fftwl_plan;
  static plan make(int n, int sign) {
    auto* a = fftwl_alloc_complex(static_cast<std::size_t>(n));
    auto* b = fftwl_alloc_complex(static_cast<std::size_t>(n));
    plan p = fftwl_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftwl_free(a);
    fftwl_free(b);
    return p;
  }
  static void execute(plan p, complex* in, complex* out) { fftwl_execute_dft(p, in, out); }
};

template <class Api>
typename Api::plan cached_plan(int n, int sign) {
  static std::map<std::pair<int, int>, typename Api::plan> plans;
  std::lock_guard lock(plan_mutex());
  auto key = std::make_pair(n, sign);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  auto p = Api::make(n, sign);
  plans.emplace(key, p);
  return p;
}

template <class Api>
void run(std::span<const std::complex<typename Api::real>> in,
         std::span<std::complex<typename Api::real>> out, int sign) {
  using value = std::complex<typename Api::real>;
  using raw = typename Api::complex;
  auto p = cached_plan<Api>(static_cast<int>(in.size()), sign);
  // new-array execute is thread safe; FFTW does not write to `in` for out-of-place plans
  auto* src = reinterpret_cast<raw*>(const_cast<value*>(in.data()));
  auto* dst = reinterpret_cast<raw*>(out.data());
  if (src == dst) {
    std::vector<value> tmp(in.begin(), in.end());
    Api::execute(p, reinterpret_cast<raw*>(tmp.data()), dst);
  } else {
    Api::execute(p, src, dst);
  }
}

}  // namespace

void fft_forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run<DoubleApi>(in, out, FFTW_FORWARD);
}

void fft_backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run<DoubleApi>(in, out, FFTW_BACKWARD);
}

void fft_forward(std::span<const std::complex<long double>> in,
                 std::span<std::complex<long double>> out) {
  run<LongDoubleApi>(in, out, FFTW_FORWARD);
}

void fft_backward(std::span<const std::complex<long double>> in,
                  std::span<std::complex<long double>> out) {
  run<LongDoubleApi>(in, out, FFTW_BACKWARD);
}

}  // namespace efgeo::detail
