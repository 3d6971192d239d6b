#include "detail/fft.hpp"

#include <fftw3.h>

#include <functional>
#include <mutex>
#include <numeric>

namespace fraclap::detail {

namespace {

// FFTW planning is not thread safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t product(std::span<const int> d) {
  return std::accumulate(d.begin(), d.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

HalfSpectrum forward_padded(std::span<const double> values, std::span<const int> dims, int pad) {
  const int n = static_cast<int>(dims.size());
  HalfSpectrum out;
  out.dims.resize(n);
  for (int a = 0; a < n; ++a) out.dims[a] = dims[a] * pad;

  const std::size_t total = product(out.dims);
  double* in = fftw_alloc_real(total);
  std::fill(in, in + total, 0.0);

  // Scatter the input block into the lower corner of the padded array.
  std::vector<int> idx(n, 0);
  for (std::size_t f = 0; f < values.size(); ++f) {
    std::size_t rem = f, dst = 0;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % dims[a]);
      rem /= dims[a];
    }
    for (int a = 0; a < n; ++a) dst = dst * out.dims[a] + idx[a];
    in[dst] = values[f];
  }

  const std::size_t nout = total / out.dims.back() * out.half_last();
  fftw_complex* spec = fftw_alloc_complex(nout);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c(n, out.dims.data(), in, spec, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  out.data.resize(nout);
  for (std::size_t i = 0; i < nout; ++i) out.data[i] = {spec[i][0], spec[i][1]};
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(spec);
  return out;
}

std::vector<double> inverse_cropped(const HalfSpectrum& spec, std::span<const int> out_dims) {
  const int n = static_cast<int>(spec.dims.size());
  const std::size_t total = product(spec.dims);
  fftw_complex* in = fftw_alloc_complex(spec.data.size());
  for (std::size_t i = 0; i < spec.data.size(); ++i) {
    in[i][0] = spec.data[i].real();
    in[i][1] = spec.data[i].imag();
  }
  double* real = fftw_alloc_real(total);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r(n, spec.dims.data(), in, real, FFTW_ESTIMATE);
  }
  fftw_execute(plan);

  std::vector<double> out(product(out_dims));
  std::vector<int> idx(n, 0);
  for (std::size_t f = 0; f < out.size(); ++f) {
    std::size_t rem = f, src = 0;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % out_dims[a]);
      rem /= out_dims[a];
    }
    for (int a = 0; a < n; ++a) src = src * spec.dims[a] + idx[a];
    out[f] = real[src];
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(real);
  return out;
}

void sine_transform(std::vector<double>& data, std::span<const int> dims) {
  const int n = static_cast<int>(dims.size());
  std::vector<fftw_r2r_kind> kinds(n, FFTW_RODFT00);
  std::vector<int> d(dims.begin(), dims.end());
  double* buf = fftw_alloc_real(data.size());
  std::copy(data.begin(), data.end(), buf);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_r2r(n, d.data(), buf, buf, kinds.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::copy(buf, buf + data.size(), data.begin());
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

}  // namespace fraclap::detail
