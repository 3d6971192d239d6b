#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fraclap::detail {

/// Half-complex spectrum (last axis truncated to M/2+1) of a real array that
/// was zero-padded to `dims` = pad * input dims.
struct HalfSpectrum {
  std::vector<int> dims;
  std::vector<std::complex<double>> data;

  int half_last() const { return dims.back() / 2 + 1; }
  /// Signed frequency index of position q along an axis of length M.
  static int signed_index(int q, int M) { return q <= M / 2 ? q : q - M; }
  /// Number of full-spectrum modes a half-spectrum entry on the last axis stands for.
  int multiplicity(int q_last) const {
    const int M = dims.back();
    return (q_last == 0 || (M % 2 == 0 && q_last == M / 2)) ? 1 : 2;
  }
};

HalfSpectrum forward_padded(std::span<const double> values, std::span<const int> dims, int pad);

/// Unnormalized inverse of a half spectrum, cropped to the leading `out_dims` block.
std::vector<double> inverse_cropped(const HalfSpectrum& spec, std::span<const int> out_dims);

/// In-place separable RODFT00 (FFTW convention: Y_k = 2 sum_j X_j sin(pi (j+1)(k+1)/(L+1))).
void sine_transform(std::vector<double>& data, std::span<const int> dims);

}  // namespace fraclap::detail
