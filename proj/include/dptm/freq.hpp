#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dptm/grid.hpp"

namespace dptm {

/// 2-D discrete spectrum of a Grid in the unshifted FFT layout (bin (0,0) is DC).
struct Spectrum {
  std::size_t side = 0;
  std::vector<std::complex<double>> bins;

  std::complex<double>& operator()(std::size_t r, std::size_t c) { return bins[r * side + c]; }
  const std::complex<double>& operator()(std::size_t r, std::size_t c) const {
    return bins[r * side + c];
  }
};

/// Signed frequency of unshifted bin `k` on an axis of length `side`: 0..side/2-1, then -side/2..-1.
int centered_frequency(std::size_t k, std::size_t side);

/// Binary low-pass mask. A bin passes iff its centered radial frequency
/// sqrt(fx^2 + fy^2) <= radius. The mask is conjugate-symmetric by
/// construction, so band-limited outputs of real grids are real.
class FrequencyMask {
 public:
  /// Negative radius gives the empty mask; radius >= side*sqrt(2)/2 passes every bin.
  FrequencyMask(std::size_t side, double radius);

  static FrequencyMask all_pass(std::size_t side);
  static FrequencyMask empty(std::size_t side);

  std::size_t side() const { return side_; }
  double radius() const { return radius_; }
  bool passes(std::size_t r, std::size_t c) const { return bits_[r * side_ + c] != 0; }
  std::size_t pass_count() const;
  bool conjugate_symmetric() const;

  /// Largest meaningful radius for a side: the corner bin distance.
  static double max_radius(std::size_t side);

 private:
  std::size_t side_;
  double radius_;
  std::vector<std::uint8_t> bits_;
};

Spectrum fft2(const Grid& x);

/// Real part of the inverse transform. When `imag_residual` is non-null it
/// receives max|imag| / max(max|real|, 1e-300).
Grid ifft2_real(const Spectrum& s, double* imag_residual = nullptr);

/// IFFT(FFT(x) * H)
Grid low_band(const Grid& x, const FrequencyMask& mask, double* imag_residual = nullptr);
/// IFFT(FFT(x) * (1 - H))
Grid high_band(const Grid& x, const FrequencyMask& mask, double* imag_residual = nullptr);
/// IFFT(H * FFT(low_source) + (1 - H) * FFT(high_source))
Grid mix_bands(const Grid& low_source, const Grid& high_source, const FrequencyMask& mask,
               double* imag_residual = nullptr);

/// Sum of |bin|^2 over bins where the mask passes (inside = true) or blocks it.
double band_energy(const Spectrum& s, const FrequencyMask& mask, bool inside);

}  // namespace dptm
