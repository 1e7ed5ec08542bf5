#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dptm/errors.hpp"
#include "dptm/freq.hpp"
#include "dptm/rng.hpp"

using namespace dptm;

namespace {

// O(n^4) direct DFT.
Spectrum naive_dft(const Grid& x) {
  const std::size_t n = x.side();
  Spectrum s{n, std::vector<std::complex<double>>(n * n)};
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
          const double ang = -2.0 * std::numbers::pi * static_cast<double>(u * r + v * c) / n;
          acc += x(r, c) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
      s(u, v) = acc;
    }
  return s;
}

}  // namespace

TEST(Freq, CenteredFrequency) {
  EXPECT_EQ(centered_frequency(0, 8), 0);
  EXPECT_EQ(centered_frequency(3, 8), 3);
  EXPECT_EQ(centered_frequency(4, 8), -4);
  EXPECT_EQ(centered_frequency(7, 8), -1);
}

TEST(Freq, FftMatchesDirectDft) {
  Rng rng = make_rng(11, "dft");
  for (std::size_t n : {2u, 4u, 6u, 8u}) {
    const Grid x = gaussian_grid(n, rng);
    const Spectrum a = fft2(x);
    const Spectrum b = naive_dft(x);
    for (std::size_t k = 0; k < n * n; ++k) EXPECT_LT(std::abs(a.bins[k] - b.bins[k]), 1e-11);
  }
}

TEST(Freq, InverseRoundTrip) {
  Rng rng = make_rng(12, "ifft");
  const Grid x = gaussian_grid(16, rng);
  double imag = 1.0;
  const Grid y = ifft2_real(fft2(x), &imag);
  EXPECT_LT(max_abs_diff(x, y), 1e-13);
  EXPECT_LT(imag, 1e-14);
}

TEST(Freq, MaskRadiusSemantics) {
  const FrequencyMask m(16, 2.0);
  // bins with fx^2 + fy^2 <= 4: (0,0), 4 at distance 1, 4 at sqrt2, 4 at 2
  EXPECT_EQ(m.pass_count(), 13u);
  EXPECT_TRUE(m.passes(0, 0));
  EXPECT_TRUE(m.passes(0, 2));
  EXPECT_TRUE(m.passes(14, 0));
  EXPECT_FALSE(m.passes(2, 2));
  EXPECT_TRUE(m.conjugate_symmetric());

  EXPECT_EQ(FrequencyMask(16, -1.0).pass_count(), 0u);
  EXPECT_EQ(FrequencyMask::empty(16).pass_count(), 0u);
  EXPECT_EQ(FrequencyMask(16, 0.0).pass_count(), 1u);
  EXPECT_EQ(FrequencyMask::all_pass(16).pass_count(), 256u);
  EXPECT_EQ(FrequencyMask(16, FrequencyMask::max_radius(16)).pass_count(), 256u);
  EXPECT_THROW(FrequencyMask(16, std::nan("")), ConfigError);
  EXPECT_THROW(FrequencyMask(5, 1.0), DimensionError);
}

TEST(Freq, MasksAreConjugateSymmetricForAllRadii) {
  for (std::size_t n : {2u, 4u, 8u, 16u})
    for (double r = -0.5; r < 12.0; r += 0.25) EXPECT_TRUE(FrequencyMask(n, r).conjugate_symmetric());
}

TEST(Freq, BandsPartitionTheInput) {
  Rng rng = make_rng(13, "bands");
  for (int k = 0; k < 20; ++k) {
    const Grid x = gaussian_grid(16, rng);
    const FrequencyMask m(16, 0.5 * k);
    double il = 0, ih = 0;
    const Grid lo = low_band(x, m, &il);
    const Grid hi = high_band(x, m, &ih);
    EXPECT_LT(max_abs_diff(lo + hi, x), 1e-12);
    EXPECT_LT(il, 1e-12);
    EXPECT_LT(ih, 1e-12);
  }
}

TEST(Freq, MixExtremes) {
  Rng rng = make_rng(14, "mix");
  const Grid a = gaussian_grid(8, rng);
  const Grid b = gaussian_grid(8, rng);
  EXPECT_LT(max_abs_diff(mix_bands(a, b, FrequencyMask::all_pass(8)), a), 1e-13);
  EXPECT_LT(max_abs_diff(mix_bands(a, b, FrequencyMask::empty(8)), b), 1e-13);
  const FrequencyMask m(8, 1.5);
  EXPECT_LT(max_abs_diff(mix_bands(a, b, m), low_band(a, m) + high_band(b, m)), 1e-13);
}

TEST(Freq, ConstantGridIsPureDc) {
  const Grid x(8, 3.0);
  const FrequencyMask m(8, 0.0);
  EXPECT_LT(max_abs_diff(low_band(x, m), x), 1e-14);
  EXPECT_LT(norm(high_band(x, m)), 1e-13);
}

TEST(Freq, BandEnergyParseval) {
  Rng rng = make_rng(15, "parseval");
  const Grid x = gaussian_grid(16, rng);
  const FrequencyMask m(16, 3.0);
  const Spectrum s = fft2(x);
  const double total = band_energy(s, m, true) + band_energy(s, m, false);
  EXPECT_NEAR(total / 256.0, dot(x, x), 1e-9);
  EXPECT_NEAR(band_energy(s, m, true) / 256.0, dot(low_band(x, m), low_band(x, m)), 1e-9);
}

TEST(Freq, SideMismatch) {
  EXPECT_THROW(low_band(Grid(8), FrequencyMask(16, 1.0)), DimensionError);
  EXPECT_THROW(mix_bands(Grid(8), Grid(16), FrequencyMask(8, 1.0)), DimensionError);
}
