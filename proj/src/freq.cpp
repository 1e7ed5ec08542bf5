#include "dptm/freq.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "dptm/errors.hpp"

namespace dptm {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per side under a lock and reused for the lifetime
// of the process.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

const PlanPair& plans_for(std::size_t side) {
  static std::mutex mu;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(side);
  if (it != cache.end()) return it->second;

  const int n = static_cast<int>(side);
  std::vector<std::complex<double>> in(side * side), out(side * side);
  auto* pin = reinterpret_cast<fftw_complex*>(in.data());
  auto* pout = reinterpret_cast<fftw_complex*>(out.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair plans;
  plans.forward = fftw_plan_dft_2d(n, n, pin, pout, FFTW_FORWARD, flags);
  plans.backward = fftw_plan_dft_2d(n, n, pin, pout, FFTW_BACKWARD, flags);
  if (plans.forward == nullptr || plans.backward == nullptr) {
    throw NumericalError("fftw failed to plan a transform of side " + std::to_string(side));
  }
  return cache.emplace(side, plans).first->second;
}

void require_mask_side(const Grid& x, const FrequencyMask& mask, const char* where) {
  if (x.side() != mask.side()) {
    throw DimensionError(std::string(where) + ": grid side " + std::to_string(x.side()) +
                         " does not match mask side " + std::to_string(mask.side()));
  }
}

}  // namespace

int centered_frequency(std::size_t k, std::size_t side) {
  const auto ik = static_cast<int>(k);
  const auto is = static_cast<int>(side);
  return ik < is / 2 ? ik : ik - is;
}

FrequencyMask::FrequencyMask(std::size_t side, double radius)
    : side_(side), radius_(radius), bits_(side * side, 0) {
  if (side < 2 || side % 2 != 0) {
    throw DimensionError("mask side must be even and >= 2, got " + std::to_string(side));
  }
  if (std::isnan(radius)) throw ConfigError("mask radius is NaN");
  for (std::size_t r = 0; r < side; ++r) {
    const double fy = centered_frequency(r, side);
    for (std::size_t c = 0; c < side; ++c) {
      const double fx = centered_frequency(c, side);
      bits_[r * side + c] = std::sqrt(fx * fx + fy * fy) <= radius ? 1 : 0;
    }
  }
}

FrequencyMask FrequencyMask::all_pass(std::size_t side) {
  return FrequencyMask(side, max_radius(side) + 1.0);
}

FrequencyMask FrequencyMask::empty(std::size_t side) { return FrequencyMask(side, -1.0); }

double FrequencyMask::max_radius(std::size_t side) {
  return static_cast<double>(side) * std::sqrt(2.0) / 2.0;
}

std::size_t FrequencyMask::pass_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool FrequencyMask::conjugate_symmetric() const {
  for (std::size_t r = 0; r < side_; ++r) {
    for (std::size_t c = 0; c < side_; ++c) {
      const std::size_t rr = (side_ - r) % side_;
      const std::size_t cc = (side_ - c) % side_;
      if (passes(r, c) != passes(rr, cc)) return false;
    }
  }
  return true;
}

Spectrum fft2(const Grid& x) {
  const std::size_t n = x.side();
  std::vector<std::complex<double>> in(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) in[k] = {x[k], 0.0};
  Spectrum s{n, std::vector<std::complex<double>>(x.size())};
  fftw_execute_dft(plans_for(n).forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(s.bins.data()));
  return s;
}

Grid ifft2_real(const Spectrum& s, double* imag_residual) {
  const std::size_t n = s.side;
  std::vector<std::complex<double>> in = s.bins;
  std::vector<std::complex<double>> out(in.size());
  fftw_execute_dft(plans_for(n).backward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n * n);
  Grid g(n);
  double max_re = 0.0;
  double max_im = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    g[k] = out[k].real() * scale;
    max_re = std::max(max_re, std::abs(g[k]));
    max_im = std::max(max_im, std::abs(out[k].imag() * scale));
  }
  if (imag_residual != nullptr) *imag_residual = max_im / std::max(max_re, 1e-300);
  return g;
}

Grid low_band(const Grid& x, const FrequencyMask& mask, double* imag_residual) {
  require_mask_side(x, mask, "low_band");
  Spectrum s = fft2(x);
  for (std::size_t r = 0; r < s.side; ++r)
    for (std::size_t c = 0; c < s.side; ++c)
      if (!mask.passes(r, c)) s(r, c) = 0.0;
  return ifft2_real(s, imag_residual);
}

Grid high_band(const Grid& x, const FrequencyMask& mask, double* imag_residual) {
  require_mask_side(x, mask, "high_band");
  Spectrum s = fft2(x);
  for (std::size_t r = 0; r < s.side; ++r)
    for (std::size_t c = 0; c < s.side; ++c)
      if (mask.passes(r, c)) s(r, c) = 0.0;
  return ifft2_real(s, imag_residual);
}

Grid mix_bands(const Grid& low_source, const Grid& high_source, const FrequencyMask& mask,
               double* imag_residual) {
  require_same_side(low_source, high_source, "mix_bands");
  require_mask_side(low_source, mask, "mix_bands");
  const Spectrum lo = fft2(low_source);
  Spectrum mixed = fft2(high_source);
  for (std::size_t r = 0; r < mixed.side; ++r)
    for (std::size_t c = 0; c < mixed.side; ++c)
      if (mask.passes(r, c)) mixed(r, c) = lo(r, c);
  return ifft2_real(mixed, imag_residual);
}

double band_energy(const Spectrum& s, const FrequencyMask& mask, bool inside) {
  if (s.side != mask.side()) throw DimensionError("band_energy: spectrum/mask side mismatch");
  double e = 0.0;
  for (std::size_t r = 0; r < s.side; ++r)
    for (std::size_t c = 0; c < s.side; ++c)
      if (mask.passes(r, c) == inside) e += std::norm(s(r, c));
  return e;
}

}  // namespace dptm
