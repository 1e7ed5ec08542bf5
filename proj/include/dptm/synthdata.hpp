#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dptm/classifier.hpp"
#include "dptm/grid.hpp"
#include "dptm/oracle.hpp"

namespace dptm {

/// amplitude * cos(2 pi (kx * row + ky * col) / n + phase)
struct Grating {
  int kx = 0;
  int ky = 0;
  double amplitude = 1.0;
  double phase = 0.0;
};

/// Two-domain benchmark. Class c is a grating outside `audit_radius`; domain d
/// adds field_scale[d] * (sum of field harmonics + field_offset), all inside it.
struct BenchmarkSpec {
  std::size_t side = 16;
  std::vector<Grating> class_patterns;
  std::vector<Grating> field_harmonics;
  double field_offset = 0.5;
  std::array<double, 2> field_scale{2.0, -2.0};  // source, target
  int samples_per_class = 400;                   // per domain
  double sigma_data = 0.3;
  double audit_radius = 2.0;
  std::uint64_t seed = 0;

  int classes() const { return static_cast<int>(class_patterns.size()); }
  /// Throws ConfigError on bad sizes, SpecificationError on band violations.
  void validate() const;
};

BenchmarkSpec default_benchmark();

Grid render(const Grating& g, std::size_t side);
Grid class_pattern(const BenchmarkSpec& spec, int cls);
Grid domain_field(const BenchmarkSpec& spec, int domain);

/// FFT support check: class patterns carry no energy inside the audit radius,
/// domain fields none outside it. Throws SpecificationError.
void audit_spectra(const BenchmarkSpec& spec);

struct Benchmark {
  MixtureWorld world;
  std::vector<LabeledSample> source;  // domain 0, class-major order
  std::vector<LabeledSample> target;  // domain 1, class-major order
};

/// Means mu_{c,d} = class_pattern(c) + domain_field(d), uniform weights.
/// Samples come from the "data" sub-stream of spec.seed, one index per domain.
Benchmark build_world(const BenchmarkSpec& spec);

std::vector<Grid> inputs_of(const std::vector<LabeledSample>& data);

}  // namespace dptm
