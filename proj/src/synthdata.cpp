#include "dptm/synthdata.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dptm/errors.hpp"
#include "dptm/freq.hpp"
#include "dptm/rng.hpp"

namespace dptm {

namespace {

// relative energy allowed on the wrong side of the cutoff (FFT round-off only)
constexpr double kLeakTolerance = 1e-24;

double radial(const Grating& g) { return std::hypot(g.kx, g.ky); }

void check_leak(const Grid& x, const FrequencyMask& mask, bool forbidden_inside,
                const std::string& what) {
  const Spectrum s = fft2(x);
  const double total = band_energy(s, mask, true) + band_energy(s, mask, false);
  const double leak = band_energy(s, mask, forbidden_inside);
  if (total > 0.0 && leak > kLeakTolerance * total) {
    throw SpecificationError(what + " leaks " + std::to_string(leak / total) +
                             " of its energy across the audit radius");
  }
}

}  // namespace

void BenchmarkSpec::validate() const {
  if (side < 2 || side % 2 != 0) throw ConfigError("benchmark side must be even and >= 2");
  if (class_patterns.size() < 2) throw ConfigError("benchmark needs at least two classes");
  if (samples_per_class < 1) throw ConfigError("samples_per_class must be >= 1");
  if (!(sigma_data > 0.0)) throw ConfigError("sigma_data must be > 0");
  if (!(audit_radius >= 0.0)) throw ConfigError("audit_radius must be >= 0");
  for (std::size_t c = 0; c < class_patterns.size(); ++c) {
    if (!(radial(class_patterns[c]) > audit_radius)) {
      throw SpecificationError("class pattern " + std::to_string(c) +
                               " lies inside the audit radius");
    }
  }
  for (std::size_t h = 0; h < field_harmonics.size(); ++h) {
    if (!(radial(field_harmonics[h]) < audit_radius)) {
      throw SpecificationError("field harmonic " + std::to_string(h) +
                               " lies outside the audit radius");
    }
  }
  audit_spectra(*this);
}

BenchmarkSpec default_benchmark() {
  BenchmarkSpec spec;
  spec.class_patterns = {{4, 0, 0.12, 0.0}, {0, 4, 0.20, 0.0}, {3, 3, 0.30, 0.0}, {3, -3, 0.45, 0.0}};
  spec.field_harmonics = {{1, 0, 1.0, 0.0}, {0, 1, 1.0, 0.7}};
  spec.audit_radius = static_cast<double>(spec.side) / 8.0;
  return spec;
}

Grid render(const Grating& g, std::size_t side) {
  Grid out(side);
  const double w = 2.0 * std::numbers::pi / static_cast<double>(side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c)
      out(r, c) = g.amplitude * std::cos(w * (g.kx * static_cast<double>(r) +
                                              g.ky * static_cast<double>(c)) + g.phase);
  return out;
}

Grid class_pattern(const BenchmarkSpec& spec, int cls) {
  if (cls < 0 || cls >= spec.classes()) throw IndexError("class index out of range");
  return render(spec.class_patterns[static_cast<std::size_t>(cls)], spec.side);
}

Grid domain_field(const BenchmarkSpec& spec, int domain) {
  if (domain < 0 || domain > 1) throw IndexError("domain index out of range");
  Grid shape(spec.side);
  for (const auto& h : spec.field_harmonics) shape += render(h, spec.side);
  for (double& v : shape.values()) v += spec.field_offset;
  return spec.field_scale[static_cast<std::size_t>(domain)] * shape;
}

void audit_spectra(const BenchmarkSpec& spec) {
  const FrequencyMask mask(spec.side, spec.audit_radius);
  for (int c = 0; c < spec.classes(); ++c)
    check_leak(class_pattern(spec, c), mask, true, "class pattern " + std::to_string(c));
  for (int d = 0; d < 2; ++d)
    check_leak(domain_field(spec, d), mask, false, "domain field " + std::to_string(d));
}

Benchmark build_world(const BenchmarkSpec& spec) {
  spec.validate();
  const int classes = spec.classes();
  std::vector<Grid> means;
  for (int c = 0; c < classes; ++c)
    for (int d = 0; d < 2; ++d) means.push_back(class_pattern(spec, c) + domain_field(spec, d));
  std::vector<double> weights(means.size(), 1.0 / static_cast<double>(means.size()));
  Benchmark b{MixtureWorld(classes, 2, std::move(means), std::move(weights), spec.sigma_data),
              {}, {}};
  for (int d = 0; d < 2; ++d) {
    Rng rng = make_rng(spec.seed, "data", static_cast<std::uint64_t>(d));
    auto& out = d == 0 ? b.source : b.target;
    out.reserve(static_cast<std::size_t>(classes * spec.samples_per_class));
    for (int c = 0; c < classes; ++c)
      for (int i = 0; i < spec.samples_per_class; ++i)
        out.push_back({sample_data(b.world, c, d, rng), c});
  }
  return b;
}

std::vector<Grid> inputs_of(const std::vector<LabeledSample>& data) {
  std::vector<Grid> xs;
  xs.reserve(data.size());
  for (const auto& s : data) xs.push_back(s.x);
  return xs;
}

}  // namespace dptm
