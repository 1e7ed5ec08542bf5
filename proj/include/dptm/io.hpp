#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dptm/adapt.hpp"
#include "dptm/classifier.hpp"
#include "dptm/synthdata.hpp"

namespace dptm {

struct ScheduleParams {
  int train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
};

struct RunConfig {
  BenchmarkSpec benchmark = default_benchmark();
  ScheduleParams schedule;
  AdaptationConfig adaptation = default_adaptation();
  TrainConfig source_train = default_source_training();
  std::uint64_t seed = 0;
  std::string output_dir = "dptm-run";
  bool dump_traces = false;

  /// Training defaults tuned on the default benchmark.
  static TrainConfig default_source_training();
  static AdaptationConfig default_adaptation();

  void validate() const;
};

/// Parses a JSON config. Missing keys keep their defaults; unknown keys and
/// type mismatches raise ConfigError naming the dotted field path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a over the canonical echo, excluding output_dir, dump_traces and
/// workers (they do not affect results). 16 lowercase hex digits.
std::string config_hash(const RunConfig& cfg);

// --- artifacts ---

inline constexpr const char* kMetricsHeader =
    "r,trust_size,trust_accuracy,non_trust_size,manipulated_size,target_accuracy";

std::string format_metrics_row(const IterationMetrics& m);
IterationMetrics parse_metrics_row(const std::string& line);

/// Appends rows and flushes after each one, so partial runs keep their trajectory.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, const std::string& hash);
  void append(const IterationMetrics& m);

 private:
  std::ofstream out_;
};

struct MetricsFile {
  std::string config_hash;
  std::vector<IterationMetrics> rows;
};
MetricsFile read_metrics(const std::filesystem::path& path);

/// `<stem>.bin` holds W row-major then b as little-endian f64; `<stem>.json`
/// records the shape, round and config hash.
void write_checkpoint(const std::filesystem::path& stem, const SoftmaxClassifier& model, int round,
                      const std::string& hash);
SoftmaxClassifier read_checkpoint(const std::filesystem::path& stem, std::string* hash = nullptr);

/// Little-endian f32 block of all samples plus a JSON index sidecar.
void write_dataset(const std::filesystem::path& stem, std::span<const LabeledSample> data,
                   const std::string& domain, const nlohmann::json& spec_echo,
                   std::uint64_t seed, const std::string& hash);

/// Per-round trace dump: [sample][step][field][n*n] little-endian f32 with the
/// fields z_t, z_tilde, z0_t, z_tilde_prime, next.
void write_traces(const std::filesystem::path& stem, int round,
                  std::span<const ManipulatedSample> samples,
                  std::span<const std::size_t> source_indices, const std::string& hash);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace dptm
