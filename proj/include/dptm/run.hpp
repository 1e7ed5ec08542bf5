#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dptm/adapt.hpp"
#include "dptm/io.hpp"

namespace dptm {

struct RunResult {
  std::string config_hash;
  std::vector<IterationMetrics> metrics;  // r = 0..R
  std::vector<SoftmaxClassifier> models;  // checkpoint per round
  std::vector<double> nuclear_norms;      // over target probabilities, per round
  std::size_t selected = 0;
};

struct RunOptions {
  bool write_artifacts = true;
  std::ostream* log = nullptr;
};

/// Generate data, train the source model, adapt for R rounds, select by
/// nuclear norm. Artifacts land in cfg.output_dir and are flushed as the run
/// progresses, so a failed run leaves its completed rounds behind.
RunResult run_pipeline(const RunConfig& cfg, const RunOptions& opts = {});

/// Accuracy of the selected model and of the best checkpoint.
double selected_accuracy(const RunResult& r);
double best_accuracy(const RunResult& r);

/// Prints the trajectory table, the selection outcome and any trace files.
/// Throws on a missing or inconsistent run directory.
void report(const std::filesystem::path& dir, std::ostream& out);

/// Applies DPTM_OUTPUT_ROOT to a relative output directory.
std::filesystem::path resolve_output_dir(const std::string& output_dir);

}  // namespace dptm
