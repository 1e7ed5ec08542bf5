#include "dptm/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>

#include "dptm/errors.hpp"
#include "dptm/rng.hpp"

namespace dptm {

namespace fs = std::filesystem;

namespace {

std::string round_name(const char* prefix, int r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02d", prefix, r);
  return buf;
}

// The only place target labels are read: evaluation metrics.
Evaluator make_evaluator(const std::vector<LabeledSample>& target) {
  return [&target](const SoftmaxClassifier& model, const PartitionResult& part) {
    EvalResult e;
    e.target_accuracy = accuracy(model, target);
    if (part.trust.empty()) {
      e.trust_accuracy = std::numeric_limits<double>::quiet_NaN();
    } else {
      std::size_t hits = 0;
      for (const auto& t : part.trust)
        if (t.pseudo_label == target[t.index].label) ++hits;
      e.trust_accuracy = static_cast<double>(hits) / static_cast<double>(part.trust.size());
    }
    return e;
  };
}

}  // namespace

fs::path resolve_output_dir(const std::string& output_dir) {
  fs::path p(output_dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("DPTM_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  return p;
}

RunResult run_pipeline(const RunConfig& cfg_in, const RunOptions& opts) {
  RunConfig cfg = cfg_in;
  cfg.benchmark.seed = cfg.seed;
  cfg.adaptation.seed = cfg.seed;
  cfg.adaptation.manipulation.record_trace = cfg.dump_traces && opts.write_artifacts;
  cfg.validate();

  RunResult result;
  result.config_hash = config_hash(cfg);
  const std::string& hash = result.config_hash;
  auto log = [&](const std::string& s) {
    if (opts.log) *opts.log << s << std::endl;
  };

  const NoiseSchedule schedule = NoiseSchedule::linear(
      cfg.schedule.train_steps, cfg.schedule.beta_start, cfg.schedule.beta_end);
  const Benchmark bench = build_world(cfg.benchmark);
  const std::vector<Grid> targets = inputs_of(bench.target);
  const Evaluator eval = make_evaluator(bench.target);

  const fs::path dir = resolve_output_dir(cfg.output_dir);
  std::optional<MetricsWriter> metrics;
  if (opts.write_artifacts) {
    fs::create_directories(dir);
    write_json(dir / "config.json", to_json(cfg_in));
    const nlohmann::json spec = to_json(cfg)["benchmark"];
    write_dataset(dir / "data" / "source", bench.source, "source", spec, cfg.seed, hash);
    write_dataset(dir / "data" / "target", bench.target, "target", spec, cfg.seed, hash);
    metrics.emplace(dir / "metrics.csv", hash);
  }

  auto record = [&](const RefinementState& s, const IterationMetrics& m) {
    result.metrics.push_back(m);
    result.models.push_back(s.model);
    if (opts.write_artifacts) {
      metrics->append(m);
      write_checkpoint(dir / "checkpoints" / round_name("model_r", s.r), s.model, s.r, hash);
    }
    log(format_metrics_row(m));
  };

  TrainConfig st = cfg.source_train;
  st.seed = derive_seed(cfg.seed, "source-train");
  const int classes = bench.world.classes();
  const SoftmaxClassifier source =
      train_ce(SoftmaxClassifier(classes, cfg.benchmark.side * cfg.benchmark.side), bench.source, st);

  RefinementState state = initial_state(source, targets, cfg.adaptation.threshold);
  record(state, describe(0, state.partition, classes, state.model, eval));

  for (int r = 0; r < cfg.adaptation.iterations; ++r) {
    std::vector<std::size_t> manipulated_from;
    for (const auto& e : state.partition.non_trust) manipulated_from.push_back(e.index);
    const std::size_t kept = (manipulated_from.size() / static_cast<std::size_t>(classes)) *
                             static_cast<std::size_t>(classes);
    manipulated_from.resize(kept);
    RoundObserver observer;
    if (cfg.adaptation.manipulation.record_trace) {
      observer = [&](const RefinementState& s, std::span<const ManipulatedSample> m) {
        write_traces(dir / "traces" / round_name("round_", s.r), s.r, m, manipulated_from, hash);
      };
    }
    state = refine_once(state, targets, bench.world, schedule, cfg.adaptation, eval, observer);
    record(state, state.history.back());
  }

  std::vector<Eigen::MatrixXd> probs;
  for (const auto& m : result.models) {
    probs.push_back(probability_matrix(m, targets));
    result.nuclear_norms.push_back(nuclear_norm(probs.back()));
  }
  result.selected = select_model(probs);

  if (opts.write_artifacts) {
    std::vector<double> acc;
    for (const auto& m : result.metrics) acc.push_back(m.target_accuracy);
    write_json(dir / "selection.json",
               {{"config_hash", hash},
                {"criterion", "largest nuclear norm of the target probability matrix"},
                {"nuclear_norms", result.nuclear_norms},
                {"selected_round", result.selected},
                {"selected_target_accuracy", selected_accuracy(result)},
                {"best_target_accuracy", best_accuracy(result)},
                {"target_accuracy", acc}});
  }
  log("selected round " + std::to_string(result.selected));
  return result;
}

double selected_accuracy(const RunResult& r) { return r.metrics.at(r.selected).target_accuracy; }

double best_accuracy(const RunResult& r) {
  double best = 0.0;
  for (const auto& m : r.metrics) best = std::max(best, m.target_accuracy);
  return best;
}

void report(const fs::path& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  if (!fs::exists(dir / "config.json")) throw Error(dir.string() + ": missing config.json");
  RunConfig cfg = parse_config(read_json(dir / "config.json"));
  cfg.benchmark.seed = cfg.seed;
  cfg.adaptation.seed = cfg.seed;
  const std::string hash = config_hash(cfg);

  const MetricsFile metrics = read_metrics(dir / "metrics.csv");
  if (metrics.config_hash != hash)
    throw ValidationError("metrics.csv config hash " + metrics.config_hash +
                          " does not match config.json (" + hash + ")");
  for (const auto& m : metrics.rows) {
    std::string ck;
    const fs::path stem = dir / "checkpoints" / round_name("model_r", m.r);
    (void)read_checkpoint(stem, &ck);
    if (ck != hash) throw ValidationError(stem.string() + ": config hash mismatch");
  }

  out << "run " << dir.string() << "  config_hash " << hash << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%4s %8s %10s %10s %12s %10s\n", "r", "trust", "trust_acc",
                "non_trust", "manipulated", "target_acc");
  out << line;
  auto pct = [](double v) {
    if (std::isnan(v)) return std::string("-");
    char b[16];
    std::snprintf(b, sizeof b, "%.2f", 100.0 * v);
    return std::string(b);
  };
  for (const auto& m : metrics.rows) {
    std::snprintf(line, sizeof line, "%4d %8zu %10s %10zu %12zu %10s\n", m.r, m.trust_size,
                  pct(m.trust_accuracy).c_str(), m.non_trust_size, m.manipulated_size,
                  pct(m.target_accuracy).c_str());
    out << line;
  }
  const int expected = cfg.adaptation.iterations + 1;
  if (static_cast<int>(metrics.rows.size()) < expected)
    out << "partial run: " << metrics.rows.size() << " of " << expected << " rounds recorded\n";

  if (fs::exists(dir / "selection.json")) {
    const auto sel = read_json(dir / "selection.json");
    if (sel.at("config_hash").get<std::string>() != hash)
      throw ValidationError("selection.json config hash mismatch");
    const auto r = sel.at("selected_round").get<std::size_t>();
    out << "selection: round " << r << " (nuclear norm "
        << sel.at("nuclear_norms").at(r).get<double>() << "), target accuracy "
        << pct(sel.at("selected_target_accuracy").get<double>()) << "%, best checkpoint "
        << pct(sel.at("best_target_accuracy").get<double>()) << "%\n";
  } else {
    out << "selection: not available\n";
  }

  if (fs::is_directory(dir / "traces")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "traces"))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    out << "traces: " << files.size() << " rounds\n";
    for (const auto& f : files) {
      const auto meta = read_json(f);
      if (meta.at("config_hash").get<std::string>() != hash)
        throw ValidationError(f.string() + ": config hash mismatch");
      out << "  " << f.filename().replace_extension(".f32").string() << ": "
          << meta.at("samples").get<std::size_t>() << " samples x "
          << meta.at("steps").size() << " steps\n";
    }
  }
}

}  // namespace dptm
