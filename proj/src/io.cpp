#include "dptm/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "dptm/errors.hpp"

namespace dptm {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "artifact writers assume little-endian");

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ConfigError((prefix.empty() ? std::string("config") : prefix) + ": expected an object");
  }
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(join(prefix, key) + ": unknown field");
  }
}

template <class T>
void read(const json& obj, const std::string& prefix, const char* key, T& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string path = join(prefix, key);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(path + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(path + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<long long>() < 0)
          throw ConfigError(path + ": expected a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(path + ": expected a number");
    } else {
      if (!it->is_string()) throw ConfigError(path + ": expected a string");
    }
    dst = it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<Grating> read_gratings(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<Grating> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    check_keys(arr[i], p, {"kx", "ky", "amplitude", "phase"});
    Grating g;
    read(arr[i], p, "kx", g.kx);
    read(arr[i], p, "ky", g.ky);
    read(arr[i], p, "amplitude", g.amplitude);
    read(arr[i], p, "phase", g.phase);
    out.push_back(g);
  }
  return out;
}

json gratings_json(const std::vector<Grating>& gs) {
  json arr = json::array();
  for (const auto& g : gs)
    arr.push_back({{"kx", g.kx}, {"ky", g.ky}, {"amplitude", g.amplitude}, {"phase", g.phase}});
  return arr;
}

void read_train(const json& obj, const std::string& p, TrainConfig& t) {
  check_keys(obj, p, {"learning_rate", "momentum", "weight_decay", "epochs", "batch_size"});
  read(obj, p, "learning_rate", t.learning_rate);
  read(obj, p, "momentum", t.momentum);
  read(obj, p, "weight_decay", t.weight_decay);
  read(obj, p, "epochs", t.epochs);
  read(obj, p, "batch_size", t.batch_size);
}

json train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"momentum", t.momentum},
          {"weight_decay", t.weight_decay},   {"epochs", t.epochs},
          {"batch_size", t.batch_size}};
}

// Re-raises a component's ConfigError with the section it came from.
template <class F>
void validate_section(const char* section, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(section) + ": " + e.what());
  }
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void put_f32(std::ofstream& out, std::span<const double> values) {
  std::vector<float> buf(values.begin(), values.end());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

}  // namespace

TrainConfig RunConfig::default_source_training() {
  TrainConfig t;
  t.learning_rate = 3e-4;
  t.epochs = 20;
  return t;
}

AdaptationConfig RunConfig::default_adaptation() {
  AdaptationConfig a;
  a.finetune.learning_rate = 1e-3;
  a.finetune.epochs = 60;
  return a;
}

void RunConfig::validate() const {
  validate_section("benchmark", [&] { benchmark.validate(); });
  validate_section("schedule", [&] {
    (void)NoiseSchedule::linear(schedule.train_steps, schedule.beta_start, schedule.beta_end);
  });
  adaptation.manipulation.guidance.validate();  // messages already carry "guidance."
  validate_section("manipulation", [&] { adaptation.manipulation.validate(benchmark.side); });
  validate_section("adapt_train", [&] { adaptation.finetune.validate(); });
  validate_section("adaptation", [&] { adaptation.validate(benchmark.side); });
  validate_section("source_train", [&] { source_train.validate(); });
  if (adaptation.manipulation.guidance.steps > schedule.train_steps) {
    throw ConfigError("guidance.steps: exceeds schedule.train_steps");
  }
}

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  check_keys(j, "", {"seed", "output_dir", "dump_traces", "workers", "benchmark", "schedule",
                     "guidance", "manipulation", "adaptation", "source_train", "adapt_train"});
  read(j, "", "seed", cfg.seed);
  read(j, "", "output_dir", cfg.output_dir);
  read(j, "", "dump_traces", cfg.dump_traces);
  read(j, "", "workers", cfg.adaptation.workers);

  if (j.contains("benchmark")) {
    const json& b = j["benchmark"];
    auto& s = cfg.benchmark;
    check_keys(b, "benchmark", {"side", "samples_per_class", "sigma_data", "audit_radius",
                                "field_offset", "field_scale", "class_patterns",
                                "field_harmonics"});
    read(b, "benchmark", "side", s.side);
    read(b, "benchmark", "samples_per_class", s.samples_per_class);
    read(b, "benchmark", "sigma_data", s.sigma_data);
    read(b, "benchmark", "audit_radius", s.audit_radius);
    read(b, "benchmark", "field_offset", s.field_offset);
    if (b.contains("field_scale")) {
      const json& fs_ = b["field_scale"];
      if (!fs_.is_array() || fs_.size() != 2 || !fs_[0].is_number() || !fs_[1].is_number())
        throw ConfigError("benchmark.field_scale: expected two numbers");
      s.field_scale = {fs_[0].get<double>(), fs_[1].get<double>()};
    }
    if (b.contains("class_patterns"))
      s.class_patterns = read_gratings(b["class_patterns"], "benchmark.class_patterns");
    if (b.contains("field_harmonics"))
      s.field_harmonics = read_gratings(b["field_harmonics"], "benchmark.field_harmonics");
  }
  if (j.contains("schedule")) {
    check_keys(j["schedule"], "schedule", {"train_steps", "beta_start", "beta_end"});
    read(j["schedule"], "schedule", "train_steps", cfg.schedule.train_steps);
    read(j["schedule"], "schedule", "beta_start", cfg.schedule.beta_start);
    read(j["schedule"], "schedule", "beta_end", cfg.schedule.beta_end);
  }
  auto& m = cfg.adaptation.manipulation;
  if (j.contains("guidance")) {
    check_keys(j["guidance"], "guidance", {"denoise_scale", "inversion_scale", "steps"});
    read(j["guidance"], "guidance", "denoise_scale", m.guidance.denoise_scale);
    read(j["guidance"], "guidance", "inversion_scale", m.guidance.inversion_scale);
    read(j["guidance"], "guidance", "steps", m.guidance.steps);
  }
  if (j.contains("manipulation")) {
    check_keys(j["manipulation"], "manipulation", {"rho_init", "rho_mix"});
    read(j["manipulation"], "manipulation", "rho_init", m.rho_init);
    read(j["manipulation"], "manipulation", "rho_mix", m.rho_mix);
  }
  if (j.contains("adaptation")) {
    check_keys(j["adaptation"], "adaptation", {"threshold", "iterations"});
    read(j["adaptation"], "adaptation", "threshold", cfg.adaptation.threshold);
    read(j["adaptation"], "adaptation", "iterations", cfg.adaptation.iterations);
  }
  if (j.contains("source_train")) read_train(j["source_train"], "source_train", cfg.source_train);
  if (j.contains("adapt_train"))
    read_train(j["adapt_train"], "adapt_train", cfg.adaptation.finetune);
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  const auto& s = cfg.benchmark;
  const auto& m = cfg.adaptation.manipulation;
  return {
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir},
      {"dump_traces", cfg.dump_traces},
      {"workers", cfg.adaptation.workers},
      {"benchmark",
       {{"side", s.side},
        {"samples_per_class", s.samples_per_class},
        {"sigma_data", s.sigma_data},
        {"audit_radius", s.audit_radius},
        {"field_offset", s.field_offset},
        {"field_scale", {s.field_scale[0], s.field_scale[1]}},
        {"class_patterns", gratings_json(s.class_patterns)},
        {"field_harmonics", gratings_json(s.field_harmonics)}}},
      {"schedule",
       {{"train_steps", cfg.schedule.train_steps},
        {"beta_start", cfg.schedule.beta_start},
        {"beta_end", cfg.schedule.beta_end}}},
      {"guidance",
       {{"denoise_scale", m.guidance.denoise_scale},
        {"inversion_scale", m.guidance.inversion_scale},
        {"steps", m.guidance.steps}}},
      {"manipulation", {{"rho_init", m.rho_init}, {"rho_mix", m.rho_mix}}},
      {"adaptation",
       {{"threshold", cfg.adaptation.threshold}, {"iterations", cfg.adaptation.iterations}}},
      {"source_train", train_json(cfg.source_train)},
      {"adapt_train", train_json(cfg.adaptation.finetune)},
  };
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  j.erase("dump_traces");
  j.erase("workers");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

std::string format_metrics_row(const IterationMetrics& m) {
  return std::to_string(m.r) + "," + std::to_string(m.trust_size) + "," +
         format_double(m.trust_accuracy) + "," + std::to_string(m.non_trust_size) + "," +
         std::to_string(m.manipulated_size) + "," + format_double(m.target_accuracy);
}

IterationMetrics parse_metrics_row(const std::string& line) {
  std::istringstream in(line);
  std::string f[6];
  for (int i = 0; i < 6; ++i)
    if (!std::getline(in, f[i], ',')) throw ValidationError("short metrics row: " + line);
  try {
    IterationMetrics m;
    m.r = std::stoi(f[0]);
    m.trust_size = std::stoull(f[1]);
    m.trust_accuracy = f[2] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[2]);
    m.non_trust_size = std::stoull(f[3]);
    m.manipulated_size = std::stoull(f[4]);
    m.target_accuracy = f[5] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[5]);
    return m;
  } catch (const std::logic_error&) {
    throw ValidationError("malformed metrics row: " + line);
  }
}

MetricsWriter::MetricsWriter(const fs::path& path, const std::string& hash)
    : out_(open_out(path)) {
  out_ << "# config_hash: " << hash << "\n" << kMetricsHeader << "\n";
  out_.flush();
}

void MetricsWriter::append(const IterationMetrics& m) {
  out_ << format_metrics_row(m) << "\n";
  out_.flush();
}

MetricsFile read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing " + path.string());
  MetricsFile f;
  std::string line;
  const std::string tag = "# config_hash: ";
  if (!std::getline(in, line) || line.rfind(tag, 0) != 0)
    throw ValidationError(path.string() + ": missing config hash line");
  f.config_hash = line.substr(tag.size());
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw ValidationError(path.string() + ": unexpected header");
  while (std::getline(in, line))
    if (!line.empty()) f.rows.push_back(parse_metrics_row(line));
  return f;
}

void write_checkpoint(const fs::path& stem, const SoftmaxClassifier& model, int round,
                      const std::string& hash) {
  fs::path bin = stem;
  bin += ".bin";
  std::ofstream out = open_out(bin, std::ios::binary);
  const auto& w = model.weights();
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      const double v = w(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  out.write(reinterpret_cast<const char*>(model.bias().data()),
            static_cast<std::streamsize>(model.bias().size() * sizeof(double)));
  if (!out) throw Error("failed writing " + bin.string());
  fs::path side = stem;
  side += ".json";
  write_json(side, {{"config_hash", hash},
                    {"round", round},
                    {"classes", model.classes()},
                    {"input_dim", model.input_dim()},
                    {"format", "f64le"},
                    {"layout", "weights row-major (classes x input_dim), then bias"}});
}

SoftmaxClassifier read_checkpoint(const fs::path& stem, std::string* hash) {
  fs::path side = stem;
  side += ".json";
  const json meta = read_json(side);
  const int classes = meta.at("classes").get<int>();
  const auto dim = meta.at("input_dim").get<Eigen::Index>();
  if (hash) *hash = meta.at("config_hash").get<std::string>();
  fs::path bin = stem;
  bin += ".bin";
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw Error("missing " + bin.string());
  Eigen::MatrixXd w(classes, dim);
  Eigen::VectorXd b(classes);
  for (Eigen::Index r = 0; r < classes; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) in.read(reinterpret_cast<char*>(&w(r, c)), sizeof(double));
  in.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(classes * sizeof(double)));
  if (!in) throw ValidationError(bin.string() + ": truncated checkpoint");
  return SoftmaxClassifier(std::move(w), std::move(b));
}

void write_dataset(const fs::path& stem, std::span<const LabeledSample> data,
                   const std::string& domain, const json& spec_echo, std::uint64_t seed,
                   const std::string& hash) {
  fs::path bin = stem;
  bin += ".f32";
  std::ofstream out = open_out(bin, std::ios::binary);
  std::vector<int> labels;
  for (const auto& s : data) {
    put_f32(out, s.x.values());
    labels.push_back(s.label);
  }
  if (!out) throw Error("failed writing " + bin.string());
  fs::path side = stem;
  side += ".json";
  write_json(side, {{"config_hash", hash},
                    {"count", data.size()},
                    {"side", data.empty() ? 0 : data.front().x.side()},
                    {"classes", spec_echo.at("class_patterns").size()},
                    {"domain", domain},
                    {"seed", seed},
                    {"format", "f32le, one row-major grid per sample"},
                    {"labels", labels},
                    {"spec", spec_echo}});
}

void write_traces(const fs::path& stem, int round, std::span<const ManipulatedSample> samples,
                  std::span<const std::size_t> source_indices, const std::string& hash) {
  fs::path bin = stem;
  bin += ".f32";
  std::ofstream out = open_out(bin, std::ios::binary);
  json steps = json::array();
  std::vector<int> labels;
  for (const auto& s : samples) {
    for (const auto& st : s.trace) {
      put_f32(out, st.z_t.values());
      put_f32(out, st.z_tilde.values());
      put_f32(out, st.z0_t.values());
      put_f32(out, st.z_tilde_prime.values());
      put_f32(out, st.next.values());
    }
    labels.push_back(s.assigned_label);
  }
  if (!samples.empty())
    for (const auto& st : samples.front().trace) steps.push_back({st.t, st.t_prev});
  fs::path side = stem;
  side += ".json";
  write_json(side, {{"config_hash", hash},
                    {"round", round},
                    {"samples", samples.size()},
                    {"side", samples.empty() ? 0 : samples.front().output.side()},
                    {"steps", steps},
                    {"fields", {"z_t", "z_tilde", "z0_t", "z_tilde_prime", "next"}},
                    {"format", "f32le [sample][step][field][row-major grid]"},
                    {"assigned_labels", labels},
                    {"target_indices", std::vector<std::size_t>(source_indices.begin(),
                                                                source_indices.end())}});
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace dptm
