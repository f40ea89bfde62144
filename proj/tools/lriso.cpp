// lriso: command-line front end for the Low-Rank Isomap toolkit.
//
// Every command resolves its settings (flag > --config file > default) into a
// flat string map, runs from that map only, and records it in
// <out>/manifest.json so `lriso rerun` can replay the run.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lriso/csv.hpp"
#include "lriso/dataset.hpp"
#include "lriso/errors.hpp"
#include "lriso/evaluation.hpp"
#include "lriso/pipelines.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Settings = std::map<std::string, std::string>;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) { return lriso::csv::format_double(v); }

// ---------------------------------------------------------------------------
// Settings

struct KeySpec {
  std::string name;
  std::string help;
  bool flag = false;
};

Settings pipeline_defaults() {
  const lriso::PipelineConfig d;
  return {
      {"variant", "low-rank"},
      {"landmarks", std::to_string(d.n_landmarks)},
      {"dim", std::to_string(d.latent_dim)},
      {"knn", std::to_string(d.k_nn)},
      {"features", "geodesic"},
      {"scatter-labels", "clusters"},
      {"within", "class-mean"},
      {"kmeans-iter", std::to_string(d.kmeans_max_iter)},
      {"seed", std::to_string(d.seed)},
      {"lrr-input-norm", fmt(d.lrr_input_norm)},
      {"lrr-beta", fmt(d.lrr.beta)},
      {"lrr-lambda", fmt(d.lrr.lambda_err)},
      {"lrr-mu0", fmt(d.lrr.mu0)},
      {"lrr-mu-max", fmt(d.lrr.mu_max)},
      {"lrr-rho0", fmt(d.lrr.rho0)},
      {"lrr-eps1", fmt(d.lrr.eps1)},
      {"lrr-eps2", fmt(d.lrr.eps2)},
      {"lrr-max-iter", std::to_string(d.lrr.max_iter)},
      {"lrr-eta1-slack", fmt(d.lrr.eta1_slack)},
      {"classic-max-points", std::to_string(d.classic_max_points)},
  };
}

const std::vector<KeySpec>& pipeline_keys() {
  static const std::vector<KeySpec> keys = {
      {"variant", "low-rank | clustered | random-landmark | classic"},
      {"landmarks", "landmark count (cluster count N_C for the clustered variants)"},
      {"dim", "latent dimension m"},
      {"knn", "neighbours per point in the geodesic graph"},
      {"features", "geodesic | ambient"},
      {"scatter-labels", "clusters | true-labels"},
      {"within", "class-mean | global-mean"},
      {"kmeans-iter", "k-means iteration cap"},
      {"seed", "random seed (also seeds generator inputs)"},
      {"lrr-input-norm", "spectral norm S_B is rescaled to before LRR (0 = unscaled)"},
      {"lrr-beta", "LRR sparsity weight"},
      {"lrr-lambda", "LRR error weight"},
      {"lrr-mu0", "initial penalty"},
      {"lrr-mu-max", "penalty cap"},
      {"lrr-rho0", "penalty growth factor"},
      {"lrr-eps1", "residual tolerance"},
      {"lrr-eps2", "step tolerance"},
      {"lrr-max-iter", "LRR iteration cap"},
      {"lrr-eta1-slack", "eta1 safety factor (> 1)"},
      {"classic-max-points", "largest N accepted by classic Isomap"},
  };
  return keys;
}

long long to_int(const Settings& s, const std::string& key) {
  long long v = 0;
  if (!lriso::csv::parse_int(s.at(key), v)) throw UsageError("--" + key + " expects an integer, got '" + s.at(key) + "'");
  return v;
}

double to_real(const Settings& s, const std::string& key) {
  double v = 0;
  if (!lriso::csv::parse_double(s.at(key), v)) throw UsageError("--" + key + " expects a number, got '" + s.at(key) + "'");
  return v;
}

bool to_flag(const Settings& s, const std::string& key) {
  auto it = s.find(key);
  if (it == s.end()) return false;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw UsageError("--" + key + " expects true or false");
}

std::vector<std::string> split_list(const std::string& text, const std::string& key) {
  std::vector<std::string> out;
  for (auto& field : lriso::csv::split_fields(text)) {
    if (field.empty()) throw UsageError("--" + key + ": empty entry in '" + text + "'");
    out.push_back(field);
  }
  if (out.empty()) throw UsageError("--" + key + " is empty");
  return out;
}

std::vector<long long> int_list(const Settings& s, const std::string& key) {
  std::vector<long long> out;
  for (const auto& field : split_list(s.at(key), key)) {
    long long v = 0;
    if (!lriso::csv::parse_int(field, v)) throw UsageError("--" + key + ": '" + field + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

std::vector<lriso::Variant> variant_list(const Settings& s, const std::string& key) {
  std::vector<lriso::Variant> out;
  for (const auto& field : split_list(s.at(key), key)) out.push_back(lriso::parse_variant(field));
  return out;
}

lriso::PipelineConfig pipeline_config(const Settings& s) {
  lriso::PipelineConfig cfg;
  try {
    cfg.variant = lriso::parse_variant(s.at("variant"));
    cfg.feature_space = lriso::parse_feature_space(s.at("features"));
    cfg.scatter_labels = lriso::parse_scatter_labels(s.at("scatter-labels"));
  } catch (const lriso::ArgumentError& e) {
    throw UsageError(e.what());
  }
  const std::string& within = s.at("within");
  if (within == "class-mean" || within == "class_mean") {
    cfg.within_scatter = lriso::WithinScatter::class_mean;
  } else if (within == "global-mean" || within == "global_mean") {
    cfg.within_scatter = lriso::WithinScatter::global_mean;
  } else {
    throw UsageError("--within expects class-mean or global-mean");
  }
  cfg.n_landmarks = static_cast<int>(to_int(s, "landmarks"));
  cfg.latent_dim = static_cast<int>(to_int(s, "dim"));
  cfg.k_nn = static_cast<int>(to_int(s, "knn"));
  cfg.kmeans_max_iter = static_cast<int>(to_int(s, "kmeans-iter"));
  const long long seed = to_int(s, "seed");
  if (seed < 0) throw UsageError("--seed must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.lrr_input_norm = to_real(s, "lrr-input-norm");
  cfg.lrr.beta = to_real(s, "lrr-beta");
  cfg.lrr.lambda_err = to_real(s, "lrr-lambda");
  cfg.lrr.mu0 = to_real(s, "lrr-mu0");
  cfg.lrr.mu_max = to_real(s, "lrr-mu-max");
  cfg.lrr.rho0 = to_real(s, "lrr-rho0");
  cfg.lrr.eps1 = to_real(s, "lrr-eps1");
  cfg.lrr.eps2 = to_real(s, "lrr-eps2");
  cfg.lrr.max_iter = static_cast<int>(to_int(s, "lrr-max-iter"));
  cfg.lrr.eta1_slack = to_real(s, "lrr-eta1-slack");
  cfg.classic_max_points = to_int(s, "classic-max-points");
  cfg.threads = 0;  // LRISO_THREADS; results do not depend on it
  try {
    cfg.validate();
    cfg.lrr.validate();
  } catch (const lriso::ArgumentError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Commands

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;  // beyond --config
  Settings defaults;
  std::set<std::string> required;
};

std::vector<Command> commands() {
  const Settings pdef = pipeline_defaults();
  const auto& pkeys = pipeline_keys();
  auto with_pipeline = [&](std::vector<KeySpec> keys) {
    keys.insert(keys.end(), pkeys.begin(), pkeys.end());
    return keys;
  };
  auto merged = [&](Settings extra) {
    Settings out = pdef;
    for (auto& [k, v] : extra) out[k] = v;
    return out;
  };
  const KeySpec input{"input", "dataset path (csv, idx, image dir) or generator spec such as blobs:classes=8"};
  const KeySpec labels{"labels", "separate label file (labels.csv or 1-D idx)"};
  const KeySpec out{"out", "output directory"};

  std::vector<Command> list;
  list.push_back({"embed", "run one pipeline and write the embedding",
                  with_pipeline({input, labels, out}), merged({{"labels", ""}}), {"input", "out"}});
  list.push_back({"eval", "LOOCV FLDA accuracy of an embedding directory",
                  {{"run", "directory written by embed"},
                   {"labels", "label file (default <run>/labels.csv)"},
                   {"json", "print only the JSON report", true},
                   {"out", "directory for eval.json and manifest.json"}},
                  {{"labels", ""}, {"json", "false"}, {"out", ""}},
                  {"run"}});
  list.push_back({"sweep", "accuracy over a grid of landmark counts or latent dimensions",
                  with_pipeline({input, labels, out,
                                 {"param", "landmarks | dim"},
                                 {"values", "comma-separated grid values"},
                                 {"variants", "comma-separated variants"},
                                 {"seeds", "comma-separated pipeline seeds (default: --seed)"}}),
                  merged({{"labels", ""}, {"param", "landmarks"}, {"variants", "low-rank,clustered"}, {"seeds", ""}}),
                  {"input", "out", "values"}});
  list.push_back({"spectrum", "normalized generalized spectra with and without LRR",
                  with_pipeline({input, labels, out, {"no-lrr", "skip the LRR spectrum", true}}),
                  merged({{"labels", ""}, {"no-lrr", "false"}}), {"input", "out"}});
  list.push_back({"bench", "per-stage wall-clock over increasing N",
                  with_pipeline({{"input", "generator spec without a size key (blobs, swiss, subspaces)"},
                                 out,
                                 {"sizes", "comma-separated ascending N values"},
                                 {"variants", "comma-separated variants"}}),
                  merged({{"variants", "low-rank,classic"}}), {"input", "out", "sizes"}});
  return list;
}

const Command& find_command(const std::string& name) {
  static const std::vector<Command> all = commands();
  for (const auto& c : all) {
    if (c.name == name) return c;
  }
  throw UsageError("unknown command '" + name + "'");
}

std::string normalize_key(std::string key) {
  for (char& ch : key) {
    if (ch == '_') ch = '-';
  }
  return key;
}

Settings read_config_file(const fs::path& path, const Command& cmd) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::set<std::string> known;
  for (const auto& c : commands()) {
    for (const auto& k : c.keys) known.insert(k.name);
  }
  std::set<std::string> own;
  for (const auto& k : cmd.keys) own.insert(k.name);

  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string t) {
      const auto a = t.find_first_not_of(" \t\r");
      const auto b = t.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
    };
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (!known.count(key)) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (key == "out") continue;  // output location stays a command-line decision
    if (own.count(key)) out[key] = value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data

lriso::Dataset load_input(const Settings& s) {
  const std::string& input = s.at("input");
  const auto seed = static_cast<std::uint64_t>(to_int(s, "seed"));
  const std::string labels = s.count("labels") ? s.at("labels") : "";
  std::optional<lriso::Dataset> generated;
  try {
    generated = lriso::generate_from_spec(input, seed);
  } catch (const lriso::ArgumentError& e) {
    throw UsageError(std::string("--input: ") + e.what());
  }
  if (generated) {
    if (!labels.empty()) throw UsageError("--labels cannot be combined with a generator input");
    return *generated;
  }
  const fs::path path(input);
  if (!fs::exists(path)) {
    throw lriso::IOError("input '" + input + "' is neither an existing path nor a generator spec");
  }
  const auto format = lriso::guess_format(path);
  if (format == lriso::FileFormat::idx) {
    return lriso::load_idx(path, labels.empty() ? std::nullopt : std::optional<fs::path>(labels));
  }
  lriso::Dataset data = lriso::load_matrix(path, format);
  if (labels.empty()) return data;
  return lriso::Dataset(data.samples(), lriso::csv::read_labels(labels), data.name(), data.source());
}

// Generator spec with the size key filled in for N, truncated to exactly N rows.
lriso::Dataset sized_input(const std::string& spec, lriso::Index n, std::uint64_t seed) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string params = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto has_key = [&](const std::string& key) {
    for (const auto& f : lriso::csv::split_fields(params)) {
      if (f.rfind(key + "=", 0) == 0) return true;
    }
    return false;
  };
  auto probe = lriso::generate_from_spec(spec, seed);
  if (!probe) throw UsageError("bench needs a generator spec as --input, got '" + spec + "'");
  std::string size_key;
  lriso::Index groups = 1;
  if (name == "swiss" || name == "swissroll") {
    size_key = "n";
  } else if (name == "blobs" || name == "clusters" || name == "subspaces") {
    size_key = "per";
    groups = std::max(1, probe->n_classes());
  } else {
    throw UsageError("bench cannot size generator '" + name + "'");
  }
  if (has_key(size_key)) throw UsageError("bench sets '" + size_key + "' itself; drop it from --input");
  const lriso::Index per = (n + groups - 1) / groups;
  const std::string full = name + ":" + (params.empty() ? "" : params + ",") + size_key + "=" + std::to_string(per);
  lriso::Dataset data = *lriso::generate_from_spec(full, seed);
  if (data.size() == n) return data;
  lriso::RowMatrix rows = data.samples().topRows(n);
  std::optional<lriso::LabelVector> labels;
  if (data.labels()) labels = lriso::LabelVector(data.labels()->begin(), data.labels()->begin() + n);
  return lriso::Dataset(std::move(rows), std::move(labels), data.name(), data.source() + ",n=" + std::to_string(n));
}

// ---------------------------------------------------------------------------
// Manifest

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const Settings& settings,
                    const std::string& checksum, const std::string& started) {
  json config = json::object();
  for (const auto& [k, v] : settings) {
    if (k != "out" && k != "expect-checksum") config[k] = v;
  }
  json m{{"command", command},
         {"config", config},
         {"seed", settings.count("seed") ? to_int(settings, "seed") : 0},
         {"tool_version", kToolVersion},
         {"input_checksum", checksum},
         {"started", started},
         {"finished", utc_now()}};
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

void check_checksum(const Settings& s, const std::string& actual) {
  auto it = s.find("expect-checksum");
  if (it != s.end() && it->second != actual) {
    throw lriso::IOError("input checksum " + actual + " differs from the manifest's " + it->second);
  }
}

// ---------------------------------------------------------------------------

int run_embed(const Settings& s) {
  const std::string started = utc_now();
  const lriso::PipelineConfig cfg = pipeline_config(s);
  const lriso::Dataset data = load_input(s);
  const std::string sum = lriso::checksum(data);
  check_checksum(s, sum);
  const lriso::PipelineResult result = lriso::run_pipeline(data, cfg);
  const fs::path out(s.at("out"));
  lriso::save_result(result, out);
  if (data.labels()) lriso::csv::write_labels(out / "labels.csv", *data.labels());
  write_manifest(out, "embed", s, sum, started);
  std::cout << "embedded " << data.size() << " points into " << cfg.latent_dim << " dimensions ("
            << lriso::to_string(cfg.variant) << ", " << fmt(result.total_seconds) << " s) -> " << out.string() << '\n';
  if (result.lrr_solution && !result.lrr_solution->converged) {
    std::cerr << "note: LRR stopped at the iteration cap (" << result.lrr_solution->iterations << ")\n";
  }
  return 0;
}

int run_eval(const Settings& s) {
  const std::string started = utc_now();
  const fs::path run(s.at("run"));
  const lriso::csv::Table table = lriso::csv::read_table(run / "embedding.csv");
  fs::path labels_path = s.at("labels").empty() ? run / "labels.csv" : fs::path(s.at("labels"));
  if (!fs::exists(labels_path)) {
    throw lriso::IOError("no labels for this embedding (looked for " + labels_path.string() +
                         "); the dataset is unlabeled or pass --labels");
  }
  const lriso::LabelVector labels = lriso::csv::read_labels(labels_path);
  const lriso::Dataset as_data(table.values, labels, "embedding", run.string());
  const std::string sum = lriso::checksum(as_data);
  check_checksum(s, sum);
  const lriso::EvalReport report = lriso::loocv_flda_accuracy(lriso::Matrix(table.values), labels);

  json j{{"accuracy", report.accuracy},
         {"n_correct", report.n_correct},
         {"n_total", report.n_total},
         {"per_class_accuracy", report.per_class_accuracy},
         {"per_class_total", report.per_class_total}};
  if (to_flag(s, "json")) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "accuracy " << fmt(report.accuracy) << " (" << report.n_correct << "/" << report.n_total
              << " correct, LOOCV FLDA)\n";
    for (std::size_t c = 0; c < report.per_class_accuracy.size(); ++c) {
      std::cout << "  class " << c << ": accuracy " << fmt(report.per_class_accuracy[c]) << " over "
                << report.per_class_total[c] << " samples\n";
    }
  }
  if (!s.at("out").empty()) {
    const fs::path out(s.at("out"));
    fs::create_directories(out);
    std::ofstream(out / "eval.json") << j.dump(2) << '\n';
    write_manifest(out, "eval", s, sum, started);
  }
  return 0;
}

int run_sweep(const Settings& s) {
  const std::string started = utc_now();
  const lriso::PipelineConfig base = pipeline_config(s);
  lriso::SweepGrid grid;
  const std::string& param = s.at("param");
  if (param == "landmarks") {
    grid.parameter = lriso::SweepParameter::landmarks;
  } else if (param == "dim" || param == "latent-dim" || param == "latent_dim") {
    grid.parameter = lriso::SweepParameter::latent_dim;
  } else {
    throw UsageError("--param expects landmarks or dim");
  }
  for (long long v : int_list(s, "values")) {
    if (v < 1) throw UsageError("--values must be positive");
    grid.values.push_back(static_cast<int>(v));
  }
  std::vector<lriso::Variant> variants;
  try {
    variants = variant_list(s, "variants");
  } catch (const lriso::ArgumentError& e) {
    throw UsageError(e.what());
  }
  std::vector<std::uint64_t> seeds;
  if (s.at("seeds").empty()) {
    seeds.push_back(base.seed);
  } else {
    for (long long v : int_list(s, "seeds")) {
      if (v < 0) throw UsageError("--seeds must be >= 0");
      seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  const lriso::Dataset data = load_input(s);
  const std::string sum = lriso::checksum(data);
  check_checksum(s, sum);
  if (!data.labels()) throw lriso::ArgumentError("sweep needs a labeled dataset");
  const lriso::SweepTable table = lriso::sweep(data, variants, grid, seeds, base);
  const fs::path out(s.at("out"));
  fs::create_directories(out);
  lriso::write_sweep_csv(table, grid.parameter, out / "sweep.csv");
  write_manifest(out, "sweep", s, sum, started);
  std::size_t failed = 0;
  for (const auto& row : table) failed += row.error.empty() ? 0 : 1;
  std::cout << table.size() << " sweep rows -> " << (out / "sweep.csv").string();
  if (failed) std::cout << " (" << failed << " failed cells, see the error column)";
  std::cout << '\n';
  return 0;
}

int run_spectrum(const Settings& s) {
  const std::string started = utc_now();
  lriso::PipelineConfig cfg = pipeline_config(s);
  const bool no_lrr = to_flag(s, "no-lrr");
  cfg.variant = no_lrr ? lriso::Variant::extended_clustered : lriso::Variant::low_rank;
  cfg.record_spectra = true;
  const lriso::Dataset data = load_input(s);
  const std::string sum = lriso::checksum(data);
  check_checksum(s, sum);
  const lriso::PipelineResult result = lriso::run_pipeline(data, cfg);
  const fs::path out(s.at("out"));
  fs::create_directories(out);
  lriso::csv::write_column(out / "spectrum_before.csv", result.spectrum_before, "eigenvalue");
  if (!no_lrr && result.spectrum_after) {
    lriso::csv::write_column(out / "spectrum_after.csv", *result.spectrum_after, "eigenvalue");
  }
  write_manifest(out, "spectrum", s, sum, started);
  std::cout << "top-5 energy before " << fmt(lriso::top_energy_fraction(result.spectrum_before, 5));
  if (!no_lrr && result.spectrum_after) {
    std::cout << ", after " << fmt(lriso::top_energy_fraction(*result.spectrum_after, 5));
  }
  std::cout << '\n';
  return 0;
}

int run_bench(const Settings& s) {
  const std::string started = utc_now();
  const lriso::PipelineConfig base = pipeline_config(s);
  std::vector<lriso::Index> sizes;
  for (long long v : int_list(s, "sizes")) {
    if (v < 2) throw UsageError("--sizes must be >= 2");
    if (!sizes.empty() && v <= sizes.back()) throw UsageError("--sizes must be strictly ascending");
    sizes.push_back(v);
  }
  std::vector<lriso::Variant> variants;
  try {
    variants = variant_list(s, "variants");
  } catch (const lriso::ArgumentError& e) {
    throw UsageError(e.what());
  }
  const std::string spec = s.at("input");
  const std::uint64_t seed = base.seed;
  const lriso::Dataset first = sized_input(spec, sizes.front(), seed);
  const std::string sum = lriso::checksum(first);
  check_checksum(s, sum);
  const auto rows = lriso::scaling_benchmark(
      [&](lriso::Index n) { return sized_input(spec, n, seed); }, sizes, variants, base);
  const fs::path out(s.at("out"));
  fs::create_directories(out);
  lriso::write_scaling_csv(rows, out / "scaling.csv");
  write_manifest(out, "bench", s, sum, started);
  for (const auto& row : rows) {
    std::cout << lriso::to_string(row.variant) << " N=" << row.n << " total " << fmt(row.total_seconds) << " s\n";
  }
  return 0;
}

int dispatch(const std::string& command, const Settings& s) {
  if (command == "embed") return run_embed(s);
  if (command == "eval") return run_eval(s);
  if (command == "sweep") return run_sweep(s);
  if (command == "spectrum") return run_spectrum(s);
  if (command == "bench") return run_bench(s);
  throw UsageError("unknown command '" + command + "'");
}

// Settings recorded in a manifest, with --out replaced.
std::pair<std::string, Settings> from_manifest(const fs::path& path, const std::string& out) {
  std::ifstream in(path);
  if (!in) throw lriso::IOError("cannot read manifest " + path.string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw lriso::FormatError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!m.contains("command") || !m.contains("config")) throw lriso::FormatError("manifest lacks command/config");
  const std::string command = m["command"].get<std::string>();
  const Command& cmd = find_command(command);
  Settings s = cmd.defaults;
  for (const auto& [k, v] : m["config"].items()) s[k] = v.get<std::string>();
  s["out"] = out;
  if (m.contains("input_checksum")) s["expect-checksum"] = m["input_checksum"].get<std::string>();
  return {command, s};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-Rank Isomap toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  struct Bound {
    const Command* cmd;
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& name : {"embed", "eval", "sweep", "spectrum", "bench"}) {
    auto b = std::make_unique<Bound>();
    b->cmd = &find_command(name);
    b->sub = app.add_subcommand(name, b->cmd->help);
    for (const auto& key : b->cmd->keys) {
      if (key.flag) {
        b->flags[key.name] = false;
        b->sub->add_flag("--" + key.name, b->flags[key.name], key.help);
      } else {
        b->values[key.name];
        b->sub->add_option("--" + key.name, b->values[key.name], key.help);
      }
    }
    if (b->cmd->name != "eval") b->sub->add_option("--config", b->config, "flat key = value file");
    bound.push_back(std::move(b));
  }
  std::string manifest_path, rerun_out;
  CLI::App* rerun = app.add_subcommand("rerun", "replay a run from its manifest.json");
  rerun->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  rerun->add_option("--out", rerun_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  Settings settings;
  try {
    if (rerun->parsed()) {
      std::tie(command, settings) = from_manifest(manifest_path, rerun_out);
    } else {
      for (const auto& b : bound) {
        if (!b->sub->parsed()) continue;
        command = b->cmd->name;
        settings = b->cmd->defaults;
        if (!b->config.empty()) {
          for (const auto& [k, v] : read_config_file(b->config, *b->cmd)) settings[k] = v;
        }
        for (const auto& key : b->cmd->keys) {
          if (b->sub->count("--" + key.name) == 0) continue;
          settings[key.name] = key.flag ? "true" : b->values[key.name];
        }
        for (const auto& req : b->cmd->required) {
          if (settings[req].empty()) throw UsageError(command + " needs --" + req);
        }
      }
    }
    return dispatch(command, settings);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n(run `lriso " << (command.empty() ? "" : command + " ")
              << "--help` for options)\n";
    return 2;
  } catch (const lriso::Error& e) {
    std::cerr << "error";
    if (!e.stage().empty()) std::cerr << " in stage '" << e.stage() << "'";
    std::cerr << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
