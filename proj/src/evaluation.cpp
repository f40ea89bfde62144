#include "lriso/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "lriso/csv.hpp"
#include "lriso/errors.hpp"

namespace lriso {

EvalReport loocv_flda_accuracy(const Matrix& latent, const LabelVector& labels) {
  const auto start = std::chrono::steady_clock::now();
  const Index n = latent.rows();
  const Index m = latent.cols();
  if (static_cast<Index>(labels.size()) != n) throw ArgumentError("one label per latent row is required");
  if (n < 3) throw ArgumentError("leave-one-out needs at least 3 observations");
  if (!latent.allFinite()) throw ArgumentError("latent coordinates must be finite");

  std::map<int, Index> counts;
  for (int label : labels) ++counts[label];
  if (counts.size() < 2) throw ArgumentError("leave-one-out FLDA needs at least 2 classes");
  for (const auto& [label, count] : counts) {
    if (count < 2) throw ArgumentError("class " + std::to_string(label) + " has a single member");
  }
  std::map<int, std::size_t> slot;
  for (const auto& [label, count] : counts) slot.emplace(label, slot.size());

  const RowMatrix rows = latent;
  const auto n_classes = static_cast<Index>(counts.size());
  const Index n_directions = std::min<Index>(n_classes - 1, m);

  EvalReport report;
  report.n_total = n;
  report.per_class_total.assign(counts.size(), 0);
  std::vector<Index> per_class_correct(counts.size(), 0);

  RowMatrix train(n - 1, m);
  LabelVector train_labels(static_cast<std::size_t>(n - 1));
  for (Index held = 0; held < n; ++held) {
    for (Index i = 0, r = 0; i < n; ++i) {
      if (i == held) continue;
      train.row(r) = rows.row(i);
      train_labels[static_cast<std::size_t>(r)] = labels[static_cast<std::size_t>(i)];
      ++r;
    }
    const ScatterPair pair = scatter_matrices(train, train_labels);
    const ProjectionMatrix fisher = partial_gevd(pair.s_b, pair.s_w, n_directions);
    const RowMatrix projected_means = pair.class_means * fisher.columns;
    const Eigen::RowVectorXd projected = rows.row(held) * fisher.columns;

    Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < projected_means.rows(); ++c) {
      const double d2 = (projected_means.row(c) - projected).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
    const int truth = labels[static_cast<std::size_t>(held)];
    const std::size_t truth_slot = slot[truth];
    ++report.per_class_total[truth_slot];
    if (pair.class_ids[static_cast<std::size_t>(best)] == truth) {
      ++report.n_correct;
      ++per_class_correct[truth_slot];
    }
  }
  report.accuracy = static_cast<double>(report.n_correct) / static_cast<double>(n);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    report.per_class_accuracy.push_back(static_cast<double>(per_class_correct[c]) /
                                        static_cast<double>(report.per_class_total[c]));
  }
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SpectrumReport spectrum_report(const ScatterPair& pair, const LrrSolution* lrr) {
  SpectrumReport report;
  const Index f = pair.feature_dim();
  report.before = normalized_spectrum(partial_gevd(pair.s_b, pair.s_w, f).eigenvalues);
  if (lrr) {
    const Matrix product = pair.s_b * lrr->z;
    const Matrix low_rank = 0.5 * (product + product.transpose());
    report.after = normalized_spectrum(partial_gevd(low_rank, pair.s_w, f).eigenvalues);
  }
  return report;
}

double top_energy_fraction(const Vector& spectrum, Index k) {
  const double total = spectrum.cwiseMax(0.0).sum();
  if (total <= 0.0) return 0.0;
  return spectrum.head(std::min(k, spectrum.size())).cwiseMax(0.0).sum() / total;
}

SweepTable sweep(const Dataset& data, const std::vector<Variant>& variants, const SweepGrid& grid,
                 const std::vector<std::uint64_t>& seeds, const PipelineConfig& base) {
  if (grid.values.empty()) throw ArgumentError("sweep grid is empty");
  if (seeds.empty()) throw ArgumentError("sweep needs at least one seed");
  if (!data.has_labels()) throw ArgumentError("sweeps evaluate accuracy and need a labeled dataset");

  SweepTable table;
  for (Variant variant : variants) {
    for (int value : grid.values) {
      for (std::uint64_t seed : seeds) {
        PipelineConfig cfg = base;
        cfg.variant = variant;
        cfg.seed = seed;
        if (grid.parameter == SweepParameter::landmarks) {
          cfg.n_landmarks = value;
        } else {
          cfg.latent_dim = value;
        }
        SweepRow row{variant, value, std::numeric_limits<double>::quiet_NaN(), 0.0, cfg.latent_dim,
                     cfg.n_landmarks, seed, {}};
        const auto start = std::chrono::steady_clock::now();
        try {
          const PipelineResult result = run_pipeline(data, cfg);
          row.accuracy = loocv_flda_accuracy(result.embedding, *data.labels()).accuracy;
        } catch (const Error& e) {
          row.error = e.stage().empty() ? e.what() : e.stage() + ": " + e.what();
        }
        row.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        table.push_back(std::move(row));
      }
    }
  }
  return table;
}

void write_sweep_csv(const SweepTable& table, SweepParameter parameter, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << "variant,parameter,value,accuracy,wall_clock_s,latent_dim,n_landmarks,seed,error\n";
  for (const auto& row : table) {
    std::string error = row.error;
    for (char& ch : error)
      if (ch == ',' || ch == '\n') ch = ';';
    out << to_string(row.variant) << ',' << (parameter == SweepParameter::landmarks ? "landmarks" : "dim") << ','
        << row.value << ',' << (std::isnan(row.accuracy) ? std::string("nan") : csv::format_double(row.accuracy))
        << ',' << csv::format_double(row.wall_clock_s) << ',' << row.latent_dim << ',' << row.n_landmarks << ','
        << row.seed << ',' << error << '\n';
  }
}

const std::vector<std::string>& scaling_stage_columns() {
  static const std::vector<std::string> columns{"landmarks", "kmeans", "graph", "shortest_paths", "scatter",
                                                "lrr", "low_rank_surrogate", "gevd", "projection", "spectra",
                                                "double_center", "mds"};
  return columns;
}

std::vector<ScalingRow> scaling_benchmark(const std::function<Dataset(Index)>& make_dataset,
                                          const std::vector<Index>& sizes, const std::vector<Variant>& variants,
                                          const PipelineConfig& base) {
  if (sizes.empty()) throw ArgumentError("scaling benchmark needs at least one size");
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k] <= sizes[k - 1]) throw ArgumentError("scaling sizes must be strictly ascending");
  }
  std::vector<ScalingRow> rows;
  for (Variant variant : variants) {
    PipelineConfig cfg = base;
    cfg.variant = variant;
    run_pipeline(make_dataset(sizes.front()), cfg);  // warm-up, discarded
    for (Index n : sizes) {
      const Dataset data = make_dataset(n);
      const PipelineResult result = run_pipeline(data, cfg);
      rows.push_back({variant, n, result.timings, result.total_seconds});
    }
  }
  return rows;
}

void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << "variant,n";
  for (const auto& stage : scaling_stage_columns()) out << ',' << stage;
  out << ",total\n";
  for (const auto& row : rows) {
    out << to_string(row.variant) << ',' << row.n;
    for (const auto& stage : scaling_stage_columns()) {
      double seconds = 0.0;
      for (const auto& t : row.stages)
        if (t.stage == stage) seconds = t.seconds;
      out << ',' << csv::format_double(seconds);
    }
    out << ',' << csv::format_double(row.total_seconds) << '\n';
  }
}

}  // namespace lriso
