#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lriso/dataset.hpp"
#include "lriso/lrr.hpp"
#include "lriso/pipelines.hpp"
#include "lriso/spectral.hpp"

namespace lriso {

struct EvalReport {
  double accuracy = 0.0;
  Index n_correct = 0;
  Index n_total = 0;
  std::vector<double> per_class_accuracy;
  std::vector<Index> per_class_total;
  double wall_clock_s = 0.0;
};

// Leave-one-out FLDA: for each held-out row, Fisher discriminants are fit on
// the other N-1 rows (min(C-1, m) directions) and the row is assigned to the
// nearest projected class mean (lowest class id on ties). The embedding
// itself is not refit per fold.
EvalReport loocv_flda_accuracy(const Matrix& latent, const LabelVector& labels);

struct SpectrumReport {
  Vector before;
  std::optional<Vector> after;
};

// Normalized generalized spectra of (S_B, S_W) and, with an LRR solution,
// of (sym(S_B Z), S_W).
SpectrumReport spectrum_report(const ScatterPair& pair, const LrrSolution* lrr = nullptr);

// Sum of the first k entries over the sum of all positive entries.
double top_energy_fraction(const Vector& spectrum, Index k);

enum class SweepParameter { landmarks, latent_dim };

struct SweepGrid {
  SweepParameter parameter = SweepParameter::landmarks;
  std::vector<int> values;
};

struct SweepRow {
  Variant variant;
  int value;
  double accuracy;  // NaN when the cell failed
  double wall_clock_s;
  int latent_dim;
  int n_landmarks;
  std::uint64_t seed;
  std::string error;
};

using SweepTable = std::vector<SweepRow>;

// Runs every variant at every grid value and seed, in that nesting order
// (variant, value, seed). A failing cell is recorded, not rethrown.
SweepTable sweep(const Dataset& data, const std::vector<Variant>& variants, const SweepGrid& grid,
                 const std::vector<std::uint64_t>& seeds, const PipelineConfig& base);

void write_sweep_csv(const SweepTable& table, SweepParameter parameter, const std::filesystem::path& path);

struct ScalingRow {
  Variant variant;
  Index n;
  std::vector<StageTiming> stages;
  double total_seconds;
};

// One pipeline run per (variant, size), after a discarded warm-up run at the
// smallest size. `make_dataset` builds the data for a given N.
std::vector<ScalingRow> scaling_benchmark(const std::function<Dataset(Index)>& make_dataset,
                                          const std::vector<Index>& sizes, const std::vector<Variant>& variants,
                                          const PipelineConfig& base);

// Columns: variant,n,<fixed stage list>,total
void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::filesystem::path& path);
const std::vector<std::string>& scaling_stage_columns();

}  // namespace lriso
