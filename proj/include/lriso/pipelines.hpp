#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lriso/dataset.hpp"
#include "lriso/graph.hpp"
#include "lriso/landmarks.hpp"
#include "lriso/lrr.hpp"
#include "lriso/spectral.hpp"

namespace lriso {

enum class Variant { low_rank, extended_clustered, random_landmark, classic };
enum class FeatureSpace { geodesic, ambient };
enum class ScatterLabels { clusters, true_labels };

std::string_view to_string(Variant variant);
std::string_view to_string(FeatureSpace space);
std::string_view to_string(ScatterLabels labels);
// Accepts the CLI spellings (low-rank, clustered, random-landmark, classic,
// plus underscore forms). Throws ArgumentError otherwise.
Variant parse_variant(std::string_view text);
FeatureSpace parse_feature_space(std::string_view text);
ScatterLabels parse_scatter_labels(std::string_view text);

struct PipelineConfig {
  Variant variant = Variant::low_rank;
  int n_landmarks = 20;  // cluster count for the clustered variants
  int latent_dim = 2;
  int k_nn = 10;
  FeatureSpace feature_space = FeatureSpace::geodesic;
  ScatterLabels scatter_labels = ScatterLabels::clusters;
  WithinScatter within_scatter = WithinScatter::class_mean;
  int kmeans_max_iter = 100;
  std::uint64_t seed = 0;
  LrrConfig lrr;
  // S_B is rescaled to this spectral norm before the LRR solve (the solver's
  // thresholds and step test are absolute); 0 feeds S_B unscaled.
  double lrr_input_norm = 100.0;
  // Full generalized spectra with and without LRR, for diagnostics.
  bool record_spectra = true;
  int threads = 0;
  Index classic_max_points = 5000;

  // Checks settings that do not depend on the data.
  void validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds;
};

struct PipelineResult {
  Matrix embedding;  // N x latent_dim
  std::optional<ProjectionMatrix> projection;
  Vector spectrum_before;  // sorted, normalized to max 1
  std::optional<Vector> spectrum_after;
  std::optional<LrrSolution> lrr_solution;
  std::vector<StageTiming> timings;
  double total_seconds = 0.0;
  PipelineConfig config;

  // upstream artifacts
  IndexList landmarks;
  std::optional<ClusterModel> clusters;
  std::optional<ScatterPair> scatter;
  std::optional<Matrix> low_rank_between;  // sym(S_B Z_B)
  Index feature_dim = 0;
  double mds_negative_mass = 0.0;

  // 0 when the stage did not run.
  double seconds(std::string_view stage) const;
};

// Eigenvalues sorted descending and divided by the largest (left as-is when
// the largest is not positive).
Vector normalized_spectrum(const Vector& eigenvalues);

// K-means landmarks, geodesic (or ambient) features, Fisher scatter of the
// cluster pseudo-classes, LRR of S_B, then a partial generalized EVD of
// (sym(S_B Z_B), S_W) for the projection.
PipelineResult low_rank_isomap(const Dataset& data, const PipelineConfig& cfg);

// Same upstream stages, full generalized EVD of (S_B, S_W).
PipelineResult extended_clustered_isomap(const Dataset& data, const PipelineConfig& cfg);

// Random landmarks and landmark MDS with distance-based triangulation of the
// remaining points.
PipelineResult random_landmark_isomap(const Dataset& data, const PipelineConfig& cfg);

// All-pairs graph distances, double centering, classical MDS.
PipelineResult classic_isomap(const Dataset& data, const PipelineConfig& cfg);

PipelineResult run_pipeline(const Dataset& data, const PipelineConfig& cfg);

// embedding.csv, spectrum_before.csv, spectrum_after.csv (when present),
// timings.json, config.json.
void save_result(const PipelineResult& result, const std::filesystem::path& dir);

}  // namespace lriso
