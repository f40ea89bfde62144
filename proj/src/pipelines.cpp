#include "lriso/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lriso/csv.hpp"
#include "lriso/errors.hpp"

namespace lriso {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::low_rank: return "low-rank";
    case Variant::extended_clustered: return "clustered";
    case Variant::random_landmark: return "random-landmark";
    case Variant::classic: return "classic";
  }
  return "?";
}

std::string_view to_string(FeatureSpace space) { return space == FeatureSpace::geodesic ? "geodesic" : "ambient"; }

std::string_view to_string(ScatterLabels labels) {
  return labels == ScatterLabels::clusters ? "clusters" : "labels";
}

Variant parse_variant(std::string_view text) {
  if (text == "low-rank" || text == "low_rank" || text == "lowrank") return Variant::low_rank;
  if (text == "clustered" || text == "extended-clustered" || text == "extended_clustered") {
    return Variant::extended_clustered;
  }
  if (text == "random-landmark" || text == "random_landmark" || text == "random") return Variant::random_landmark;
  if (text == "classic") return Variant::classic;
  throw ArgumentError("unknown variant '" + std::string(text) + "'");
}

FeatureSpace parse_feature_space(std::string_view text) {
  if (text == "geodesic") return FeatureSpace::geodesic;
  if (text == "ambient") return FeatureSpace::ambient;
  throw ArgumentError("unknown feature space '" + std::string(text) + "'");
}

ScatterLabels parse_scatter_labels(std::string_view text) {
  if (text == "clusters") return ScatterLabels::clusters;
  if (text == "labels" || text == "true_labels" || text == "true-labels") return ScatterLabels::true_labels;
  throw ArgumentError("unknown scatter label source '" + std::string(text) + "'");
}

void PipelineConfig::validate() const {
  if (latent_dim < 1) throw ArgumentError("latent_dim must be >= 1");
  if (k_nn < 1) throw ArgumentError("k_nn must be >= 1");
  if (kmeans_max_iter < 1) throw ArgumentError("kmeans_max_iter must be >= 1");
  if (!(lrr_input_norm >= 0.0) || !std::isfinite(lrr_input_norm)) throw ArgumentError("lrr_input_norm must be >= 0");
  if (variant == Variant::low_rank || variant == Variant::extended_clustered) {
    if (n_landmarks < 2) throw ArgumentError("clustered variants need at least 2 landmarks");
    if (feature_space == FeatureSpace::geodesic && latent_dim > n_landmarks) {
      throw ArgumentError("latent_dim exceeds the geodesic feature dimension (= landmarks)");
    }
  }
  if (variant == Variant::random_landmark) {
    if (n_landmarks < 2) throw ArgumentError("random landmark Isomap needs at least 2 landmarks");
    if (latent_dim > n_landmarks) throw ArgumentError("latent_dim exceeds the number of landmarks");
  }
  if (variant == Variant::low_rank) lrr.validate();
}

double PipelineResult::seconds(std::string_view stage) const {
  for (const auto& t : timings)
    if (t.stage == stage) return t.seconds;
  return 0.0;
}

Vector normalized_spectrum(const Vector& eigenvalues) {
  Vector sorted = eigenvalues;
  std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<>());
  if (sorted.size() > 0 && sorted(0) > 0.0) sorted /= sorted(0);
  return sorted;
}

namespace {

using Clock = std::chrono::steady_clock;

class StageRunner {
 public:
  explicit StageRunner(PipelineResult& result) : result_(result), start_(Clock::now()) {}

  template <typename Fn>
  decltype(auto) operator()(const std::string& stage, Fn&& fn) {
    const auto begin = Clock::now();
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<Fn>>) {
        fn();
        record(stage, begin);
      } else {
        auto value = fn();
        record(stage, begin);
        return value;
      }
    } catch (Error& e) {
      if (e.stage().empty()) e.set_stage(stage);
      throw;
    }
  }

  void finish() { result_.total_seconds = std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  void record(const std::string& stage, Clock::time_point begin) {
    result_.timings.push_back({stage, std::chrono::duration<double>(Clock::now() - begin).count()});
  }

  PipelineResult& result_;
  Clock::time_point start_;
};

void check_config(const Dataset& data, const PipelineConfig& cfg, Variant expected) {
  if (cfg.variant != expected) {
    throw ArgumentError("pipeline called with variant '" + std::string(to_string(cfg.variant)) + "', expected '" +
                        std::string(to_string(expected)) + "'");
  }
  try {
    cfg.validate();
  } catch (Error& e) {
    e.set_stage("config");
    throw;
  }
  const bool clustered = expected == Variant::low_rank || expected == Variant::extended_clustered;
  auto fail = [](const std::string& message) {
    ArgumentError error(message);
    error.set_stage("config");
    throw error;
  };
  if (clustered || expected == Variant::random_landmark) {
    if (cfg.n_landmarks > data.size()) fail("more landmarks than observations");
  }
  if (clustered) {
    const Index feature_dim = cfg.feature_space == FeatureSpace::geodesic ? cfg.n_landmarks : data.dim();
    if (cfg.latent_dim > feature_dim) {
      fail("latent_dim " + std::to_string(cfg.latent_dim) + " exceeds feature dimension " + std::to_string(feature_dim));
    }
    if (cfg.scatter_labels == ScatterLabels::true_labels && !data.has_labels()) {
      fail("scatter_labels=labels needs a labeled dataset");
    }
  }
  if (expected == Variant::classic && cfg.latent_dim > data.size()) fail("latent_dim exceeds N");
  if (cfg.k_nn >= data.size()) fail("k_nn must be below N");
}

GeodesicGraph connected_graph(const Dataset& data, const PipelineConfig& cfg) {
  return connect_components(build_knn_graph(data, cfg.k_nn), data);
}

// Stages shared by the two clustered variants: everything up to S_B and S_W.
RowMatrix clustered_upstream(const Dataset& data, const PipelineConfig& cfg, PipelineResult& result,
                             StageRunner& stage) {
  ClusterModel model = stage("kmeans", [&] { return kmeans(data, cfg.n_landmarks, cfg.kmeans_max_iter, cfg.seed); });
  result.landmarks = model.landmark_indices;

  RowMatrix features;
  if (cfg.feature_space == FeatureSpace::geodesic) {
    const GeodesicGraph graph = stage("graph", [&] { return connected_graph(data, cfg); });
    const DistanceMatrix distances =
        stage("shortest_paths", [&] { return shortest_paths_from(graph, result.landmarks, cfg.threads); });
    features = distances.values.transpose();
  } else {
    features = data.samples();
  }
  result.feature_dim = features.cols();

  const std::vector<int>& groups =
      cfg.scatter_labels == ScatterLabels::clusters ? model.assignments : *data.labels();
  result.scatter = stage("scatter", [&] { return scatter_matrices(features, groups, cfg.within_scatter); });
  result.clusters = std::move(model);
  return features;
}

Vector full_spectrum(const Matrix& a, const Matrix& b) {
  return normalized_spectrum(partial_gevd(a, b, a.rows()).eigenvalues);
}

}  // namespace

PipelineResult low_rank_isomap(const Dataset& data, const PipelineConfig& cfg) {
  check_config(data, cfg, Variant::low_rank);
  PipelineResult result;
  result.config = cfg;
  StageRunner stage(result);
  const RowMatrix features = clustered_upstream(data, cfg, result, stage);
  const ScatterPair& pair = *result.scatter;

  result.lrr_solution = stage("lrr", [&] {
    const double norm = spectral_norm(pair.s_b);
    if (norm == 0.0) throw DegenerateInputError("between-class scatter is zero; the clusters share one mean");
    const double scale = cfg.lrr_input_norm > 0.0 ? cfg.lrr_input_norm / norm : 1.0;
    return lrr_solve(pair.s_b * scale, cfg.lrr);
  });
  result.low_rank_between = stage("low_rank_surrogate", [&] {
    const Matrix product = pair.s_b * result.lrr_solution->z;
    return Matrix(0.5 * (product + product.transpose()));
  });
  result.projection = stage("gevd", [&] { return partial_gevd(*result.low_rank_between, pair.s_w, cfg.latent_dim); });
  result.embedding = stage("projection", [&] { return Matrix(features * result.projection->columns); });
  if (cfg.record_spectra) {
    stage("spectra", [&] {
      result.spectrum_before = full_spectrum(pair.s_b, pair.s_w);
      result.spectrum_after = full_spectrum(*result.low_rank_between, pair.s_w);
    });
  }
  stage.finish();
  return result;
}

PipelineResult extended_clustered_isomap(const Dataset& data, const PipelineConfig& cfg) {
  check_config(data, cfg, Variant::extended_clustered);
  PipelineResult result;
  result.config = cfg;
  StageRunner stage(result);
  const RowMatrix features = clustered_upstream(data, cfg, result, stage);
  const ScatterPair& pair = *result.scatter;

  const ProjectionMatrix full = stage("gevd", [&] { return partial_gevd(pair.s_b, pair.s_w, pair.feature_dim()); });
  ProjectionMatrix truncated;
  truncated.columns = full.columns.leftCols(cfg.latent_dim);
  truncated.eigenvalues = full.eigenvalues.head(cfg.latent_dim);
  truncated.ridge = full.ridge;
  result.projection = std::move(truncated);
  result.embedding = stage("projection", [&] { return Matrix(features * result.projection->columns); });
  result.spectrum_before = normalized_spectrum(full.eigenvalues);
  stage.finish();
  return result;
}

PipelineResult random_landmark_isomap(const Dataset& data, const PipelineConfig& cfg) {
  check_config(data, cfg, Variant::random_landmark);
  PipelineResult result;
  result.config = cfg;
  StageRunner stage(result);

  result.landmarks = stage("landmarks", [&] {
    // positions are drawn in canonical row order so the set follows the points, not their order
    const IndexList order = canonical_order(data.samples());
    IndexList picked = random_landmarks(data.size(), cfg.n_landmarks, cfg.seed);
    for (Index& p : picked) p = order[static_cast<std::size_t>(p)];
    std::sort(picked.begin(), picked.end());
    return picked;
  });
  const GeodesicGraph graph = stage("graph", [&] { return connected_graph(data, cfg); });
  const DistanceMatrix distances =
      stage("shortest_paths", [&] { return shortest_paths_from(graph, result.landmarks, cfg.threads); });
  result.feature_dim = static_cast<Index>(result.landmarks.size());

  result.embedding = stage("mds", [&] {
    const Index l = static_cast<Index>(result.landmarks.size());
    const Matrix squared = distances.values.array().square().matrix();  // L x N
    Matrix between(l, l);
    for (Index c = 0; c < l; ++c) between.col(c) = distances.values.col(result.landmarks[static_cast<std::size_t>(c)]);
    between = between.cwiseMin(between.transpose()).eval();
    const MdsEmbedding landmark_mds = classical_mds(double_center(between), cfg.latent_dim);
    result.mds_negative_mass = landmark_mds.negative_mass;
    result.spectrum_before = normalized_spectrum(landmark_mds.eigenvalues);

    // y = -1/2 L# (delta_x - delta_mean), with L# rows v_k^T / sqrt(lambda_k)
    const Vector mean_sq = between.array().square().matrix().rowwise().mean();
    Matrix pseudo = Matrix::Zero(cfg.latent_dim, l);
    for (Index k = 0; k < cfg.latent_dim; ++k) {
      const double lambda = landmark_mds.eigenvalues(k);
      if (lambda <= 0.0) continue;
      pseudo.row(k) = landmark_mds.coordinates.col(k).transpose() / lambda;
    }
    return Matrix((-0.5 * pseudo * (squared.colwise() - mean_sq)).transpose());
  });
  stage.finish();
  return result;
}

PipelineResult classic_isomap(const Dataset& data, const PipelineConfig& cfg) {
  check_config(data, cfg, Variant::classic);
  if (data.size() > cfg.classic_max_points) {
    ResourceError error("classic Isomap needs an N x N matrix; N=" + std::to_string(data.size()) +
                        " exceeds the limit of " + std::to_string(cfg.classic_max_points));
    error.set_stage("config");
    throw error;
  }
  PipelineResult result;
  result.config = cfg;
  StageRunner stage(result);
  const GeodesicGraph graph = stage("graph", [&] { return connected_graph(data, cfg); });
  const DistanceMatrix distances = stage("shortest_paths", [&] { return full_geodesic_matrix(graph, cfg.threads); });
  const GramMatrix gram = stage("double_center", [&] { return double_center(distances); });
  const MdsEmbedding mds = stage("mds", [&] { return classical_mds(gram, cfg.latent_dim); });
  result.embedding = mds.coordinates;
  result.mds_negative_mass = mds.negative_mass;
  result.spectrum_before = normalized_spectrum(mds.eigenvalues);
  result.feature_dim = data.size();
  stage.finish();
  return result;
}

PipelineResult run_pipeline(const Dataset& data, const PipelineConfig& cfg) {
  switch (cfg.variant) {
    case Variant::low_rank: return low_rank_isomap(data, cfg);
    case Variant::extended_clustered: return extended_clustered_isomap(data, cfg);
    case Variant::random_landmark: return random_landmark_isomap(data, cfg);
    case Variant::classic: return classic_isomap(data, cfg);
  }
  throw ArgumentError("unknown variant");
}

void save_result(const PipelineResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> header;
  for (Index c = 0; c < result.embedding.cols(); ++c) header.push_back("y" + std::to_string(c));
  csv::write_matrix(dir / "embedding.csv", result.embedding, header);
  csv::write_column(dir / "spectrum_before.csv", result.spectrum_before, "eigenvalue");
  if (result.spectrum_after) csv::write_column(dir / "spectrum_after.csv", *result.spectrum_after, "eigenvalue");

  nlohmann::ordered_json timings;
  for (const auto& t : result.timings) timings["stages"][t.stage] = t.seconds;
  timings["total"] = result.total_seconds;
  std::ofstream(dir / "timings.json") << timings.dump(2) << '\n';

  const PipelineConfig& cfg = result.config;
  nlohmann::ordered_json config{
      {"variant", to_string(cfg.variant)},
      {"n_landmarks", cfg.n_landmarks},
      {"latent_dim", cfg.latent_dim},
      {"k_nn", cfg.k_nn},
      {"feature_space", to_string(cfg.feature_space)},
      {"scatter_labels", to_string(cfg.scatter_labels)},
      {"within_scatter", cfg.within_scatter == WithinScatter::class_mean ? "class_mean" : "global_mean"},
      {"kmeans_max_iter", cfg.kmeans_max_iter},
      {"seed", cfg.seed},
      {"lrr_input_norm", cfg.lrr_input_norm},
      {"lrr",
       {{"beta", cfg.lrr.beta},
        {"lambda", cfg.lrr.lambda_err},
        {"mu0", cfg.lrr.mu0},
        {"mu_max", cfg.lrr.mu_max},
        {"rho0", cfg.lrr.rho0},
        {"eps1", cfg.lrr.eps1},
        {"eps2", cfg.lrr.eps2},
        {"max_iter", cfg.lrr.max_iter},
        {"eta1_slack", cfg.lrr.eta1_slack}}}};
  if (result.lrr_solution) {
    config["lrr_result"] = {{"converged", result.lrr_solution->converged},
                            {"iterations", result.lrr_solution->iterations},
                            {"final_residual", result.lrr_solution->final_residual},
                            {"effective_rank", result.lrr_solution->effective_rank}};
  }
  config["landmarks"] = result.landmarks;
  std::ofstream(dir / "config.json") << config.dump(2) << '\n';
}

}  // namespace lriso
