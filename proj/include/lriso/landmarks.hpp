#pragma once

#include <cstdint>
#include <vector>

#include "lriso/dataset.hpp"
#include "lriso/types.hpp"

namespace lriso {

struct ClusterModel {
  RowMatrix centroids;           // n_clusters x F
  std::vector<int> assignments;  // one cluster id per point
  double inertia = 0.0;          // sum of squared distances to assigned centroids
  IndexList landmark_indices;    // data point nearest each centroid, within its cluster
  int iterations_run = 0;
  bool converged = false;
  // Inertia after every centroid update; non-increasing.
  std::vector<double> inertia_trace;

  Index n_clusters() const noexcept { return centroids.rows(); }
};

// Row indices sorted lexicographically by row contents (stable).
IndexList canonical_order(const RowMatrix& points);

// Lloyd iterations from k-means++ seeding until the assignment stops changing
// or max_iter updates have run. Empty clusters are reseeded with the point
// farthest from its own centroid. Nearest-centroid ties go to the lowest
// cluster index. The fit runs on canonically ordered rows, so permuting the
// input permutes the assignments and nothing else. landmark_indices are
// filled by snap_to_medoids.
ClusterModel kmeans(const RowMatrix& points, int n_clusters, int max_iter, std::uint64_t seed);
ClusterModel kmeans(const Dataset& data, int n_clusters, int max_iter, std::uint64_t seed);

// For every cluster, the member closest to its centroid (lowest index on ties).
ClusterModel snap_to_medoids(ClusterModel model, const RowMatrix& points);
ClusterModel snap_to_medoids(ClusterModel model, const Dataset& data);

// `count` distinct indices drawn uniformly from [0, n), returned ascending.
IndexList random_landmarks(Index n, Index count, std::uint64_t seed);

}  // namespace lriso
