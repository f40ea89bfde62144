#include "lriso/landmarks.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "lriso/errors.hpp"
#include "lriso/kernels.hpp"

namespace lriso {
namespace {

// Returns the inertia of the new assignment.
double assign(const RowMatrix& points, const RowMatrix& centroids, std::vector<int>& assignments,
              std::vector<double>& distances) {
  const auto& kernels = kernels::active();
  const auto dim = static_cast<std::size_t>(points.cols());
  const auto k = static_cast<std::size_t>(centroids.rows());
  std::vector<double> to_centroids(k);
  double inertia = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    kernels.squared_distances_to_rows(points.row(i).data(), centroids.data(), k, dim, to_centroids.data());
    const auto best = std::min_element(to_centroids.begin(), to_centroids.end()) - to_centroids.begin();
    assignments[static_cast<std::size_t>(i)] = static_cast<int>(best);
    distances[static_cast<std::size_t>(i)] = to_centroids[static_cast<std::size_t>(best)];
    inertia += to_centroids[static_cast<std::size_t>(best)];
  }
  return inertia;
}

RowMatrix plus_plus_seeds(const RowMatrix& points, int n_clusters, std::mt19937_64& rng) {
  const Index n = points.rows();
  const auto dim = static_cast<std::size_t>(points.cols());
  const auto& kernels = kernels::active();
  RowMatrix centroids(n_clusters, points.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  Index first = std::uniform_int_distribution<Index>(0, n - 1)(rng);
  centroids.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  std::vector<double> nearest(static_cast<std::size_t>(n));
  kernels.squared_distances_to_rows(points.row(first).data(), points.data(), static_cast<std::size_t>(n), dim,
                                    nearest.data());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < n_clusters; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i)
      if (!chosen[static_cast<std::size_t>(i)]) total += nearest[static_cast<std::size_t>(i)];
    Index pick = -1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double running = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (chosen[static_cast<std::size_t>(i)]) continue;
        running += nearest[static_cast<std::size_t>(i)];
        pick = i;
        if (running > target && nearest[static_cast<std::size_t>(i)] > 0.0) break;
      }
    } else {
      // every remaining point coincides with a centre: pick uniformly among them
      std::vector<Index> left;
      for (Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) left.push_back(i);
      pick = left[std::uniform_int_distribution<std::size_t>(0, left.size() - 1)(rng)];
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    centroids.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i) {
      const double d2 = kernels.squared_distance(points.row(i).data(), points.row(pick).data(), dim);
      nearest[static_cast<std::size_t>(i)] = std::min(nearest[static_cast<std::size_t>(i)], d2);
    }
  }
  return centroids;
}

}  // namespace

ClusterModel kmeans(const Dataset& data, int n_clusters, int max_iter, std::uint64_t seed) {
  return kmeans(data.samples(), n_clusters, max_iter, seed);
}

IndexList canonical_order(const RowMatrix& points) {
  IndexList order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double* ra = points.row(a).data();
    const double* rb = points.row(b).data();
    return std::lexicographical_compare(ra, ra + points.cols(), rb, rb + points.cols());
  });
  return order;
}

ClusterModel kmeans(const RowMatrix& input, int n_clusters, int max_iter, std::uint64_t seed) {
  const Index n = input.rows();
  if (n_clusters < 2 || n_clusters > n) {
    throw ArgumentError("n_clusters must satisfy 2 <= n_clusters <= N (n_clusters=" + std::to_string(n_clusters) +
                        ", N=" + std::to_string(n) + ")");
  }
  if (max_iter < 1) throw ArgumentError("max_iter must be >= 1");

  // Lloyd runs on the rows in lexicographic order, so the result does not
  // depend on how the caller ordered the observations.
  const IndexList order = canonical_order(input);
  RowMatrix points(n, input.cols());
  for (Index r = 0; r < n; ++r) points.row(r) = input.row(order[static_cast<std::size_t>(r)]);

  std::mt19937_64 rng(seed);
  ClusterModel model;
  model.centroids = plus_plus_seeds(points, n_clusters, rng);
  model.assignments.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> previous;
  std::vector<double> distances(static_cast<std::size_t>(n));
  std::vector<Index> counts(static_cast<std::size_t>(n_clusters));

  for (int iter = 0; iter < max_iter; ++iter) {
    previous = model.assignments;
    assign(points, model.centroids, model.assignments, distances);

    std::fill(counts.begin(), counts.end(), 0);
    for (int a : model.assignments) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < n_clusters; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      // the point farthest from its centroid, taken from a cluster that can spare it
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (counts[static_cast<std::size_t>(model.assignments[si])] < 2) continue;
        if (far < 0 || distances[si] > distances[static_cast<std::size_t>(far)]) far = i;
      }
      --counts[static_cast<std::size_t>(model.assignments[static_cast<std::size_t>(far)])];
      model.assignments[static_cast<std::size_t>(far)] = c;
      distances[static_cast<std::size_t>(far)] = 0.0;
      counts[static_cast<std::size_t>(c)] = 1;
    }

    model.centroids.setZero();
    for (Index i = 0; i < n; ++i) model.centroids.row(model.assignments[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < n_clusters; ++c) model.centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double inertia = 0.0;
    const auto dim = static_cast<std::size_t>(points.cols());
    for (Index i = 0; i < n; ++i) {
      inertia += kernels::active().squared_distance(
          points.row(i).data(), model.centroids.row(model.assignments[static_cast<std::size_t>(i)]).data(), dim);
    }
    model.inertia = inertia;
    model.inertia_trace.push_back(inertia);
    model.iterations_run = iter + 1;
    if (model.assignments == previous) {
      model.converged = true;
      break;
    }
  }
  // medoid ties go to the lowest canonical position, again independent of input order
  model = snap_to_medoids(std::move(model), points);
  for (Index& l : model.landmark_indices) l = order[static_cast<std::size_t>(l)];
  std::vector<int> assignments(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    assignments[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = model.assignments[static_cast<std::size_t>(r)];
  }
  model.assignments = std::move(assignments);
  return model;
}

ClusterModel snap_to_medoids(ClusterModel model, const Dataset& data) {
  return snap_to_medoids(std::move(model), data.samples());
}

ClusterModel snap_to_medoids(ClusterModel model, const RowMatrix& points) {
  if (static_cast<Index>(model.assignments.size()) != points.rows()) {
    throw ArgumentError("cluster model was fitted on a different dataset");
  }
  const auto k = static_cast<std::size_t>(model.n_clusters());
  const auto dim = static_cast<std::size_t>(points.cols());
  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  model.landmark_indices.assign(k, -1);
  for (Index i = 0; i < points.rows(); ++i) {
    const auto c = static_cast<std::size_t>(model.assignments[static_cast<std::size_t>(i)]);
    const double d2 = kernels::active().squared_distance(points.row(i).data(), model.centroids.row(static_cast<Index>(c)).data(), dim);
    if (d2 < best[c]) {
      best[c] = d2;
      model.landmark_indices[c] = i;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (model.landmark_indices[c] < 0) throw ArgumentError("cluster " + std::to_string(c) + " is empty");
  }
  return model;
}

IndexList random_landmarks(Index n, Index count, std::uint64_t seed) {
  if (count < 0 || count > n) {
    throw ArgumentError("cannot draw " + std::to_string(count) + " landmarks from " + std::to_string(n) + " points");
  }
  std::mt19937_64 rng(seed);
  IndexList pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index k = 0; k < count; ++k) {
    std::uniform_int_distribution<Index> pick(k, n - 1);
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace lriso
