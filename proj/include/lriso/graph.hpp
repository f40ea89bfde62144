#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "lriso/dataset.hpp"
#include "lriso/types.hpp"

namespace lriso {

struct Edge {
  Index i;
  Index j;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  Index node;
  double weight;
};

// Sparse symmetric k-NN graph with Euclidean edge weights. Adjacency lists
// are sorted by node index.
class GeodesicGraph {
 public:
  GeodesicGraph(Index n_nodes, int k_nn);

  Index n_nodes() const noexcept { return static_cast<Index>(adjacency_.size()); }
  int k_nn() const noexcept { return k_nn_; }
  const std::vector<Neighbor>& neighbors(Index node) const { return adjacency_[static_cast<std::size_t>(node)]; }
  const std::vector<Edge>& bridges() const noexcept { return bridges_; }

  // Undirected edges with i < j, ordered by (i, j).
  std::vector<Edge> edges() const;
  Index n_edges() const;
  bool has_edge(Index i, Index j) const;

  // Inserts (i, j) and (j, i); a no-op if the edge already exists.
  void add_edge(Index i, Index j, double weight);
  void add_bridge(Index i, Index j, double weight);

  // Component id per node, numbered in order of each component's lowest node.
  std::vector<Index> components(Index* n_components = nullptr) const;
  bool connected() const;

 private:
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<Edge> bridges_;
  int k_nn_;
};

enum class DistanceKind { landmark_to_all, all_pairs };

// Row s holds graph distances from sources[s] to every node.
struct DistanceMatrix {
  Matrix values;
  IndexList sources;
  DistanceKind kind = DistanceKind::landmark_to_all;
};

// Each node is joined to its k_nn nearest Euclidean neighbours (ties broken by
// lower index) and the edge set is symmetrized by union. Throws
// DegenerateInputError when two observations coincide.
GeodesicGraph build_knn_graph(const Dataset& data, int k_nn);
GeodesicGraph build_knn_graph(const RowMatrix& points, int k_nn);

// Repeatedly joins the two closest components by their minimum-distance pair
// until one component remains. The added edges are recorded as bridges, in
// the order the greedy merge would add them (ascending weight).
GeodesicGraph connect_components(GeodesicGraph graph, const Dataset& data);
GeodesicGraph connect_components(GeodesicGraph graph, const RowMatrix& points);

// Dijkstra from each source. `threads` <= 0 uses default_thread_count().
DistanceMatrix shortest_paths_from(const GeodesicGraph& graph, std::span<const Index> sources,
                                   int threads = 0);

// All pairs via one Dijkstra per node, symmetrized by taking the smaller of
// d(i, j) and d(j, i).
DistanceMatrix full_geodesic_matrix(const GeodesicGraph& graph, int threads = 0);

// Floyd-Warshall all-pairs reference; O(N^3).
DistanceMatrix floyd_warshall(const GeodesicGraph& graph);

// `i,j,weight` per undirected edge.
void write_edge_list(const GeodesicGraph& graph, const std::filesystem::path& path);

// From LRISO_THREADS, else 1.
int default_thread_count();

}  // namespace lriso
