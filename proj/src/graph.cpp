#include "lriso/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <thread>

#include "lriso/csv.hpp"
#include "lriso/errors.hpp"
#include "lriso/kernels.hpp"

namespace lriso {

GeodesicGraph::GeodesicGraph(Index n_nodes, int k_nn)
    : adjacency_(static_cast<std::size_t>(n_nodes)), k_nn_(k_nn) {}

std::vector<Edge> GeodesicGraph::edges() const {
  std::vector<Edge> list;
  for (Index i = 0; i < n_nodes(); ++i)
    for (const Neighbor& nb : neighbors(i))
      if (i < nb.node) list.push_back({i, nb.node, nb.weight});
  return list;
}

Index GeodesicGraph::n_edges() const {
  Index twice = 0;
  for (const auto& list : adjacency_) twice += static_cast<Index>(list.size());
  return twice / 2;
}

bool GeodesicGraph::has_edge(Index i, Index j) const {
  const auto& list = neighbors(i);
  auto it = std::lower_bound(list.begin(), list.end(), j,
                             [](const Neighbor& nb, Index node) { return nb.node < node; });
  return it != list.end() && it->node == j;
}

void GeodesicGraph::add_edge(Index i, Index j, double weight) {
  if (i == j || i < 0 || j < 0 || i >= n_nodes() || j >= n_nodes()) {
    throw ArgumentError("invalid edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  if (!(weight > 0.0) || !std::isfinite(weight)) throw DegenerateInputError("edge weights must be positive and finite");
  auto insert = [this](Index from, Index to, double w) {
    auto& list = adjacency_[static_cast<std::size_t>(from)];
    auto it = std::lower_bound(list.begin(), list.end(), to,
                               [](const Neighbor& nb, Index node) { return nb.node < node; });
    if (it != list.end() && it->node == to) return false;
    list.insert(it, Neighbor{to, w});
    return true;
  };
  if (insert(i, j, weight)) insert(j, i, weight);
}

void GeodesicGraph::add_bridge(Index i, Index j, double weight) {
  add_edge(i, j, weight);
  bridges_.push_back({std::min(i, j), std::max(i, j), weight});
}

std::vector<Index> GeodesicGraph::components(Index* n_components) const {
  std::vector<Index> label(adjacency_.size(), -1);
  Index next = 0;
  std::vector<Index> stack;
  for (Index start = 0; start < n_nodes(); ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0) continue;
    label[static_cast<std::size_t>(start)] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : neighbors(u)) {
        if (label[static_cast<std::size_t>(nb.node)] < 0) {
          label[static_cast<std::size_t>(nb.node)] = next;
          stack.push_back(nb.node);
        }
      }
    }
    ++next;
  }
  if (n_components) *n_components = next;
  return label;
}

bool GeodesicGraph::connected() const {
  Index count = 0;
  components(&count);
  return count <= 1;
}

GeodesicGraph build_knn_graph(const Dataset& data, int k_nn) { return build_knn_graph(data.samples(), k_nn); }

GeodesicGraph build_knn_graph(const RowMatrix& points, int k_nn) {
  const Index n = points.rows();
  const auto dim = static_cast<std::size_t>(points.cols());
  if (k_nn < 1 || k_nn >= n) {
    throw ArgumentError("k_nn must satisfy 1 <= k_nn < N (k_nn=" + std::to_string(k_nn) +
                        ", N=" + std::to_string(n) + ")");
  }

  // Bounded max-heaps keyed by (squared distance, index): the k smallest keys
  // survive regardless of insertion order.
  using Key = std::pair<double, Index>;
  std::vector<std::priority_queue<Key>> nearest(static_cast<std::size_t>(n));
  auto offer = [k_nn](std::priority_queue<Key>& heap, Key key) {
    if (static_cast<int>(heap.size()) < k_nn) {
      heap.push(key);
    } else if (key < heap.top()) {
      heap.pop();
      heap.push(key);
    }
  };

  const auto& kernels = kernels::active();
  std::vector<double> row_distances(static_cast<std::size_t>(n));
  for (Index i = 0; i + 1 < n; ++i) {
    const Index rest = n - i - 1;
    kernels.squared_distances_to_rows(points.row(i).data(), points.row(i + 1).data(),
                                      static_cast<std::size_t>(rest), dim, row_distances.data());
    for (Index off = 0; off < rest; ++off) {
      const Index j = i + 1 + off;
      const double d2 = row_distances[static_cast<std::size_t>(off)];
      if (d2 == 0.0) {
        throw DegenerateInputError("observations " + std::to_string(i) + " and " + std::to_string(j) +
                                   " coincide; deduplicate the input");
      }
      offer(nearest[static_cast<std::size_t>(i)], {d2, j});
      offer(nearest[static_cast<std::size_t>(j)], {d2, i});
    }
  }

  GeodesicGraph graph(n, k_nn);
  for (Index i = 0; i < n; ++i) {
    auto& heap = nearest[static_cast<std::size_t>(i)];
    while (!heap.empty()) {
      graph.add_edge(i, heap.top().second, std::sqrt(heap.top().first));
      heap.pop();
    }
  }
  return graph;
}

GeodesicGraph connect_components(GeodesicGraph graph, const Dataset& data) {
  return connect_components(std::move(graph), data.samples());
}

GeodesicGraph connect_components(GeodesicGraph graph, const RowMatrix& points) {
  if (points.rows() != graph.n_nodes()) throw ArgumentError("graph and data sizes differ");
  Index n_components = 0;
  const std::vector<Index> component = graph.components(&n_components);
  if (n_components <= 1) return graph;

  // Greedy merging of the closest components adds exactly the minimum
  // spanning tree of the contracted single-linkage graph, so grow that tree
  // Prim-style and then emit the edges in ascending weight order.
  const Index n = graph.n_nodes();
  const auto dim = static_cast<std::size_t>(points.cols());
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(n_components));
  for (Index v = 0; v < n; ++v) members[static_cast<std::size_t>(component[static_cast<std::size_t>(v)])].push_back(v);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<char> in_tree(static_cast<std::size_t>(n_components), 0);
  std::vector<double> best(static_cast<std::size_t>(n), inf);
  std::vector<Index> best_from(static_cast<std::size_t>(n), -1);
  const auto& kernels = kernels::active();

  auto absorb = [&](Index comp) {
    in_tree[static_cast<std::size_t>(comp)] = 1;
    for (Index u : members[static_cast<std::size_t>(comp)]) {
      for (Index v = 0; v < n; ++v) {
        if (in_tree[static_cast<std::size_t>(component[static_cast<std::size_t>(v)])]) continue;
        const double d2 = kernels.squared_distance(points.row(u).data(), points.row(v).data(), dim);
        auto& b = best[static_cast<std::size_t>(v)];
        auto& f = best_from[static_cast<std::size_t>(v)];
        if (d2 < b || (d2 == b && u < f)) {
          b = d2;
          f = u;
        }
      }
    }
  };

  std::vector<Edge> added;
  absorb(0);
  for (Index step = 1; step < n_components; ++step) {
    Index pick = -1;
    for (Index v = 0; v < n; ++v) {
      if (in_tree[static_cast<std::size_t>(component[static_cast<std::size_t>(v)])]) continue;
      if (pick < 0) {
        pick = v;
        continue;
      }
      const auto sv = static_cast<std::size_t>(v);
      const auto sp = static_cast<std::size_t>(pick);
      const auto key_v = std::make_tuple(best[sv], std::min(v, best_from[sv]), std::max(v, best_from[sv]));
      const auto key_p = std::make_tuple(best[sp], std::min(pick, best_from[sp]), std::max(pick, best_from[sp]));
      if (key_v < key_p) pick = v;
    }
    const Index from = best_from[static_cast<std::size_t>(pick)];
    if (best[static_cast<std::size_t>(pick)] == 0.0) {
      throw DegenerateInputError("observations " + std::to_string(from) + " and " + std::to_string(pick) + " coincide");
    }
    added.push_back({std::min(from, pick), std::max(from, pick), std::sqrt(best[static_cast<std::size_t>(pick)])});
    absorb(component[static_cast<std::size_t>(pick)]);
  }

  std::sort(added.begin(), added.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.weight, a.i, a.j) < std::tie(b.weight, b.i, b.j);
  });
  for (const Edge& e : added) graph.add_bridge(e.i, e.j, e.weight);
  return graph;
}

int default_thread_count() {
  if (const char* env = std::getenv("LRISO_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return 1;
}

namespace {

void dijkstra(const GeodesicGraph& graph, Index source, double* out) {
  const Index n = graph.n_nodes();
  std::fill(out, out + n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  out[source] = 0.0;
  frontier.push({0.0, source});
  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (d > out[u]) continue;
    for (const Neighbor& nb : graph.neighbors(u)) {
      const double candidate = d + nb.weight;
      if (candidate < out[nb.node]) {
        out[nb.node] = candidate;
        frontier.push({candidate, nb.node});
      }
    }
  }
}

}  // namespace

DistanceMatrix shortest_paths_from(const GeodesicGraph& graph, std::span<const Index> sources, int threads) {
  const Index n = graph.n_nodes();
  if (sources.empty()) throw ArgumentError("shortest_paths_from needs at least one source");
  for (Index s : sources) {
    if (s < 0 || s >= n) throw ArgumentError("source index " + std::to_string(s) + " out of range");
  }

  // Row-major scratch so each Dijkstra run writes one contiguous row.
  RowMatrix rows(static_cast<Index>(sources.size()), n);
  const auto n_sources = static_cast<Index>(sources.size());
  auto run = [&](Index begin, Index end) {
    for (Index s = begin; s < end; ++s) dijkstra(graph, sources[static_cast<std::size_t>(s)], rows.row(s).data());
  };
  const Index workers = std::clamp<Index>(threads > 0 ? threads : default_thread_count(), 1, n_sources);
  if (workers == 1) {
    run(0, n_sources);
  } else {
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) pool.emplace_back(run, n_sources * w / workers, n_sources * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }
  if (!rows.allFinite()) throw ArgumentError("graph is disconnected; run connect_components first");

  DistanceMatrix result;
  result.values = rows;
  result.sources.assign(sources.begin(), sources.end());
  result.kind = DistanceKind::landmark_to_all;
  return result;
}

DistanceMatrix full_geodesic_matrix(const GeodesicGraph& graph, int threads) {
  IndexList all(static_cast<std::size_t>(graph.n_nodes()));
  std::iota(all.begin(), all.end(), Index{0});
  DistanceMatrix result = shortest_paths_from(graph, all, threads);
  result.values = result.values.cwiseMin(result.values.transpose());
  result.kind = DistanceKind::all_pairs;
  return result;
}

DistanceMatrix floyd_warshall(const GeodesicGraph& graph) {
  const Index n = graph.n_nodes();
  Matrix d = Matrix::Constant(n, n, std::numeric_limits<double>::infinity());
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (const Neighbor& nb : graph.neighbors(i)) d(i, nb.node) = nb.weight;
  }
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j) {
      const double dkj = d(k, j);
      for (Index i = 0; i < n; ++i) d(i, j) = std::min(d(i, j), d(i, k) + dkj);
    }
  if (!d.allFinite()) throw ArgumentError("graph is disconnected; run connect_components first");
  DistanceMatrix result;
  result.values = std::move(d);
  result.sources.resize(static_cast<std::size_t>(n));
  std::iota(result.sources.begin(), result.sources.end(), Index{0});
  result.kind = DistanceKind::all_pairs;
  return result;
}

void write_edge_list(const GeodesicGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << "i,j,weight\n";
  for (const Edge& e : graph.edges()) out << e.i << ',' << e.j << ',' << csv::format_double(e.weight) << '\n';
}

}  // namespace lriso
