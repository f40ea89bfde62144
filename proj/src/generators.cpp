#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "lriso/csv.hpp"
#include "lriso/dataset.hpp"
#include "lriso/errors.hpp"

namespace lriso {
namespace {

// Random orthonormal basis (rows x cols, cols <= rows) from the QR factor of a
// Gaussian matrix.
Matrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) g(r, c) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

std::string describe(const std::string& name, const std::vector<std::pair<std::string, std::string>>& params) {
  std::string text = name;
  for (std::size_t k = 0; k < params.size(); ++k) {
    text += (k == 0 ? ":" : ",") + params[k].first + "=" + params[k].second;
  }
  return text;
}

}  // namespace

Dataset gen_swiss_roll(Index n, double noise, std::uint64_t seed) {
  if (n < 10) throw ArgumentError("swiss roll needs n >= 10");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ArgumentError("swiss roll noise must be finite and >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RowMatrix points(n, 3);
  RowMatrix intrinsic(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * unit(rng));
    const double h = 21.0 * unit(rng);
    intrinsic(i, 0) = t;
    intrinsic(i, 1) = h;
    points(i, 0) = t * std::cos(t);
    points(i, 1) = h;
    points(i, 2) = t * std::sin(t);
  }
  if (noise > 0.0) {
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < 3; ++c) points(i, c) += noise * gauss(rng);
  }

  // quartile of t by rank, so each class holds n/4 points
  IndexList order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return intrinsic(a, 0) < intrinsic(b, 0); });
  LabelVector labels(static_cast<std::size_t>(n));
  for (Index rank = 0; rank < n; ++rank) labels[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = static_cast<int>(4 * rank / n);

  const std::string source = describe("swiss", {{"n", std::to_string(n)},
                                                {"noise", csv::format_double(noise)},
                                                {"seed", std::to_string(seed)}});
  return Dataset(std::move(points), std::move(labels), "swiss_roll", source)
      .with_intrinsic(std::move(intrinsic));
}

Dataset gen_subspace_union(Index ambient, Index subspace_dim, Index n_subspaces, Index per_subspace,
                           double corruption_frac, std::uint64_t seed,
                           std::vector<Index>* corrupted) {
  if (subspace_dim < 1 || n_subspaces < 1 || per_subspace < 1) {
    throw ArgumentError("subspace union counts must be >= 1");
  }
  if (subspace_dim >= ambient) throw ArgumentError("subspace dimension must be below the ambient dimension");
  if (!(corruption_frac >= 0.0 && corruption_frac <= 1.0)) {
    throw ArgumentError("corruption fraction must lie in [0, 1]");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coefficient(-1.0, 1.0);
  const Index n = n_subspaces * per_subspace;
  RowMatrix samples(n, ambient);
  LabelVector labels(static_cast<std::size_t>(n));
  for (Index s = 0; s < n_subspaces; ++s) {
    const Matrix basis = random_orthonormal(ambient, subspace_dim, rng);
    for (Index p = 0; p < per_subspace; ++p) {
      Vector coeffs(subspace_dim);
      for (Index d = 0; d < subspace_dim; ++d) coeffs(d) = coefficient(rng);
      const Index row = s * per_subspace + p;
      samples.row(row) = (basis * coeffs).transpose();
      labels[static_cast<std::size_t>(row)] = static_cast<int>(s);
    }
  }

  const Index total = samples.size();
  const auto n_corrupt = static_cast<Index>(std::llround(corruption_frac * static_cast<double>(total)));
  std::vector<Index> positions;
  if (n_corrupt > 0) {
    const double peak = samples.cwiseAbs().maxCoeff();
    IndexList pool(static_cast<std::size_t>(total));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index k = 0; k < n_corrupt; ++k) {
      std::uniform_int_distribution<Index> pick(k, total - 1);
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    positions.assign(pool.begin(), pool.begin() + n_corrupt);
    std::sort(positions.begin(), positions.end());
    std::uniform_real_distribution<double> magnitude(2.0, 4.0);
    std::bernoulli_distribution negative(0.5);
    for (Index flat : positions) {
      const double value = magnitude(rng) * peak;
      samples.data()[flat] = negative(rng) ? -value : value;
    }
  }
  if (corrupted) *corrupted = std::move(positions);

  const std::string source =
      describe("subspaces", {{"ambient", std::to_string(ambient)},
                             {"dim", std::to_string(subspace_dim)},
                             {"k", std::to_string(n_subspaces)},
                             {"per", std::to_string(per_subspace)},
                             {"corruption", csv::format_double(corruption_frac)},
                             {"seed", std::to_string(seed)}});
  return Dataset(std::move(samples), std::move(labels), "subspace_union", source);
}

Dataset gen_labeled_clusters(Index n_classes, Index per_class, Index ambient, double separation,
                             std::uint64_t seed) {
  if (n_classes < 1 || per_class < 1 || ambient < 1) throw ArgumentError("cluster counts must be >= 1");
  if (!std::isfinite(separation) || separation < 0.0) throw ArgumentError("separation must be finite and >= 0");
  if (n_classes * per_class < 2) throw ArgumentError("need at least 2 observations");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix directions;
  if (n_classes <= ambient) {
    directions = random_orthonormal(ambient, n_classes, rng);
  } else {
    directions.resize(ambient, n_classes);
    for (Index c = 0; c < n_classes; ++c) {
      for (Index r = 0; r < ambient; ++r) directions(r, c) = gauss(rng);
      directions.col(c).normalize();
    }
  }
  const Matrix means = directions * (separation / std::numbers::sqrt2);

  const Index n = n_classes * per_class;
  RowMatrix samples(n, ambient);
  LabelVector labels(static_cast<std::size_t>(n));
  for (Index c = 0; c < n_classes; ++c) {
    for (Index p = 0; p < per_class; ++p) {
      const Index row = c * per_class + p;
      for (Index d = 0; d < ambient; ++d) samples(row, d) = means(d, c) + gauss(rng);
      labels[static_cast<std::size_t>(row)] = static_cast<int>(c);
    }
  }
  const std::string source = describe("blobs", {{"classes", std::to_string(n_classes)},
                                                {"per", std::to_string(per_class)},
                                                {"dim", std::to_string(ambient)},
                                                {"sep", csv::format_double(separation)},
                                                {"seed", std::to_string(seed)}});
  return Dataset(std::move(samples), std::move(labels), "labeled_clusters", source);
}

std::optional<Dataset> generate_from_spec(const std::string& spec, std::uint64_t default_seed) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon != std::string::npos) {
    for (const auto& field : csv::split_fields(spec.substr(colon + 1))) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw ArgumentError("generator parameter '" + field + "' is not key=value");
      params[field.substr(0, eq)] = field.substr(eq + 1);
    }
  }

  auto take_int = [&](const std::string& key, long long fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    long long value = 0;
    if (!csv::parse_int(it->second, value)) throw ArgumentError("generator parameter '" + key + "' must be an integer");
    params.erase(it);
    return value;
  };
  auto take_real = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    double value = 0;
    if (!csv::parse_double(it->second, value)) throw ArgumentError("generator parameter '" + key + "' must be a number");
    params.erase(it);
    return value;
  };
  auto take_seed = [&]() {
    const long long seed = take_int("seed", static_cast<long long>(default_seed));
    if (seed < 0) throw ArgumentError("generator seed must be >= 0");
    return static_cast<std::uint64_t>(seed);
  };
  auto finish = [&](Dataset data) {
    if (!params.empty()) throw ArgumentError("unknown generator parameter '" + params.begin()->first + "'");
    return std::optional<Dataset>(std::move(data));
  };

  if (name == "blobs" || name == "clusters") {
    const auto classes = take_int("classes", 4);
    const auto per = take_int("per", 25);
    const auto dim = take_int("dim", 10);
    const double sep = take_real("sep", 8.0);
    return finish(gen_labeled_clusters(classes, per, dim, sep, take_seed()));
  }
  if (name == "swiss" || name == "swissroll") {
    const auto n = take_int("n", 800);
    const double noise = take_real("noise", 0.0);
    return finish(gen_swiss_roll(n, noise, take_seed()));
  }
  if (name == "subspaces") {
    const auto ambient = take_int("ambient", 30);
    const auto dim = take_int("dim", 2);
    const auto k = take_int("k", 3);
    const auto per = take_int("per", 20);
    const double corruption = take_real("corruption", 0.0);
    return finish(gen_subspace_union(ambient, dim, k, per, corruption, take_seed()));
  }
  return std::nullopt;
}

}  // namespace lriso
