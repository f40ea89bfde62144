#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "lriso/types.hpp"

namespace lriso::test {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

inline RowMatrix random_points(Index n, Index dim, std::mt19937_64& rng, double scale = 1.0) {
  return RowMatrix(random_matrix(n, dim, rng, scale));
}

inline Matrix random_spd(Index n, std::mt19937_64& rng, double shift = 1.0) {
  const Matrix g = random_matrix(n, n, rng);
  return g * g.transpose() + shift * Matrix::Identity(n, n);
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix g = random_matrix(n, n, rng);
  return 0.5 * (g + g.transpose());
}

inline Matrix euclidean_distances(const RowMatrix& p) {
  Matrix d(p.rows(), p.rows());
  for (Index i = 0; i < p.rows(); ++i)
    for (Index j = 0; j < p.rows(); ++j) d(i, j) = (p.row(i) - p.row(j)).norm();
  return d;
}

inline double pearson(const Vector& a, const Vector& b) {
  const Vector x = a.array() - a.mean();
  const Vector y = b.array() - b.mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

// ||A R + t - B||_F / ||B - mean(B)||_F after the best rigid alignment of A
// onto B (orthogonal Procrustes on centred configurations).
inline double procrustes_residual(const Matrix& a, const Matrix& b) {
  const Matrix ac = a.rowwise() - a.colwise().mean();
  const Matrix bc = b.rowwise() - b.colwise().mean();
  const Eigen::JacobiSVD<Matrix> svd(ac.transpose() * bc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix r = svd.matrixU() * svd.matrixV().transpose();
  return (ac * r - bc).norm() / bc.norm();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lriso_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace lriso::test
