#include "lriso/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lriso/errors.hpp"
#include "lriso/kernels.hpp"

namespace lriso {
namespace {

// Flip each column so its largest-magnitude entry is positive.
void fix_signs(Matrix& columns) {
  for (Index c = 0; c < columns.cols(); ++c) {
    Index arg = 0;
    columns.col(c).cwiseAbs().maxCoeff(&arg);
    if (columns(arg, c) < 0.0) columns.col(c) *= -1.0;
  }
}

}  // namespace

GramMatrix double_center(const Matrix& distances) {
  if (distances.rows() != distances.cols()) throw ArgumentError("double centering needs a square distance matrix");
  const Matrix squared = distances.array().square().matrix();
  const Vector row_means = squared.rowwise().mean();
  const Eigen::RowVectorXd col_means = squared.colwise().mean();
  const double grand = row_means.mean();
  GramMatrix gram;
  gram.values = -0.5 * (((squared.colwise() - row_means).rowwise() - col_means).array() + grand).matrix();
  return gram;
}

GramMatrix double_center(const DistanceMatrix& distances) { return double_center(distances.values); }

MdsEmbedding classical_mds(const GramMatrix& gram, Index m) {
  const Index n = gram.values.rows();
  if (gram.values.cols() != n) throw ArgumentError("Gram matrix must be square");
  if (m < 1 || m > n) throw ArgumentError("MDS dimension must satisfy 1 <= m <= N");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram.values);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of the Gram matrix failed");
  const Vector& all = solver.eigenvalues();  // ascending
  MdsEmbedding result;
  result.negative_mass = (-all.array()).max(0.0).sum();
  result.eigenvalues = all.tail(m).reverse();
  Matrix vectors = solver.eigenvectors().rightCols(m).rowwise().reverse();
  fix_signs(vectors);
  result.coordinates = vectors * result.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return result;
}

ScatterPair scatter_matrices(const RowMatrix& features, std::span<const int> assignments, WithinScatter within) {
  const Index n = features.rows();
  const Index f = features.cols();
  if (static_cast<Index>(assignments.size()) != n) throw ArgumentError("one class assignment per row is required");

  std::map<int, Index> slot;
  for (int a : assignments) slot.emplace(a, 0);
  if (slot.size() < 2) throw ArgumentError("scatter matrices need at least 2 classes");
  ScatterPair pair;
  for (auto& [label, index] : slot) {
    index = static_cast<Index>(pair.class_ids.size());
    pair.class_ids.push_back(label);
  }
  const auto n_classes = static_cast<Index>(slot.size());

  pair.class_means = RowMatrix::Zero(n_classes, f);
  pair.class_counts.assign(static_cast<std::size_t>(n_classes), 0);
  std::vector<Index> row_class(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index c = slot[assignments[static_cast<std::size_t>(i)]];
    row_class[static_cast<std::size_t>(i)] = c;
    pair.class_means.row(c) += features.row(i);
    ++pair.class_counts[static_cast<std::size_t>(c)];
  }
  for (Index c = 0; c < n_classes; ++c) pair.class_means.row(c) /= static_cast<double>(pair.class_counts[static_cast<std::size_t>(c)]);
  pair.global_mean = features.colwise().mean().transpose();

  Matrix spread(n_classes, f);
  for (Index c = 0; c < n_classes; ++c) {
    spread.row(c) = std::sqrt(static_cast<double>(pair.class_counts[static_cast<std::size_t>(c)])) *
                    (pair.class_means.row(c) - pair.global_mean.transpose());
  }
  pair.s_b = spread.transpose() * spread;

  Matrix centered(n, f);
  for (Index i = 0; i < n; ++i) {
    if (within == WithinScatter::class_mean) {
      centered.row(i) = features.row(i) - pair.class_means.row(row_class[static_cast<std::size_t>(i)]);
    } else {
      centered.row(i) = features.row(i) - pair.global_mean.transpose();
    }
  }
  pair.s_w = centered.transpose() * centered;
  return pair;
}

double soft_threshold(double x, double eps) {
  if (!(eps >= 0.0)) throw ArgumentError("soft threshold needs eps >= 0");
  return std::copysign(std::max(std::abs(x) - eps, 0.0), x);
}

Matrix soft_threshold(const Matrix& a, double eps) {
  if (!(eps >= 0.0)) throw ArgumentError("soft threshold needs eps >= 0");
  Matrix out(a.rows(), a.cols());
  kernels::active().soft_threshold(a.data(), out.data(), static_cast<std::size_t>(a.size()), eps);
  return out;
}

Matrix svt(const Matrix& a, double eps, Vector* thresholded) {
  if (!(eps >= 0.0)) throw ArgumentError("singular value thresholding needs eps >= 0");
  if (!a.allFinite()) throw ArgumentError("singular value thresholding needs a finite matrix");
  if (a.size() == 0) {
    if (thresholded) thresholded->resize(0);
    return a;
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sigma = svd.singularValues();
  kernels::active().soft_threshold(sigma.data(), sigma.data(), static_cast<std::size_t>(sigma.size()), eps);
  Index keep = 0;
  while (keep < sigma.size() && sigma(keep) > 0.0) ++keep;
  if (thresholded) *thresholded = sigma;
  return svd.matrixU().leftCols(keep) * sigma.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  return Eigen::BDCSVD<Matrix>(a).singularValues();
}

Index effective_rank(const Matrix& a, double rel_tol) {
  if (!a.allFinite()) throw ArgumentError("effective rank needs a finite matrix");
  const Vector sigma = singular_values(a);
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  return (sigma.array() > rel_tol * sigma(0)).count();
}

double gevd_ridge(const Matrix& a, const Matrix& b) {
  const double f = static_cast<double>(b.rows());
  const double trace = b.trace();
  if (trace > 0.0) return 1e-6 * trace / f;
  return 1e-6 * std::max(1.0, std::abs(a.trace()) / f);
}

namespace {

// Top-m eigenpairs of a symmetric operator by Lanczos with full
// reorthogonalisation. The Krylov space grows until every wanted Ritz pair
// has residual below tol * |lambda_max|, or it spans the whole space.
template <typename Apply>
void lanczos_top(Index n, Index m, double tol, Apply apply, Vector& values, Matrix& vectors) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&](const Matrix& basis, Index used) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector v(n);
      for (Index k = 0; k < n; ++k) v(k) = gauss(rng);
      for (int pass = 0; pass < 2; ++pass) v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
      const double norm = v.norm();
      if (norm > 1e-8) return Vector(v / norm);
    }
    throw NumericalError("Lanczos could not extend its basis");
  };

  Matrix basis(n, std::min<Index>(n, std::max<Index>(2 * m + 20, 40)));
  Vector alpha(basis.cols()), beta(basis.cols());
  basis.col(0) = random_unit(basis, 0);
  Index k = 0;
  Vector w(n);
  while (true) {
    // one Lanczos step: w = A q_k - alpha_k q_k - beta_{k-1} q_{k-1}, fully reorthogonalised
    apply(basis.col(k), w);
    alpha(k) = basis.col(k).dot(w);
    for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
    beta(k) = w.norm();
    ++k;

    const bool full = k == n;
    if (k >= m && (k % 8 == 0 || full || k == basis.cols())) {
      Matrix tri = Matrix::Zero(k, k);
      for (Index j = 0; j < k; ++j) {
        tri(j, j) = alpha(j);
        if (j + 1 < k) tri(j, j + 1) = tri(j + 1, j) = beta(j);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> ritz(tri);
      const Vector theta = ritz.eigenvalues().reverse();
      const Matrix s = ritz.eigenvectors().rowwise().reverse();
      const double scale = std::max(theta.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
      bool done = full;
      if (!done) {
        done = true;
        for (Index i = 0; i < m && done; ++i) done = std::abs(beta(k - 1) * s(k - 1, i)) <= tol * scale;
      }
      if (done) {
        values = theta.head(m);
        vectors = basis.leftCols(k) * s.leftCols(m);
        return;
      }
    }
    if (k == basis.cols()) {
      const Index grow = std::min<Index>(n, 2 * basis.cols());
      basis.conservativeResize(Eigen::NoChange, grow);
      alpha.conservativeResize(grow);
      beta.conservativeResize(grow);
    }
    if (beta(k - 1) <= 1e-12 * std::max(1.0, std::abs(alpha(k - 1)))) {
      // invariant subspace: restart in the orthogonal complement
      beta(k - 1) = 0.0;
      basis.col(k) = random_unit(basis, k);
    } else {
      basis.col(k) = w / beta(k - 1);
    }
  }
}

}  // namespace

ProjectionMatrix partial_gevd(const Matrix& a, const Matrix& b, Index m, const GevdOptions& options) {
  const Index f = a.rows();
  if (a.cols() != f || b.rows() != f || b.cols() != f) throw ArgumentError("GEVD needs two square matrices of equal size");
  if (m < 1 || m > f) {
    throw ArgumentError("GEVD dimension must satisfy 1 <= m <= F (m=" + std::to_string(m) + ", F=" + std::to_string(f) + ")");
  }
  if (!a.allFinite() || !b.allFinite()) throw ArgumentError("GEVD inputs must be finite");

  ProjectionMatrix result;
  result.ridge = gevd_ridge(a, b);
  Matrix regularized = 0.5 * (b + b.transpose());
  regularized.diagonal().array() += result.ridge;
  Eigen::LLT<Matrix> chol(regularized);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("within-class scatter has a negative eigenvalue beyond the ridge; not positive semidefinite");
  }

  const Matrix sym_a = 0.5 * (a + a.transpose());
  Matrix vectors;
  if (f <= options.dense_limit) {
    // whitened operator C = L^-1 a L^-T
    const Matrix left = chol.matrixL().solve(sym_a);
    Matrix whitened = chol.matrixL().solve(left.transpose());
    whitened = 0.5 * (whitened + whitened.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(whitened);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
    result.eigenvalues = solver.eigenvalues().tail(m).reverse();
    vectors = solver.eigenvectors().rightCols(m).rowwise().reverse();
  } else {
    // C applied implicitly: two triangular solves and one product per step
    lanczos_top(f, m, options.lanczos_tol,
                [&](const auto& in, Vector& out) {
                  Vector t = chol.matrixU().solve(Vector(in));
                  t = sym_a * t;
                  out = chol.matrixL().solve(t);
                },
                result.eigenvalues, vectors);
  }
  result.columns = chol.matrixU().solve(vectors);
  fix_signs(result.columns);
  return result;
}

}  // namespace lriso
