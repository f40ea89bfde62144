#pragma once

#include <span>

#include "lriso/graph.hpp"
#include "lriso/types.hpp"

namespace lriso {

// Double-centred squared distances, B = -1/2 H D^2 H.
struct GramMatrix {
  Matrix values;
};

GramMatrix double_center(const Matrix& distances);
GramMatrix double_center(const DistanceMatrix& distances);

struct MdsEmbedding {
  Matrix coordinates;   // N x m
  Vector eigenvalues;   // top m, descending, before clamping
  double negative_mass = 0.0;  // sum of |negative eigenvalues| over the full spectrum
};

// Top-m eigenvectors scaled by sqrt(max(lambda, 0)).
MdsEmbedding classical_mds(const GramMatrix& gram, Index m);

// Which mean the within-class scatter is taken around. `global_mean` is the
// literal (x - mu)(x - mu)^T variant, i.e. the total scatter; `class_mean`
// is standard Fisher analysis.
enum class WithinScatter { class_mean, global_mean };

struct ScatterPair {
  Matrix s_b;
  Matrix s_w;
  Vector global_mean;
  RowMatrix class_means;    // one row per class, in ascending label order
  std::vector<Index> class_counts;
  std::vector<int> class_ids;  // the label each row of class_means belongs to

  Index feature_dim() const noexcept { return s_b.rows(); }
  Index n_classes() const noexcept { return class_means.rows(); }
};

// Between-class S_B = sum_i N_i (mu_i - mu)(mu_i - mu)^T and within-class
// S_W for rows of `features` grouped by `assignments`.
ScatterPair scatter_matrices(const RowMatrix& features, std::span<const int> assignments,
                             WithinScatter within = WithinScatter::class_mean);

// sgn(x) max(|x| - eps, 0)
double soft_threshold(double x, double eps);
Matrix soft_threshold(const Matrix& a, double eps);

// U S_eps(Sigma) V^T: the proximal map of eps * nuclear norm. When
// `thresholded` is given it receives the shrunk singular values.
Matrix svt(const Matrix& a, double eps, Vector* thresholded = nullptr);

Vector singular_values(const Matrix& a);

// Number of singular values above rel_tol * sigma_max (0 for a zero matrix).
Index effective_rank(const Matrix& a, double rel_tol = 1e-3);

struct ProjectionMatrix {
  Matrix columns;      // F x m, (b + ridge I)-orthonormal
  Vector eigenvalues;  // descending
  double ridge = 0.0;
};

struct GevdOptions {
  // Above this size the top pairs come from a Lanczos iteration instead of a
  // dense eigensolve of the whitened matrix.
  Index dense_limit = 512;
  double lanczos_tol = 1e-12;
};

// 1e-6 * trace(b) / F; falls back to 1e-6 * max(1, |trace(a)| / F) when b has
// zero trace.
double gevd_ridge(const Matrix& a, const Matrix& b);

// Top-m solutions of a w = lambda (b + ridge I) w via Cholesky whitening.
// Throws NumericalError when b + ridge I is not positive definite.
ProjectionMatrix partial_gevd(const Matrix& a, const Matrix& b, Index m, const GevdOptions& options = {});

}  // namespace lriso
