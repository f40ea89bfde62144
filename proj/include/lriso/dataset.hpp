#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lriso/types.hpp"

namespace lriso {

// N observations in M-dimensional ambient space, one row per observation.
// Immutable after construction; the constructor enforces the invariants
// (N >= 2, M >= 1, finite entries, labels in [0, C) with no empty class).
class Dataset {
 public:
  Dataset(RowMatrix samples, std::optional<LabelVector> labels, std::string name,
          std::string source);

  const RowMatrix& samples() const noexcept { return samples_; }
  const std::optional<LabelVector>& labels() const noexcept { return labels_; }
  const std::string& name() const noexcept { return name_; }
  const std::string& source() const noexcept { return source_; }

  Index size() const noexcept { return samples_.rows(); }
  Index dim() const noexcept { return samples_.cols(); }
  bool has_labels() const noexcept { return labels_.has_value(); }
  // 0 when unlabeled.
  int n_classes() const noexcept { return n_classes_; }

  // Generator-provided ground truth coordinates (swiss roll: columns t, h).
  const std::optional<RowMatrix>& intrinsic() const noexcept { return intrinsic_; }
  Dataset with_intrinsic(RowMatrix intrinsic) const;

  // Rows reordered so that row r of the result is row order[r] of this.
  Dataset permuted(const IndexList& order) const;

 private:
  RowMatrix samples_;
  std::optional<LabelVector> labels_;
  std::string name_;
  std::string source_;
  std::optional<RowMatrix> intrinsic_;
  int n_classes_ = 0;
};

// Returns the number of classes; throws FormatError unless every label lies
// in [0, C) and every class in that range has at least one member.
int validate_labels(const LabelVector& labels, Index expected_size);

// 64-bit FNV-1a over the sample bytes and labels, as 16 hex digits.
std::string checksum(const Dataset& data);

// ---------------------------------------------------------------------------
// File formats

enum class FileFormat { csv, idx, image_dir };

// Picks image_dir for directories, idx for *.idx / *-ubyte names, csv
// otherwise.
FileFormat guess_format(const std::filesystem::path& path);

Dataset load_matrix(const std::filesystem::path& path, FileFormat format);

// Comma-separated rows. A non-numeric first line is a header; if its last
// field is `label` the last column holds integer class labels.
Dataset load_csv(const std::filesystem::path& path);

// Big-endian IDX tensor (magic 0x0000 type ndim, then ndim u32 sizes). The
// first dimension indexes observations, the rest are flattened. Unsigned
// byte data is scaled to [0, 1]. An optional 1-D IDX file supplies labels.
Dataset load_idx(const std::filesystem::path& path,
                 const std::optional<std::filesystem::path>& labels_path = std::nullopt);

// root/<class>/<image>.{pgm,png}; classes are subdirectories in sorted name
// order, images are flattened in raster order and scaled to [0, 1].
Dataset load_image_dir(const std::filesystem::path& root);

// Writes samples with shortest round-trip formatting, so load_csv restores
// them bit-exactly. Always writes a header; adds a `label` column when
// labeled.
void write_csv(const Dataset& data, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Seeded generators. All are pure functions of their arguments.

// (t cos t, h, t sin t) + N(0, noise^2), t ~ U[1.5pi, 4.5pi], h ~ U[0, 21].
// Labels are the quartile of t; intrinsic() holds (t, h).
Dataset gen_swiss_roll(Index n, double noise, std::uint64_t seed);

// n_subspaces random orthonormal bases of dimension subspace_dim in
// R^ambient; each column is basis * U[-1, 1]^subspace_dim. Exactly
// round(corruption_frac * ambient * N) entries are overwritten with values of
// magnitude in [2, 4] x max|clean entry| and random sign. Rows of the result
// are the columns of the sample matrix; labels are subspace indices.
// `corrupted`, when given, receives the flat row-major indices that were
// overwritten (sorted).
Dataset gen_subspace_union(Index ambient, Index subspace_dim, Index n_subspaces,
                           Index per_subspace, double corruption_frac, std::uint64_t seed,
                           std::vector<Index>* corrupted = nullptr);

// Unit-variance isotropic Gaussian blobs. Class means sit at
// separation / sqrt(2) along random orthonormal directions, so every pair of
// means is exactly `separation` apart (when n_classes <= ambient).
Dataset gen_labeled_clusters(Index n_classes, Index per_class, Index ambient, double separation,
                             std::uint64_t seed);

// Parses generator descriptors such as `blobs`, `blobs:classes=8,dim=50`,
// `swiss:n=800,noise=0.05`, `subspaces:ambient=30,dim=2`. `default_seed` is
// used when the descriptor has no `seed=`. Returns nullopt if `spec` does not
// name a generator.
std::optional<Dataset> generate_from_spec(const std::string& spec, std::uint64_t default_seed);

}  // namespace lriso
