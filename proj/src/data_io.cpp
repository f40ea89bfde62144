#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>

#include "lriso/csv.hpp"
#include "lriso/dataset.hpp"
#include "lriso/errors.hpp"

namespace fs = std::filesystem;

namespace lriso {

int validate_labels(const LabelVector& labels, Index expected_size) {
  if (static_cast<Index>(labels.size()) != expected_size) {
    throw FormatError("label vector has " + std::to_string(labels.size()) + " entries, expected " +
                      std::to_string(expected_size));
  }
  if (labels.empty()) return 0;
  const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
  if (*lo < 0) throw FormatError("negative class label " + std::to_string(*lo));
  const int n_classes = *hi + 1;
  std::vector<Index> counts(static_cast<std::size_t>(n_classes), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  for (int c = 0; c < n_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw FormatError("class " + std::to_string(c) + " has no members");
    }
  }
  return n_classes;
}

Dataset::Dataset(RowMatrix samples, std::optional<LabelVector> labels, std::string name,
                 std::string source)
    : samples_(std::move(samples)),
      labels_(std::move(labels)),
      name_(std::move(name)),
      source_(std::move(source)) {
  if (samples_.rows() < 2) throw ArgumentError("a dataset needs at least 2 observations");
  if (samples_.cols() < 1) throw ArgumentError("a dataset needs at least 1 feature");
  if (!samples_.allFinite()) throw ArgumentError("dataset contains non-finite entries");
  if (labels_) n_classes_ = validate_labels(*labels_, samples_.rows());
}

Dataset Dataset::with_intrinsic(RowMatrix intrinsic) const {
  if (intrinsic.rows() != size()) throw ArgumentError("intrinsic coordinates need one row per sample");
  Dataset copy = *this;
  copy.intrinsic_ = std::move(intrinsic);
  return copy;
}

Dataset Dataset::permuted(const IndexList& order) const {
  if (static_cast<Index>(order.size()) != size()) throw ArgumentError("permutation size mismatch");
  RowMatrix rows(size(), dim());
  std::optional<LabelVector> labels;
  if (labels_) labels.emplace(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const Index src = order[r];
    if (src < 0 || src >= size()) throw ArgumentError("permutation index out of range");
    rows.row(static_cast<Index>(r)) = samples_.row(src);
    if (labels) (*labels)[r] = (*labels_)[static_cast<std::size_t>(src)];
  }
  Dataset result(std::move(rows), std::move(labels), name_, source_ + " (permuted)");
  if (intrinsic_) {
    RowMatrix intrinsic(size(), intrinsic_->cols());
    for (std::size_t r = 0; r < order.size(); ++r) intrinsic.row(static_cast<Index>(r)) = intrinsic_->row(order[r]);
    result.intrinsic_ = std::move(intrinsic);
  }
  return result;
}

std::string checksum(const Dataset& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t k = 0; k < n; ++k) {
      hash ^= p[k];
      hash *= 0x100000001b3ULL;
    }
  };
  const std::int64_t shape[2] = {data.size(), data.dim()};
  mix(shape, sizeof(shape));
  mix(data.samples().data(), static_cast<std::size_t>(data.samples().size()) * sizeof(double));
  if (data.labels()) mix(data.labels()->data(), data.labels()->size() * sizeof(int));
  static const char* digits = "0123456789abcdef";
  std::string hex(16, '0');
  for (int k = 15; k >= 0; --k, hash >>= 4) hex[static_cast<std::size_t>(k)] = digits[hash & 0xF];
  return hex;
}

FileFormat guess_format(const fs::path& path) {
  if (fs::is_directory(path)) return FileFormat::image_dir;
  const std::string name = path.filename().string();
  if (path.extension() == ".idx" || name.find("-ubyte") != std::string::npos ||
      name.find(".idx") != std::string::npos) {
    return FileFormat::idx;
  }
  return FileFormat::csv;
}

Dataset load_matrix(const fs::path& path, FileFormat format) {
  if (!fs::exists(path)) throw IOError("'" + path.string() + "' does not exist");
  switch (format) {
    case FileFormat::csv:
      return load_csv(path);
    case FileFormat::idx:
      return load_idx(path);
    case FileFormat::image_dir:
      return load_image_dir(path);
  }
  throw ArgumentError("unknown file format");
}

Dataset load_csv(const fs::path& path) {
  csv::Table table = csv::read_table(path);
  const bool labeled = !table.header.empty() && table.header.back() == "label";
  RowMatrix samples = std::move(table.values);
  std::optional<LabelVector> labels;
  if (labeled) {
    if (samples.cols() < 2) throw FormatError(path.string() + ": label column but no features");
    LabelVector parsed(static_cast<std::size_t>(samples.rows()));
    for (Index r = 0; r < samples.rows(); ++r) {
      const double v = samples(r, samples.cols() - 1);
      if (v != std::floor(v)) throw FormatError(path.string() + ": non-integer label");
      parsed[static_cast<std::size_t>(r)] = static_cast<int>(v);
    }
    labels = std::move(parsed);
    samples = RowMatrix(samples.leftCols(samples.cols() - 1));
  }
  if (samples.rows() < 2) throw FormatError(path.string() + ": fewer than 2 observations");
  if (samples.cols() < 1) throw FormatError(path.string() + ": no feature columns");
  return Dataset(std::move(samples), std::move(labels), path.stem().string(), path.string());
}

namespace {

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

template <typename T>
T read_be(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> raw;
  std::memcpy(raw.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::little) std::reverse(raw.begin(), raw.end());
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
  bool unsigned_bytes = false;
};

IdxTensor parse_idx(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < 4 || bytes[0] != 0 || bytes[1] != 0) {
    throw FormatError(path.string() + ": bad IDX magic number");
  }
  const unsigned char type = bytes[2];
  const std::size_t ndim = bytes[3];
  std::size_t width = 0;
  switch (type) {
    case 0x08: case 0x09: width = 1; break;
    case 0x0B: width = 2; break;
    case 0x0C: case 0x0D: width = 4; break;
    case 0x0E: width = 8; break;
    default: throw FormatError(path.string() + ": unknown IDX element type");
  }
  if (ndim == 0 || bytes.size() < 4 + 4 * ndim) throw FormatError(path.string() + ": truncated IDX header");
  IdxTensor tensor;
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndim; ++d) {
    tensor.dims.push_back(read_be32(&bytes[4 + 4 * d]));
    count *= tensor.dims.back();
  }
  const std::size_t offset = 4 + 4 * ndim;
  if (bytes.size() != offset + count * width) {
    throw FormatError(path.string() + ": IDX payload size does not match its dimensions");
  }
  tensor.values.resize(count);
  tensor.unsigned_bytes = type == 0x08;
  const unsigned char* p = bytes.data() + offset;
  for (std::size_t k = 0; k < count; ++k, p += width) {
    switch (type) {
      case 0x08: tensor.values[k] = *p; break;
      case 0x09: tensor.values[k] = static_cast<std::int8_t>(*p); break;
      case 0x0B: tensor.values[k] = read_be<std::int16_t>(p); break;
      case 0x0C: tensor.values[k] = read_be<std::int32_t>(p); break;
      case 0x0D: tensor.values[k] = read_be<float>(p); break;
      case 0x0E: tensor.values[k] = read_be<double>(p); break;
    }
  }
  return tensor;
}

}  // namespace

Dataset load_idx(const fs::path& path, const std::optional<fs::path>& labels_path) {
  const IdxTensor tensor = parse_idx(path);
  const Index n = tensor.dims.front();
  const Index m = n == 0 ? 0 : static_cast<Index>(tensor.values.size()) / n;
  RowMatrix samples(n, m);
  const double scale = tensor.unsigned_bytes ? 1.0 / 255.0 : 1.0;
  for (Index k = 0; k < samples.size(); ++k) {
    const double v = tensor.values[static_cast<std::size_t>(k)];
    if (!std::isfinite(v)) throw FormatError(path.string() + ": non-finite entry");
    samples.data()[k] = v * scale;
  }
  if (n < 2 || m < 1) throw FormatError(path.string() + ": need at least 2 observations");

  std::optional<LabelVector> labels;
  if (labels_path) {
    const IdxTensor label_tensor = parse_idx(*labels_path);
    if (label_tensor.dims.size() != 1 || static_cast<Index>(label_tensor.dims[0]) != n) {
      throw FormatError(labels_path->string() + ": label file must be 1-D with one entry per sample");
    }
    LabelVector parsed;
    parsed.reserve(label_tensor.values.size());
    for (double v : label_tensor.values) parsed.push_back(static_cast<int>(v));
    labels = std::move(parsed);
  }
  return Dataset(std::move(samples), std::move(labels), path.stem().string(), path.string());
}

namespace {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;  // raster order, scaled to [0, 1]
};

GrayImage read_pgm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string token;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') token.push_back(static_cast<char>(bytes[pos++]));
    if (token.empty()) throw FormatError(path.string() + ": truncated PGM header");
    return token;
  };
  auto next_number = [&]() {
    long long value = 0;
    if (!csv::parse_int(next_token(), value) || value <= 0) throw FormatError(path.string() + ": bad PGM header");
    return static_cast<std::size_t>(value);
  };

  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") throw FormatError(path.string() + ": not a grayscale PGM");
  GrayImage image;
  image.width = next_number();
  image.height = next_number();
  const std::size_t maxval = next_number();
  if (maxval > 65535) throw FormatError(path.string() + ": PGM maxval out of range");
  const std::size_t count = image.width * image.height;
  image.pixels.resize(count);
  const double scale = 1.0 / static_cast<double>(maxval);

  if (magic == "P2") {
    for (std::size_t k = 0; k < count; ++k) {
      long long value = 0;
      if (!csv::parse_int(next_token(), value)) throw FormatError(path.string() + ": bad PGM pixel");
      image.pixels[k] = static_cast<double>(value) * scale;
    }
    return image;
  }
  ++pos;  // single whitespace byte after maxval
  const std::size_t width = maxval > 255 ? 2 : 1;
  if (bytes.size() < pos + count * width) throw FormatError(path.string() + ": truncated PGM data");
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned char* p = &bytes[pos + k * width];
    const unsigned value = width == 2 ? (unsigned{p[0]} << 8) | p[1] : p[0];
    image.pixels[k] = static_cast<double>(value) * scale;
  }
  return image;
}

GrayImage read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw FormatError(path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw FormatError(path.string() + ": " + message);
  }
  GrayImage image;
  image.width = png.width;
  image.height = png.height;
  image.pixels.resize(buffer.size());
  for (std::size_t k = 0; k < buffer.size(); ++k) image.pixels[k] = buffer[k] / 255.0;
  return image;
}

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  return text;
}

}  // namespace

Dataset load_image_dir(const fs::path& root) {
  if (!fs::is_directory(root)) throw IOError("'" + root.string() + "' is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());

  std::vector<std::vector<double>> rows;
  LabelVector labels;
  std::size_t width = 0, height = 0;
  int label = 0;
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string ext = lower(entry.path().extension().string());
      if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(entry.path());
    }
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      GrayImage image = lower(file.extension().string()) == ".png" ? read_png(file) : read_pgm(file);
      if (rows.empty()) {
        width = image.width;
        height = image.height;
      } else if (image.width != width || image.height != height) {
        throw FormatError(file.string() + ": image is " + std::to_string(image.height) + "x" +
                          std::to_string(image.width) + ", expected " + std::to_string(height) + "x" +
                          std::to_string(width));
      }
      rows.push_back(std::move(image.pixels));
      labels.push_back(label);
    }
    ++label;
  }
  if (rows.size() < 2) throw FormatError(root.string() + ": fewer than 2 images found");

  RowMatrix samples(static_cast<Index>(rows.size()), static_cast<Index>(width * height));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    samples.row(static_cast<Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(rows[r].data(), samples.cols());
  }
  return Dataset(std::move(samples), std::move(labels), root.filename().string(), root.string());
}

void write_csv(const Dataset& data, const fs::path& path) {
  std::vector<std::string> header;
  for (Index c = 0; c < data.dim(); ++c) header.push_back("x" + std::to_string(c));
  if (!data.has_labels()) {
    csv::write_matrix(path, data.samples(), header);
    return;
  }
  header.push_back("label");
  Matrix table(data.size(), data.dim() + 1);
  table.leftCols(data.dim()) = data.samples();
  for (Index r = 0; r < data.size(); ++r) table(r, data.dim()) = (*data.labels())[static_cast<std::size_t>(r)];
  csv::write_matrix(path, table, header);
}

}  // namespace lriso
