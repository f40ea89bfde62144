#include "lriso/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lriso/errors.hpp"

namespace lriso::csv {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  std::istringstream stream(line);
  while (std::getline(stream, current, ',')) {
    const auto first = current.find_first_not_of(" \t\r");
    const auto last = current.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string()
                                                : current.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& field, double& value) {
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (*begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, value);
  return result.ec == std::errc() && result.ptr == end;
}

bool parse_int(const std::string& field, long long& value) {
  if (field.empty()) return false;
  const char* end = field.data() + field.size();
  const auto result = std::from_chars(field.data(), end, value);
  return result.ec == std::errc() && result.ptr == end;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path.string() + "'");

  Table table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t c = 0; c < fields.size() && numeric; ++c) numeric = parse_double(fields[c], row[c]);
    if (!numeric) {
      if (rows.empty() && table.header.empty()) {
        table.header = std::move(fields);
        continue;
      }
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    const std::size_t width = table.header.empty() ? (rows.empty() ? row.size() : rows.front().size())
                                                   : table.header.size();
    if (row.size() != width) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " fields, found " + std::to_string(row.size()));
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-finite entry");
      }
    }
    rows.push_back(std::move(row));
  }

  const Index cols = rows.empty() ? static_cast<Index>(table.header.size())
                                  : static_cast<Index>(rows.front().size());
  table.values.resize(static_cast<Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Index c = 0; c < cols; ++c) table.values(static_cast<Index>(r), c) = rows[r][c];
  return table;
}

void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& values,
                  const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
    out << '\n';
  }
  if (!out) throw IOError("failed writing '" + path.string() + "'");
}

void write_column(const std::filesystem::path& path, const Vector& values,
                  const std::string& header) {
  write_matrix(path, values, {header});
}

void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << "label\n";
  for (int label : labels) out << label << '\n';
}

LabelVector read_labels(const std::filesystem::path& path) {
  const Table table = read_table(path);
  if (table.values.cols() != 1) throw FormatError(path.string() + ": expected one label column");
  LabelVector labels(static_cast<std::size_t>(table.values.rows()));
  for (Index r = 0; r < table.values.rows(); ++r) {
    const double v = table.values(r, 0);
    if (v != std::floor(v)) throw FormatError(path.string() + ": non-integer label");
    labels[static_cast<std::size_t>(r)] = static_cast<int>(v);
  }
  return labels;
}

}  // namespace lriso::csv
