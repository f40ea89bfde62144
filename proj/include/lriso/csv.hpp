#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lriso/types.hpp"

namespace lriso::csv {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// Splits one line on commas and trims surrounding whitespace of each field.
std::vector<std::string> split_fields(const std::string& line);

// Strict full-field parse; false on trailing garbage.
bool parse_double(const std::string& field, double& value);
bool parse_int(const std::string& field, long long& value);

struct Table {
  std::vector<std::string> header;  // empty when the file had none
  RowMatrix values;
};

// Numeric table with an optional header row. Throws IOError / FormatError.
Table read_table(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& values,
                  const std::vector<std::string>& header = {});

void write_column(const std::filesystem::path& path, const Vector& values,
                  const std::string& header);

void write_labels(const std::filesystem::path& path, const LabelVector& labels);
LabelVector read_labels(const std::filesystem::path& path);

}  // namespace lriso::csv
