#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trcv/model.hpp"

namespace trcv::io {

// Numeric CSV. A first row containing any non-numeric cell is treated as a
// header and skipped; LF and CRLF line endings are accepted and blank lines
// ignored. Ragged rows and non-numeric cells raise ErrorKind::input with the
// 1-based line and column.
Matrix read_matrix_csv(const std::filesystem::path& path);

// One integer label per line, optional header.
std::vector<int> read_segment_labels(const std::filesystem::path& path);

// Maps arbitrary labels onto 1..K in increasing label order. `changed` is set
// when the input was not already dense.
std::vector<int> relabel_dense(const std::vector<int>& labels, bool* changed = nullptr);

struct DatasetPaths {
  std::filesystem::path x;
  std::filesystem::path y;
  std::optional<std::filesystem::path> segments;
};

// Reads and validates predictors, responses and optional segment labels.
// Row-count mismatches are dimension errors. Human-readable warnings (such as
// label relabelling) are appended to `warnings` when given.
Dataset load_dataset(const DatasetPaths& paths,
                     std::vector<std::string>* warnings = nullptr);

// 17 significant digits (like %.17g), enough for an exact decimal round trip.
std::string format_double(double value);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header);

}  // namespace trcv::io
