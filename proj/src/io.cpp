#include "trcv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "trcv/error.hpp"

namespace trcv::io {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw Error{ErrorKind::input, "cannot open " + path.string()};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parse_double(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value{};
  const auto [ptr, ec]{std::from_chars(cell.data(), cell.data() + cell.size(), value)};
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct Line {
  std::size_t number;  // 1-based
  std::string_view text;
};

std::vector<Line> split_lines(const std::string& content) {
  std::vector<Line> lines;
  std::size_t start{0};
  std::size_t number{1};
  while (start <= content.size()) {
    std::size_t end{content.find('\n', start)};
    if (end == std::string::npos) end = content.size();
    std::string_view text{trim(std::string_view{content}.substr(start, end - start))};
    if (!text.empty()) {
      lines.push_back({number, text});
    }
    start = end + 1;
    ++number;
  }
  return lines;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start{0};
  while (true) {
    const std::size_t comma{line.find(',', start)};
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string where(const std::filesystem::path& path, std::size_t line,
                  std::size_t column) {
  return path.string() + ":" + std::to_string(line) + ": column " +
         std::to_string(column);
}

}  // namespace

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const std::string content{read_file(path)};
  const auto lines{split_lines(content)};

  std::vector<std::vector<double>> rows;
  std::size_t width{0};
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto cells{split_cells(lines[li].text)};
    std::vector<double> row;
    row.reserve(cells.size());
    std::optional<std::size_t> bad_column;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v{parse_double(cells[c])};
      if (!v) {
        bad_column = c + 1;
        break;
      }
      row.push_back(*v);
    }
    if (bad_column) {
      if (li == 0) {
        continue;  // header
      }
      throw Error{ErrorKind::input, where(path, lines[li].number, *bad_column) +
                                        ": non-numeric cell '" +
                                        std::string{trim(cells[*bad_column - 1])} +
                                        "'"};
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw Error{ErrorKind::input,
                  path.string() + ":" + std::to_string(lines[li].number) +
                      ": ragged row with " + std::to_string(row.size()) +
                      " cells, expected " + std::to_string(width)};
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error{ErrorKind::input, path.string() + ": no numeric rows"};
  }

  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::vector<int> read_segment_labels(const std::filesystem::path& path) {
  const std::string content{read_file(path)};
  const auto lines{split_lines(content)};
  std::vector<int> labels;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view cell{trim(lines[li].text)};
    int value{};
    const auto [ptr, ec]{std::from_chars(cell.data(), cell.data() + cell.size(), value)};
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
      if (li == 0) {
        continue;  // header
      }
      throw Error{ErrorKind::input, where(path, lines[li].number, 1) +
                                        ": segment label '" + std::string{cell} +
                                        "' is not an integer"};
    }
    labels.push_back(value);
  }
  if (labels.empty()) {
    throw Error{ErrorKind::input, path.string() + ": no segment labels"};
  }
  return labels;
}

std::vector<int> relabel_dense(const std::vector<int>& labels, bool* changed) {
  std::map<int, int> dense;
  for (int label : labels) {
    dense.emplace(label, 0);
  }
  int next{1};
  bool same{true};
  for (auto& [label, id] : dense) {
    id = next++;
    same = same && (label == id);
  }
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) {
    out.push_back(dense.at(label));
  }
  if (changed != nullptr) {
    *changed = !same;
  }
  return out;
}

Dataset load_dataset(const DatasetPaths& paths, std::vector<std::string>* warnings) {
  Matrix x{read_matrix_csv(paths.x)};
  Matrix y{read_matrix_csv(paths.y)};
  if (x.rows() != y.rows()) {
    throw Error{ErrorKind::dimension,
                "row count mismatch: " + paths.x.string() + " has " +
                    std::to_string(x.rows()) + " rows, " + paths.y.string() +
                    " has " + std::to_string(y.rows())};
  }

  std::optional<std::vector<int>> segments;
  if (paths.segments) {
    const std::vector<int> raw{read_segment_labels(*paths.segments)};
    if (static_cast<Index>(raw.size()) != x.rows()) {
      throw Error{ErrorKind::dimension,
                  "row count mismatch: " + paths.segments->string() + " has " +
                      std::to_string(raw.size()) + " labels, " +
                      paths.x.string() + " has " + std::to_string(x.rows()) +
                      " rows"};
    }
    bool changed{false};
    segments = relabel_dense(raw, &changed);
    if (changed && warnings != nullptr) {
      const int k{*std::max_element(segments->begin(), segments->end())};
      warnings->push_back("segment labels in " + paths.segments->string() +
                          " are not 1.." + std::to_string(k) +
                          "; relabelled densely in increasing label order");
    }
  }

  try {
    return Dataset::create(std::move(x), std::move(y), std::move(segments));
  } catch (const Error& e) {
    throw Error{ErrorKind::input, e.what()};
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec]{std::to_chars(buf, buf + sizeof buf, value,
                                     std::chars_format::general, 17)};
  if (ec != std::errc{}) {
    throw Error{ErrorKind::numeric, "cannot format floating-point value"};
  }
  return std::string{buf, ptr};
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  std::ofstream out{path, std::ios::binary};
  if (!out) {
    throw Error{ErrorKind::input, "cannot write " + path.string()};
  }
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      out << (j ? "," : "") << header[j];
    }
    out << '\n';
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      out << (j ? "," : "") << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace trcv::io
