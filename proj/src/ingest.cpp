#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "uslab/harness.hpp"

namespace uslab {
namespace {

std::string located(const std::string& message, std::optional<std::size_t> row, const std::string& column) {
  std::string out = message;
  if (row) out += " at row " + std::to_string(*row);
  if (!column.empty()) out += (row ? ", column '" : " in column '") + column + "'";
  return out;
}

/// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_record(std::string_view line, std::size_t row) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw CsvError(CsvError::Kind::malformed, "unterminated quote", row);
  cells.push_back(std::move(cell));
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

CsvError::CsvError(Kind kind, std::string message, std::optional<std::size_t> row, std::string column)
    : std::runtime_error(located(message, row, column)), kind_(kind), row_(row), column_(std::move(column)) {}

CsvDataset ingest_csv_text(std::string_view text, const CsvOptions& options) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t nl = text.find('\n', start);
      const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
      lines.emplace_back(text.substr(start, end - start));
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  // Drop trailing blank lines.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw CsvError(CsvError::Kind::malformed, "file has no header row");
  if (lines[0].starts_with("\xEF\xBB\xBF")) lines[0].erase(0, 3);

  std::vector<std::string> header = split_record(lines[0], 0);
  for (auto& h : header) h = std::string(trim(h));

  std::size_t label_idx = 0;
  if (const auto* name = std::get_if<std::string>(&options.label_column)) {
    auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw CsvError(CsvError::Kind::missing_column, "label column not found", std::nullopt, *name);
    label_idx = static_cast<std::size_t>(it - header.begin());
  } else {
    label_idx = std::get<std::size_t>(options.label_column);
    if (label_idx >= header.size()) {
      throw CsvError(CsvError::Kind::missing_column, "label column index " + std::to_string(label_idx) + " out of range");
    }
  }

  CsvDataset out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) out.feature_names.push_back(header[c]);
  }
  if (out.feature_names.empty()) throw CsvError(CsvError::Kind::missing_column, "no feature columns");
  const std::string& label_name = header[label_idx];

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li;
    if (trim(lines[li]).empty()) throw CsvError(CsvError::Kind::malformed, "blank line", row);
    const auto cells = split_record(lines[li], row);
    if (cells.size() != header.size()) {
      throw CsvError(CsvError::Kind::malformed,
                     "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()),
                     row);
    }
    std::vector<double> x;
    x.reserve(header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        throw CsvError(CsvError::Kind::non_numeric, "non-numeric cell '" + std::string(trim(cells[c])) + "'", row,
                       header[c]);
      }
      if (c == label_idx) {
        if (*v != -1.0 && *v != 0.0 && *v != 1.0) {
          throw CsvError(CsvError::Kind::bad_label, "label must be -1, 0 or 1", row, label_name);
        }
        labels.push_back(*v);
      } else {
        x.push_back(*v);
      }
    }
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw CsvError(CsvError::Kind::malformed, "file has no data rows");

  const std::set<double> seen(labels.begin(), labels.end());
  if (seen.count(-1.0) && seen.count(0.0)) {
    throw CsvError(CsvError::Kind::bad_label, "labels mix the {0,1} and {-1,+1} encodings", std::nullopt, label_name);
  }
  if (seen.size() < 2) {
    throw CsvError(CsvError::Kind::too_few_labels, "fewer than 2 distinct labels", std::nullopt, label_name);
  }

  const std::size_t k = out.feature_names.size();
  if (options.standardize) {
    const std::size_t fit_rows = std::min(rows.size(), options.train_rows.value_or(rows.size()));
    if (fit_rows == 0) throw std::invalid_argument("standardization needs at least one training row");
    out.means.assign(k, 0.0);
    out.scales.assign(k, 0.0);
    for (std::size_t i = 0; i < fit_rows; ++i) {
      for (std::size_t c = 0; c < k; ++c) out.means[c] += rows[i][c];
    }
    for (auto& m : out.means) m /= static_cast<double>(fit_rows);
    for (std::size_t i = 0; i < fit_rows; ++i) {
      for (std::size_t c = 0; c < k; ++c) out.scales[c] += (rows[i][c] - out.means[c]) * (rows[i][c] - out.means[c]);
    }
    // Population standard deviation; constant columns are only centred.
    for (auto& s : out.scales) {
      s = std::sqrt(s / static_cast<double>(fit_rows));
      if (!(s > 0.0)) s = 1.0;
    }
  }

  out.examples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Vector x(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
      x[static_cast<Eigen::Index>(c)] = options.standardize ? (rows[i][c] - out.means[c]) / out.scales[c] : rows[i][c];
    }
    out.examples.emplace_back(std::move(x), labels[i] > 0.0 ? 1 : -1);
  }
  return out;
}

CsvDataset ingest_csv_dataset(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(CsvError::Kind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_csv_text(buf.str(), options);
}

}  // namespace uslab
