// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpaudit/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dpaudit {
namespace {

bool ParseNumber(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

// Accepts YYYY-MM-DD optionally followed by [T ]HH:MM[:SS...].
bool LooksLikeTimestamp(std::string_view s) {
  auto digits = [&](std::size_t from, std::size_t n) {
    if (s.size() < from + n) return false;
    for (std::size_t i = from; i < from + n; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
  };
  if (!digits(0, 4) || s.size() < 10 || s[4] != '-' || !digits(5, 2) || s[7] != '-' ||
      !digits(8, 2)) {
    return false;
  }
  if (s.size() == 10) return true;
  return (s[10] == 'T' || s[10] == ' ') && digits(11, 2) && s.size() >= 16 && s[13] == ':' &&
         digits(14, 2);
}

void CheckCell(const Column& column, const Cell& cell, std::size_t row, std::size_t col) {
  const bool numeric = std::holds_alternative<double>(cell);
  if (column.kind == ColumnKind::kNumeric) {
    if (!numeric) {
      throw DatasetError("row " + std::to_string(row) + ", column " + std::to_string(col) + " ('" +
                             column.name + "'): expected a number",
                         row, col);
    }
    return;
  }
  if (numeric) {
    throw DatasetError("row " + std::to_string(row) + ", column " + std::to_string(col) + " ('" +
                           column.name + "'): expected text",
                       row, col);
  }
  const auto& text = std::get<std::string>(cell);
  if (column.kind == ColumnKind::kCategorical && column.values &&
      std::find(column.values->begin(), column.values->end(), text) == column.values->end()) {
    throw DatasetError("row " + std::to_string(row) + ", column " + std::to_string(col) + " ('" +
                           column.name + "'): unknown categorical value '" + text + "'",
                       row, col);
  }
  if (column.kind == ColumnKind::kTimestamp && !LooksLikeTimestamp(text)) {
    throw DatasetError("row " + std::to_string(row) + ", column " + std::to_string(col) + " ('" +
                           column.name + "'): malformed timestamp '" + text + "'",
                       row, col);
  }
}

}  // namespace

std::size_t Dataset::ColumnIndex(std::string_view name) const {
  if (auto i = schema.IndexOf(name)) return *i;
  throw DatasetError("unknown column '" + std::string(name) + "'");
}

const std::string& Dataset::UnitOf(std::size_t row) const {
  return std::get<std::string>(rows[row][ColumnIndex(unit_column)]);
}

void Dataset::RebuildIndex() {
  unit_index.clear();
  const std::size_t unit = ColumnIndex(unit_column);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Cell& c = rows[i][unit];
    const std::string key =
        std::holds_alternative<std::string>(c) ? std::get<std::string>(c) : std::to_string(std::get<double>(c));
    unit_index[key].push_back(i);
  }
}

std::vector<std::vector<std::string>> ReadCsv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line is not a record.
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      ++i;
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw DatasetError("unterminated quoted field at end of CSV");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

Dataset ParseCsvDataset(std::string_view text, const Schema& schema,
                        const std::string& unit_column) {
  auto records = ReadCsv(text);
  if (records.empty()) throw DatasetError("CSV has no header row");
  const auto& header = records.front();
  std::vector<std::size_t> source_of(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), schema.columns[c].name);
    if (it == header.end()) {
      throw DatasetError("missing column '" + schema.columns[c].name + "' in CSV header");
    }
    source_of[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw DatasetError("row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                             " fields, header has " + std::to_string(header.size()),
                         r);
    }
    Row row;
    row.reserve(schema.columns.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const std::string& raw = rec[source_of[c]];
      if (schema.columns[c].kind == ColumnKind::kNumeric) {
        double value;
        if (!ParseNumber(raw, value)) {
          throw DatasetError("row " + std::to_string(r) + ", column " +
                                 std::to_string(source_of[c] + 1) + " ('" +
                                 schema.columns[c].name + "'): '" + raw + "' is not a number",
                             r, source_of[c] + 1);
        }
        row.emplace_back(value);
      } else {
        row.emplace_back(raw);
        CheckCell(schema.columns[c], row.back(), r, source_of[c] + 1);
      }
    }
    rows.push_back(std::move(row));
  }
  Dataset ds;
  ds.schema = schema;
  ds.unit_column = unit_column;
  ds.rows = std::move(rows);
  ds.origin.resize(ds.rows.size());
  for (std::size_t i = 0; i < ds.origin.size(); ++i) ds.origin[i] = i;
  ds.RebuildIndex();
  return ds;
}

Dataset LoadDataset(const std::string& path, const Schema& schema,
                    const std::string& unit_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCsvDataset(buffer.str(), schema, unit_column);
}

Dataset MakeDataset(const Schema& schema, const std::string& unit_column, std::vector<Row> rows) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.columns.size()) {
      throw DatasetError("row " + std::to_string(r + 1) + " has the wrong number of cells", r + 1);
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      CheckCell(schema.columns[c], rows[r][c], r + 1, c + 1);
    }
  }
  Dataset ds;
  ds.schema = schema;
  ds.unit_column = unit_column;
  ds.rows = std::move(rows);
  ds.origin.resize(ds.rows.size());
  for (std::size_t i = 0; i < ds.origin.size(); ++i) ds.origin[i] = i;
  ds.RebuildIndex();
  return ds;
}

}  // namespace dpaudit
