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

#ifndef DPAUDIT_DATASET_H_
#define DPAUDIT_DATASET_H_

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dpaudit/plan.h"

namespace dpaudit {

// Numeric columns hold double; every other kind holds its text.
using Cell = std::variant<std::string, double>;
using Row = std::vector<Cell>;  // schema column order

struct Dataset {
  Schema schema;
  std::string unit_column;
  std::vector<Row> rows;
  // Index of each row in the originally loaded file (0-based, header excluded).
  std::vector<std::size_t> origin;
  // Privacy-unit value -> row positions in `rows`.
  std::map<std::string, std::vector<std::size_t>> unit_index;

  std::size_t ColumnIndex(std::string_view name) const;  // throws DatasetError
  const std::string& UnitOf(std::size_t row) const;
  void RebuildIndex();
};

// `row`/`column` are 1-based positions in the CSV (header is row 0) when the
// error is tied to a cell.
class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& message, std::optional<std::size_t> row = std::nullopt,
                        std::optional<std::size_t> column = std::nullopt)
      : std::runtime_error(message), row_(row), column_(column) {}

  std::optional<std::size_t> row() const { return row_; }
  std::optional<std::size_t> column() const { return column_; }

 private:
  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

// RFC-4180 reader: comma separated, double-quoted fields with "" escapes,
// LF or CRLF records, optional UTF-8 BOM. Returns header + records.
std::vector<std::vector<std::string>> ReadCsv(std::string_view text);

// Parses CSV text against `schema`. Extra CSV columns are ignored.
Dataset ParseCsvDataset(std::string_view text, const Schema& schema,
                        const std::string& unit_column);
Dataset LoadDataset(const std::string& path, const Schema& schema,
                    const std::string& unit_column);

// Builds a dataset from already-typed rows, checking them against the schema.
Dataset MakeDataset(const Schema& schema, const std::string& unit_column, std::vector<Row> rows);

}  // namespace dpaudit

#endif  // DPAUDIT_DATASET_H_
