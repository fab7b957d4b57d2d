// Copyright 2026 The kerrgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal RFC 4180 style CSV: comma separated, fields quoted only when they
// contain a comma, quote or line break, one fixed header row.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace kerrgate {

/// 12 significant digits, the precision used for every floating-point field.
std::string format_number(double value);

std::string csv_escape(std::string_view field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  /// Throws std::invalid_argument when the row width differs from the header.
  void add_row(std::vector<std::string> row);

  /// Column index by header name; throws std::invalid_argument if absent.
  std::size_t column(std::string_view name) const;

  void write(std::ostream& out) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses a whole CSV document. The first record is the header. Throws
/// std::invalid_argument on unterminated quotes or ragged rows.
CsvTable parse_csv(std::string_view text);

}  // namespace kerrgate
