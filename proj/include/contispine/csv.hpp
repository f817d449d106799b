// Copyright 2026 The contispine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "contispine/errors.hpp"

namespace contispine {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Rectangular table: header row, units row, data rows. Serialized as CSV with
/// LF line endings and `%.10g` for floating point, so identical tables always
/// produce identical bytes.
class ResultTable {
 public:
  ResultTable() = default;
  ResultTable(std::vector<std::string> columns, std::vector<std::string> units)
      : columns_(std::move(columns)), units_(std::move(units)) {
    if (columns_.size() != units_.size()) {
      throw std::logic_error("ResultTable: units row must match the header");
    }
  }

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) {
      throw std::logic_error("ResultTable: row width " + std::to_string(row.size()) +
                             " != " + std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& units() const { return units_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i] == name) return i;
    }
    throw std::out_of_range("ResultTable: no column " + name);
  }
  bool has_column(const std::string& name) const {
    for (const auto& c : columns_) {
      if (c == name) return true;
    }
    return false;
  }

  double number(std::size_t row, const std::string& name) const {
    const Cell& c = rows_.at(row).at(column(name));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw std::invalid_argument("ResultTable: column " + name + " is not numeric");
  }
  const std::string& text(std::size_t row, const std::string& name) const {
    return std::get<std::string>(rows_.at(row).at(column(name)));
  }

  static std::string format(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
      // -0 prints as 0 so signed zeros never leak into golden files
      const double v = (*d == 0.0) ? 0.0 : *d;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", v);
      return buf;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n\r") != std::string::npos) {
      throw std::logic_error("ResultTable: text cells must not contain separators");
    }
    return s;
  }

  std::string to_csv() const {
    std::ostringstream out;
    auto line = [&out](const auto& cells, auto&& fmt) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << fmt(cells[i]);
      }
      out << '\n';
    };
    auto same = [](const std::string& s) { return s; };
    line(columns_, same);
    line(units_, same);
    for (const auto& r : rows_) line(r, [](const Cell& c) { return format(c); });
    return out.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> units_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace contispine
