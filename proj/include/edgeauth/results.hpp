#pragma once

#include "edgeauth/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace edgeauth {

/// An empty cell (std::monostate) is written as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws if the row width differs from the column count.
  void add_row(std::vector<Cell> row);
};

enum class Format { Csv, JsonLines };

Format format_from_string(const std::string& s);

/// Doubles are written with 9 significant digits.
void write_table(std::ostream& out, const Table& table, Format format);

/// Writes `table` to `path`; failures name the path.
void emit_results(const Table& table, Format format, const std::filesystem::path& path);

Table to_table(std::span<const RunRecord> records);
Table to_table(std::span<const EpochRecord> records);
Table to_table(std::span<const ErrorBoundRow> rows);
Table to_table(std::span<const ThresholdRow> rows);
Table to_table(std::span<const SnrRow> rows);

/// Per-iteration peer estimates: iteration, peer, x1, x2, x3, residual.
Table trajectory_table(const ConsensusResult& result);

}  // namespace edgeauth
