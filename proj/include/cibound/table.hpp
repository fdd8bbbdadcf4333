#pragma once

#include <array>
#include <string>
#include <vector>

namespace cibound {

// The plot-data schema: one row per sweep point, nine fixed columns. The
// first column holds the sweep variable (labelled E in the header for both
// epoch and training-set-size sweeps).
struct ResultTable {
  static constexpr int kColumnCount = 9;
  static const std::array<const char*, kColumnCount>& columns();

  std::vector<std::array<double, kColumnCount>> rows;
};

// Decimal-notation formatting with `sig` significant digits (never
// scientific notation). Reformatting the parsed value reproduces the same
// string, which is what makes table round trips byte-identical.
std::string format_sig(double value, int sig = 6);

// Whitespace-separated table: header line, then one row per line.
std::string format_table(const ResultTable& table);

// Comma-separated variant with the same header names.
std::string format_table_csv(const ResultTable& table);

// Parses format_table output. Throws FormatError (with byte offset) on a
// bad header, malformed number, or wrong column count.
ResultTable parse_table(const std::string& text);

// Writes via a temporary file in the same directory plus rename, so readers
// never observe a half-written table.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace cibound
