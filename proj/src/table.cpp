#include "cibound/table.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "cibound/errors.hpp"

namespace cibound {

const std::array<const char*, ResultTable::kColumnCount>& ResultTable::columns() {
  static const std::array<const char*, kColumnCount> names = {
      "E",       "trainavg", "trainstd", "testavg", "teststd",
      "slowavg", "slowstd",  "fastavg",  "faststd"};
  return names;
}

std::string format_sig(double value, int sig) {
  if (sig < 1 || sig > 17) throw InvalidParameter("significant digits must be in [1, 17]");
  if (!std::isfinite(value)) throw InvalidParameter("cannot format non-finite value");
  if (std::signbit(value) && value == 0.0) value = 0.0;  // normalize -0
  char buf[64];

  int exp10 = 0;
  if (value != 0.0) {
    // Let printf do the rounding first, then read the decimal exponent off
    // the scientific form; this handles values that round across a power
    // of ten (e.g. 0.99999996 -> 1.00000).
    std::snprintf(buf, sizeof buf, "%.*e", sig - 1, value);
    const char* e = buf;
    while (*e && *e != 'e' && *e != 'E') ++e;
    exp10 = std::atoi(e + 1);
  }
  int decimals = sig - 1 - exp10;
  if (decimals < 0) decimals = 0;
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

namespace {

std::string render(const ResultTable& table, char sep) {
  std::string out;
  const auto& names = ResultTable::columns();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out.push_back(sep);
    out += names[c];
  }
  out.push_back('\n');
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(sep);
      out += format_sig(row[c]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace

std::string format_table(const ResultTable& table) { return render(table, ' '); }

std::string format_table_csv(const ResultTable& table) { return render(table, ','); }

ResultTable parse_table(const std::string& text) {
  std::size_t pos = 0;
  const auto next_line = [&](std::string& line, std::size_t& line_start) {
    if (pos >= text.size()) return false;
    line_start = pos;
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      line = text.substr(pos);
      pos = text.size();
    } else {
      line = text.substr(pos, nl - pos);
      pos = nl + 1;
    }
    return true;
  };

  std::string line;
  std::size_t line_start = 0;
  if (!next_line(line, line_start)) throw FormatError("empty table: missing header", 0);

  std::string expected;
  const auto& names = ResultTable::columns();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) expected.push_back(' ');
    expected += names[c];
  }
  if (line != expected) throw FormatError("unexpected table header", line_start);

  ResultTable table;
  while (next_line(line, line_start)) {
    if (line.empty()) {
      if (pos >= text.size()) break;  // tolerate one trailing newline
      throw FormatError("blank line inside table", line_start);
    }
    std::array<double, ResultTable::kColumnCount> row{};
    std::size_t field_start = 0;
    for (int c = 0; c < ResultTable::kColumnCount; ++c) {
      const std::size_t field_end = line.find(' ', field_start);
      const bool last = c == ResultTable::kColumnCount - 1;
      if (last != (field_end == std::string::npos)) {
        throw FormatError("row does not have exactly 9 columns", line_start + field_start);
      }
      const std::string field = line.substr(
          field_start, field_end == std::string::npos ? std::string::npos
                                                      : field_end - field_start);
      char* end = nullptr;
      const double value = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(value)) {
        throw FormatError("malformed numeric field", line_start + field_start);
      }
      row[static_cast<std::size_t>(c)] = value;
      field_start = field_end == std::string::npos ? line.size() : field_end + 1;
    }
    table.rows.push_back(row);
  }
  return table;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open temporary file for writing: " + tmp, 0);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FormatError("short write to temporary file: " + tmp, 0);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw FormatError("cannot rename temporary file onto: " + path, 0);
  }
}

}  // namespace cibound
