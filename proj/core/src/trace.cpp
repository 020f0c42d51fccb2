#include "locodl/trace.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "locodl/error.hpp"

namespace locodl {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string trace_csv_header() {
  std::string header;
  for (std::size_t c = 0; c < kTraceColumns.size(); ++c) {
    if (c > 0) header += ',';
    header += kTraceColumns[c];
  }
  return header;
}

std::string trace_to_csv(const ExperimentTrace& trace) {
  std::string prefix = trace.algorithm + ',' + trace.dataset + ',' + std::to_string(trace.n) + ',' +
                       std::to_string(trace.d) + ',' + format_double(trace.kappa) + ',' + trace.compressor + ',' +
                       std::to_string(trace.seed) + ',';
  std::string out = trace_csv_header() + '\n';
  for (const auto& row : trace.rows) {
    out += prefix;
    out += std::to_string(row.t) + ',' + std::to_string(row.rounds) + ',' + format_double(row.bits_per_client) +
           ',' + format_double(row.sqdist_mean) + ',' + format_double(row.sqdist_ybar) + ',' +
           format_double(row.obj_gap) + ',' + format_double(row.lyapunov) + '\n';
  }
  return out;
}

std::string trace_metadata_text(const ExperimentTrace& trace) {
  std::string out;
  for (const auto& [key, value] : trace.metadata) out += key + '=' + value + '\n';
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw InputError("csv: no column named '" + std::string(name) + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (table.header.empty()) {
      table.header = std::move(fields);
    } else {
      if (fields.size() != table.header.size()) throw ParseError(line_no, "csv: row has the wrong number of fields");
      table.rows.push_back(std::move(fields));
    }
  }
  if (table.header.empty()) throw InputError("csv: empty input");
  return table;
}

}  // namespace locodl
