#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spst/matrix.hpp"
#include "spst/solvers.hpp"

namespace spst {

// Summary row mirroring the benchmark tables: one line per (problem, method).
struct ReportRow {
  std::string method;
  std::size_t num_iter = 0;
  double wall_seconds = 0.0;
  double final_grad_norm = 0.0;
  double feasibility = 0.0;
  double final_f = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

enum class ReportFormat { Csv, Json };

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline ReportRow summarize(const RunReport& rep) {
  ReportRow row;
  row.method = rep.method;
  if (!rep.iterations.empty()) {
    // Terminal rows (GradTol/StepTooSmall/SubproblemFailure) reuse the index
    // of the iteration at which the loop stopped; MaxIter writes none.
    row.num_iter = rep.reason == TerminationReason::MaxIter
                       ? rep.iterations.back().iter + 1
                       : rep.iterations.back().iter;
  }
  row.wall_seconds = rep.wall_seconds;
  row.final_grad_norm = rep.final_grad_norm;
  row.feasibility = rep.final_feasibility;
  row.final_f = rep.final_f;
  return row;
}

namespace detail {

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV record, honoring double-quoted fields with "" escapes.
inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(std::move(cur));
  return lines;
}

// strtod rather than stod: the latter throws on subnormal values, which are
// legitimate round-trip payloads.
inline double parse_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || end != begin + s.size())
    throw Error("report parse: bad number '" + s + "'");
  return v;
}

inline std::size_t parse_size(const std::string& s) {
  try {
    return static_cast<std::size_t>(std::stoull(s));
  } catch (const std::exception&) {
    throw Error("report parse: bad count '" + s + "'");
  }
}

}  // namespace detail

inline constexpr const char* kReportHeader =
    "method,num_iter,wall_seconds,final_grad_norm,feasibility,final_f";

inline std::string emit_report_csv(const std::vector<ReportRow>& rows) {
  std::string out = kReportHeader;
  out += '\n';
  for (const ReportRow& r : rows) {
    out += detail::csv_escape(r.method);
    out += ',' + std::to_string(r.num_iter);
    out += ',' + format_g17(r.wall_seconds);
    out += ',' + format_g17(r.final_grad_norm);
    out += ',' + format_g17(r.feasibility);
    out += ',' + format_g17(r.final_f);
    out += '\n';
  }
  return out;
}

inline std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::vector<std::string> lines = detail::csv_lines(text);
  if (lines.empty() || lines[0] != kReportHeader)
    throw Error("report parse: missing or unexpected header");
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = detail::csv_split(lines[i]);
    if (f.size() != 6) throw Error("report parse: expected 6 fields");
    ReportRow row;
    row.method = f[0];
    row.num_iter = detail::parse_size(f[1]);
    row.wall_seconds = detail::parse_double(f[2]);
    row.final_grad_norm = detail::parse_double(f[3]);
    row.feasibility = detail::parse_double(f[4]);
    row.final_f = detail::parse_double(f[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string emit_report_json(const std::vector<ReportRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ReportRow& r : rows) {
    nlohmann::ordered_json obj;
    obj["method"] = r.method;
    obj["num_iter"] = r.num_iter;
    obj["wall_seconds"] = r.wall_seconds;
    obj["final_grad_norm"] = r.final_grad_norm;
    obj["feasibility"] = r.feasibility;
    obj["final_f"] = r.final_f;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

inline std::vector<ReportRow> parse_report_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report parse: ") + e.what());
  }
  if (!arr.is_array()) throw Error("report parse: expected a JSON array");
  std::vector<ReportRow> rows;
  for (const auto& obj : arr) {
    ReportRow row;
    row.method = obj.at("method").get<std::string>();
    row.num_iter = obj.at("num_iter").get<std::size_t>();
    row.wall_seconds = obj.at("wall_seconds").get<double>();
    row.final_grad_norm = obj.at("final_grad_norm").get<double>();
    row.feasibility = obj.at("feasibility").get<double>();
    row.final_f = obj.at("final_f").get<double>();
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string emit_report(const std::vector<ReportRow>& rows,
                               ReportFormat format) {
  return format == ReportFormat::Csv ? emit_report_csv(rows)
                                     : emit_report_json(rows);
}

// Per-iteration telemetry in the same CSV dialect. `seconds` is wall time and
// is excluded by determinism comparisons.
inline constexpr const char* kIterationHeader =
    "iter,f,grad_norm,step,slope,seconds";

inline std::string emit_iteration_csv(const std::vector<IterationRecord>& rows) {
  std::string out = kIterationHeader;
  out += '\n';
  for (const IterationRecord& r : rows) {
    out += std::to_string(r.iter);
    out += ',' + format_g17(r.f);
    out += ',' + format_g17(r.grad_norm);
    out += ',' + format_g17(r.step);
    out += ',' + format_g17(r.slope);
    out += ',' + format_g17(r.seconds);
    out += '\n';
  }
  return out;
}

inline std::vector<IterationRecord> parse_iteration_csv(const std::string& text) {
  std::vector<std::string> lines = detail::csv_lines(text);
  if (lines.empty() || lines[0] != kIterationHeader)
    throw Error("iteration parse: missing or unexpected header");
  std::vector<IterationRecord> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = detail::csv_split(lines[i]);
    if (f.size() != 6) throw Error("iteration parse: expected 6 fields");
    rows.push_back({detail::parse_size(f[0]), detail::parse_double(f[1]),
                    detail::parse_double(f[2]), detail::parse_double(f[3]),
                    detail::parse_double(f[4]), detail::parse_double(f[5])});
  }
  return rows;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_report(const std::vector<ReportRow>& rows, ReportFormat format,
                         const std::string& path) {
  write_text_file(path, emit_report(rows, format));
}

}  // namespace spst
