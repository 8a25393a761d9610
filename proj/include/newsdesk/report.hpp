#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "newsdesk/error.hpp"
#include "newsdesk/ranker.hpp"
#include "newsdesk/snapshot_store.hpp"

namespace newsdesk {

enum class ReportFormat { kCsv, kJson };

inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

}  // namespace detail

// CSV: header "outlet,<ids...>" then one row per outlet.
// JSON: {"outlets": [...], "values": [[...], ...]}. Numbers use 4 decimals.
inline std::string render_report(const AgreementMatrix& m, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out += "outlet";
    for (const auto& o : m.outlets) out += "," + detail::csv_field(o);
    out += "\n";
    for (std::size_t i = 0; i < m.outlets.size(); ++i) {
      out += detail::csv_field(m.outlets[i]);
      for (double v : m.values[i]) out += "," + fixed4(v);
      out += "\n";
    }
    return out;
  }
  out += "{\n  \"outlets\": [";
  for (std::size_t i = 0; i < m.outlets.size(); ++i) out += (i ? ", " : "") + detail::json_string(m.outlets[i]);
  out += "],\n  \"values\": [";
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    out += i ? ",\n    [" : "\n    [";
    for (std::size_t j = 0; j < m.values[i].size(); ++j) out += (j ? ", " : "") + fixed4(m.values[i][j]);
    out += "]";
  }
  out += m.values.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

// CSV: "rank,item_id,score" rows. JSON: model_outlet, item_ids, scores.
inline std::string render_report(const RankedList& r, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out += "rank,item_id,score\n";
    for (std::size_t i = 0; i < r.item_ids.size(); ++i) {
      out += std::to_string(i + 1) + "," + detail::csv_field(r.item_ids[i]) + "," + fixed4(r.scores[i]) + "\n";
    }
    return out;
  }
  out += "{\n  \"model_outlet\": " + detail::json_string(r.model_outlet) + ",\n  \"item_ids\": [";
  for (std::size_t i = 0; i < r.item_ids.size(); ++i) out += (i ? ", " : "") + detail::json_string(r.item_ids[i]);
  out += "],\n  \"scores\": [";
  for (std::size_t i = 0; i < r.scores.size(); ++i) out += (i ? ", " : "") + fixed4(r.scores[i]);
  out += "]\n}\n";
  return out;
}

template <class Report>
void emit_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
  try {
    write_file(path, render_report(report, format));
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorCode::kIoFailure, e.what());
  }
}

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  return std::nullopt;
}

}  // namespace newsdesk
