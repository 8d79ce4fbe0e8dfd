#include "robustdet/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "robustdet/errors.hpp"

namespace robustdet {

namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::optional<ReportFormat> parse_format(std::string_view name) noexcept {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  return std::nullopt;
}

json to_json(const ReportRecord& r) {
  return {{"toolkit_version", r.toolkit_version},
          {"mode", std::string(to_string(r.mode))},
          {"seed", r.seed},
          {"wall_time_ms", r.wall_time_ms},
          {"config", r.config},
          {"payload", r.payload}};
}

ReportRecord record_from_json(const json& doc) {
  try {
    ReportRecord r;
    const auto mode = parse_mode(doc.at("mode").get<std::string>());
    if (!mode) fail(ErrorKind::io, "report has an unknown mode");
    r.mode = *mode;
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.toolkit_version = doc.at("toolkit_version").get<std::string>();
    r.wall_time_ms = doc.at("wall_time_ms").get<double>();
    r.config = doc.at("config");
    r.payload = doc.at("payload");
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::io, std::string("malformed report document: ") + e.what());
  }
}

std::string render_json(const ReportRecord& record) { return to_json(record).dump(2) + "\n"; }

std::string render_csv(const ReportRecord& record) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  if (!record.payload.contains("series")) return out.str();
  for (const auto& row : record.payload.at("series")) {
    const auto& ml = row.at("miss_log");
    out << row.at("n").get<std::size_t>() << ',' << csv_field(row.at("member").get<std::string>()) << ','
        << fmt17(row.at("fa_hat").get<double>()) << ',' << fmt17(row.at("miss_hat").get<double>()) << ','
        << row.at("miss_count").get<std::size_t>() << ',' << (ml.is_null() ? "inf" : fmt17(ml.get<double>()))
        << ',' << (row.at("censored").get<bool>() ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_report(const ReportRecord& record, const std::string& path, ReportFormat format) {
  const std::string text = format == ReportFormat::json ? render_json(record) : render_csv(record);
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) fail(ErrorKind::io, "failed writing report to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) fail(ErrorKind::io, "failed writing report to " + path);
}

}  // namespace robustdet
