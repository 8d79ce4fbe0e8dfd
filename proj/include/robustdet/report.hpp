#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "robustdet/experiment.hpp"

namespace robustdet {

enum class ReportFormat { json, csv };

std::optional<ReportFormat> parse_format(std::string_view name) noexcept;

// Column order of the CSV report. Frozen; see docs/config.md.
inline constexpr const char* kCsvHeader = "n,member,fa_hat,miss_hat,miss_count,miss_log,censored";

nlohmann::json to_json(const ReportRecord& record);
ReportRecord record_from_json(const nlohmann::json& doc);

std::string render_json(const ReportRecord& record);
// One row per entry of payload["series"]; header only when there is none.
std::string render_csv(const ReportRecord& record);

// Writes to `path`, or to stdout when path is empty or "-".
void write_report(const ReportRecord& record, const std::string& path, ReportFormat format);

}  // namespace robustdet
