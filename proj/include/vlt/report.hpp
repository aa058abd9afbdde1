#pragma once

#include "vlt/classifier.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace vlt {

enum class Format { Table, Csv, Json };

/// Throws Error(UnknownFormat) naming the valid choices.
Format parse_format(std::string_view name);

inline constexpr const char* kReportSchemaVersion = "1";

/// Column heads, in published order.
inline constexpr std::array<const char*, 6> kSummaryColumns = {
    "Project with CVE", "CVE", "Vulnerable Blobs", "Vulnerable Projects", "Safe Projects", "Unknown Projects"};

SummaryRow summarize(const TraceReport& report, const std::string& upstream_name);

/// table and csv render the summary row only; json is the full lossless
/// report.
std::string render(const TraceReport& report, Format format);

std::string render_table(std::span<const SummaryRow> rows);
std::string render_csv(std::span<const SummaryRow> rows);

std::string report_to_json(const TraceReport& report);
TraceReport report_from_json(std::string_view text);

/// Writes vulnerable.txt, safe.txt, unknown.txt (and fixed_only.txt when the
/// report carries adopters), one project name per line.
void write_project_lists(const TraceReport& report, const std::filesystem::path& dir);

} // namespace vlt
