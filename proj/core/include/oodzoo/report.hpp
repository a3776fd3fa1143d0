#pragma once

#include <filesystem>
#include <string>

#include "oodzoo/metrics.hpp"

namespace oodzoo {

/// "%.6g": six significant digits, the fixed float format of every report.
std::string format_number(double value);
/// Rounds to six significant digits so JSON output matches format_number.
double round_sig6(double value);

std::string report_csv(const DetectionReport& report);
std::string report_json(const DetectionReport& report);
std::string report_text(const DetectionReport& report);

/// Writes <path> as CSV and a sibling <stem>.json with metadata.
void write_report(const DetectionReport& report, const std::filesystem::path& csv_path);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace oodzoo
