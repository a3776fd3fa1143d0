#include "oodzoo/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "oodzoo/error.hpp"

namespace oodzoo {

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

double round_sig6(double value) {
  if (!std::isfinite(value)) return value;
  return std::strtod(format_number(value).c_str(), nullptr);
}

std::string report_csv(const DetectionReport& report) {
  std::ostringstream out;
  out << "method,dataset,tpr,fpr,auc\n";
  for (const auto& r : report.rows) {
    out << r.method << ',' << r.dataset << ',' << format_number(r.tpr) << ',' << format_number(r.fpr) << ','
        << format_number(r.auc) << '\n';
  }
  return out.str();
}

std::string report_json(const DetectionReport& report) {
  nlohmann::ordered_json doc;
  auto& meta = doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["method"] = r.method;
    row["dataset"] = r.dataset;
    row["tpr"] = round_sig6(r.tpr);
    row["fpr"] = round_sig6(r.fpr);
    row["auc"] = round_sig6(r.auc);
    rows.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string report_text(const DetectionReport& report) {
  std::size_t mw = 6, dw = 7;
  for (const auto& r : report.rows) {
    mw = std::max(mw, r.method.size());
    dw = std::max(dw, r.dataset.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(mw)) << "method" << "  " << std::setw(static_cast<int>(dw))
      << "dataset" << "  " << std::right << std::setw(10) << "TPR%" << std::setw(10) << "FPR%" << std::setw(10)
      << "AUC%" << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(static_cast<int>(mw)) << r.method << "  " << std::setw(static_cast<int>(dw))
        << r.dataset << "  " << std::right << std::setw(10) << format_number(r.tpr) << std::setw(10)
        << format_number(r.fpr) << std::setw(10) << format_number(r.auc) << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

void write_report(const DetectionReport& report, const std::filesystem::path& csv_path) {
  write_text_file(csv_path, report_csv(report));
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  if (json_path == csv_path) json_path += ".json";
  write_text_file(json_path, report_json(report));
}

}  // namespace oodzoo
