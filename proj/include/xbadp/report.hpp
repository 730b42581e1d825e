#pragma once

#include <string>

#include "xbadp/harness.hpp"

namespace xbadp {

enum class ReportFormat { csv, json, md };

ReportFormat parse_report_format(const std::string& s);

/// csv and json are lossless (17 significant digits); md is for reading.
std::string emit_report(const MetricsTable& m, ReportFormat format);

MetricsTable metrics_from_csv(const std::string& csv);
MetricsTable metrics_from_json(const std::string& json);

}  // namespace xbadp
