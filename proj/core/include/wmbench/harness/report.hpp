#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wmbench/harness/evaluate.hpp"
#include "wmbench/metrics.hpp"

namespace wmbench {

nlohmann::ordered_json to_json(const MetricReport& r);
MetricReport metric_report_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const EvaluationReport& r);
EvaluationReport evaluation_report_from_json(const nlohmann::json& j);

/// Aligned plain-text table, one row per report, columns in the order
/// Long Context Mem., Generated Scene Consis., Action Space Generalization,
/// Aesthetic, Image Quality, RPE Trans, RPE Rot. Missing scores print "-".
std::string format_table(const std::vector<MetricReport>& rows);

/// Writes report.json and report.txt into `dir`.
void write_report(const EvaluationReport& r, const std::filesystem::path& dir);
EvaluationReport read_report(const std::filesystem::path& path);

/// Copies externally computed visual-quality scores (keys "aesthetic" and
/// "imaging", per perspective) into the matching reports.
void merge_external_scores(EvaluationReport& r, const nlohmann::json& scores);

}  // namespace wmbench
