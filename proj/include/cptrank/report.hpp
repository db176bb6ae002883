#pragma once

#include "cptrank/corpus.hpp"
#include "cptrank/json_io.hpp"

#include <filesystem>
#include <ostream>

namespace cptrank {

enum class ReportFormat { csv, json };

/// One row per (record, profiled rank):
/// network,node,dims,rank,max_error,frob_error,minimal_rank,general_params,cp_params,source
void write_report_csv(const CorpusReport& report, std::ostream& out);

/// rank,percentage,control_percentage
void write_curve_csv(const CorpusReport& report, std::ostream& out);

/// rank,max_error,control_max_error
void write_profile_csv(const ProfileRun& run, std::ostream& out);

[[nodiscard]] Json report_to_json(const CorpusReport& report);
[[nodiscard]] CorpusReport report_from_json(const Json& j);

/// Writes the report in the given format. Throws std::runtime_error naming
/// the path when it cannot be written.
void emit_report(const CorpusReport& report, ReportFormat format, const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double; "inf" for infinity.
[[nodiscard]] std::string format_double(double x);

}  // namespace cptrank
