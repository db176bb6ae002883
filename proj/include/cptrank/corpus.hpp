#pragma once

#include "cptrank/network.hpp"
#include "cptrank/rank_analysis.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cptrank {

/// Analysis of one CPT or of its matched random control.
struct CorpusRecord {
    std::string network;
    std::string node;
    Dims dims;                               ///< [parents..., child] as in the file
    Dims analyzed_dims;                      ///< after dropping singleton parents
    std::vector<std::size_t> squeezed_modes;
    bool control = false;
    std::uint64_t control_seed = 0;
    std::optional<std::size_t> minimal_rank;  ///< nullopt: exceeds r_max
    std::vector<RankEntry> profile;           ///< ranks 1..minimal rank (or r_max)
    std::size_t general_params = 0;
    std::optional<std::size_t> cp_params;     ///< generalized CP count at the minimal rank
    std::vector<std::string> diagnostics;

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct CurvePoint {
    std::size_t rank = 0;
    double percentage = 0.0;  ///< share of tables with minimal rank <= rank, in [0,100]

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct FileError {
    std::string path;
    std::string message;

    friend bool operator==(const FileError&, const FileError&) = default;
};

struct CorpusOptions {
    std::size_t min_parents = 3;
    bool with_controls = false;
    ControlMode control_mode = ControlMode::normalized;
    std::size_t jobs = 0;  ///< 0: one worker per hardware thread
    bool strict = false;   ///< abort on the first unreadable or invalid file
    std::function<void(const std::string&)> log;
};

struct CorpusReport {
    AnalysisConfig config;
    std::size_t min_parents = 3;
    bool with_controls = false;
    ControlMode control_mode = ControlMode::normalized;
    std::vector<CorpusRecord> records;   ///< sorted by (network, node)
    std::vector<CorpusRecord> controls;  ///< same order as records
    std::vector<CurvePoint> curve;
    std::vector<CurvePoint> control_curve;
    std::vector<FileError> file_errors;
    std::vector<std::string> warnings;

    friend bool operator==(const CorpusReport&, const CorpusReport&) = default;
};

/// Percentage-vs-rank curve over ranks 1..r_max. Empty when there are no records.
[[nodiscard]] std::vector<CurvePoint> percentage_curve(const std::vector<CorpusRecord>& records, std::size_t r_max);

/// Analyses every CPT with at least min_parents parents in the given files.
/// Results do not depend on the number of jobs. With options.strict a bad
/// file rethrows its ParseError / ValidationError; otherwise it becomes a
/// FileError and the run continues.
[[nodiscard]] CorpusReport run_corpus(const std::vector<std::filesystem::path>& paths, const AnalysisConfig& cfg,
                                      const CorpusOptions& options);

/// Seed of the random control paired with (network, node).
[[nodiscard]] std::uint64_t control_seed_for(std::uint64_t base, const std::string& network, const std::string& node);

struct ProfileRun {
    std::string network;
    std::string node;
    Dims dims;
    RankProfile profile;
    std::optional<RankProfile> control;
};

/// Full rank profile of one named CPT, plus a matched random control when
/// requested. Throws NodeLookupError listing the eligible nodes when the name
/// is unknown or the node has fewer than min_parents parents.
[[nodiscard]] ProfileRun profile_single(const std::filesystem::path& path, const std::string& node,
                                        const AnalysisConfig& cfg, std::size_t min_parents, bool with_control,
                                        ControlMode control_mode = ControlMode::normalized,
                                        const ParseOptions& parse = {});

}  // namespace cptrank
