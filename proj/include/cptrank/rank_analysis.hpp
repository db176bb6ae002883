#pragma once

#include "cptrank/solver.hpp"
#include "cptrank/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cptrank {

struct AnalysisConfig {
    double epsilon = 1e-3;  ///< max-error threshold a rank must beat
    std::size_t r_max = 20;
    SolverConfig solver;
    /// Start rank r+1 from the rank-r solution plus one small term instead of
    /// independent restarts only.
    bool warm_start = false;

    void validate() const;

    friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

/// Best result found at one rank.
struct RankEntry {
    std::size_t rank = 0;
    double max_error = 0.0;
    double frob_error = 0.0;
    int iterations = 0;
    bool converged = false;
    StartInfo start;
    bool failed = false;  ///< every start aborted; errors are +inf

    friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

enum class SourceKind { network_cpt, random_control };

struct ProfileSource {
    SourceKind kind = SourceKind::network_cpt;
    std::string network;
    std::string node;
    std::uint64_t seed = 0;  ///< generator seed of a random control

    friend bool operator==(const ProfileSource&, const ProfileSource&) = default;
};

/// Error-vs-rank record for one table. Entries cover ranks 1..n without gaps.
struct RankProfile {
    Dims dims;
    std::vector<RankEntry> entries;
    ProfileSource source;
    std::vector<std::string> diagnostics;

    friend bool operator==(const RankProfile&, const RankProfile&) = default;
};

/// Runs multi_start_decompose at every rank 1..r_max. With `stop_below_epsilon`
/// the sweep ends at the first rank whose max error is below cfg.epsilon.
/// A rank whose starts all abort is kept as a failed entry.
[[nodiscard]] RankProfile rank_profile(const Tensor& target, const AnalysisConfig& cfg, ProfileSource source = {},
                                       bool stop_below_epsilon = false);

/// Smallest rank with max error < epsilon; nullopt means "exceeds r_max".
[[nodiscard]] std::optional<std::size_t> minimal_rank(const RankProfile& profile, double epsilon);

/// Linear sweep from rank 1 with early exit.
[[nodiscard]] std::optional<std::size_t> minimal_rank(const Tensor& target, const AnalysisConfig& cfg);

/// Orders minimal ranks with the "exceeds r_max" sentinel above every integer.
[[nodiscard]] inline bool rank_less(std::optional<std::size_t> a, std::optional<std::size_t> b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
}

/// Free parameters of a general CPT, dims listed with the child last:
/// (n_child - 1) * product of parent dims.
[[nodiscard]] std::size_t general_param_count(const Dims& dims);

/// k(r-1) + r, the count for an all-binary table of order k at rank r.
[[nodiscard]] std::size_t cp_param_count(std::size_t k, std::size_t r);

/// (sum_j (n_j - 1)) (r - 1) + r. Reduces to cp_param_count when every n_j = 2.
[[nodiscard]] std::size_t cp_param_count_general(const Dims& dims, std::size_t r);

enum class ControlMode { normalized, raw };

[[nodiscard]] std::string to_string(ControlMode mode);
/// Throws StructuralError for anything but "normalized" / "raw".
[[nodiscard]] ControlMode control_mode_from_string(const std::string& s);

/// Random table of the given dims (child last), entries uniform on [0,1].
/// In normalized mode every child slice is rescaled to sum to one.
[[nodiscard]] Tensor random_cpt_like(const Dims& dims, std::uint64_t seed,
                                     ControlMode mode = ControlMode::normalized);

/// Drops parent modes of dimension 1. The child mode and at least one parent
/// mode are always kept so the result stays of order >= 2; a parentless
/// table gets a leading unit mode.
struct SqueezedTensor {
    Tensor tensor;
    std::vector<std::size_t> dropped_modes;
};
[[nodiscard]] SqueezedTensor squeeze_singleton_parents(const Tensor& t);

/// Mixes a base seed with a salt (splitmix64 finalizer).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace cptrank
