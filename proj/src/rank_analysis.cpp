#include "cptrank/rank_analysis.hpp"

#include "cptrank/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cptrank {

void AnalysisConfig::validate() const {
    if (!(epsilon > 0.0)) throw StructuralError("epsilon must be > 0");
    if (r_max < 1) throw StructuralError("r_max must be >= 1");
    solver.validate();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RankProfile rank_profile(const Tensor& target, const AnalysisConfig& cfg, ProfileSource source,
                         bool stop_below_epsilon) {
    cfg.validate();
    if (target.order() < 2) throw StructuralError("rank profile needs a tensor of order >= 2");

    RankProfile profile;
    profile.dims = target.dims();
    profile.source = std::move(source);

    std::optional<CPModel> previous;
    for (std::size_t r = 1; r <= cfg.r_max; ++r) {
        SolverConfig solver = cfg.solver;
        solver.seed = derive_seed(cfg.solver.seed, r);
        RankEntry entry;
        entry.rank = r;
        try {
            std::optional<CPModel> warm;
            if (cfg.warm_start && previous) warm = previous;
            FitResult fit = multi_start_decompose(target, r, solver, warm);
            entry.max_error = fit.max_error;
            entry.frob_error = fit.frob_error;
            entry.iterations = fit.iterations;
            entry.converged = fit.converged;
            entry.start = fit.start;
            previous = std::move(fit.model);
        } catch (const SolverError& e) {
            entry.failed = true;
            entry.max_error = std::numeric_limits<double>::infinity();
            entry.frob_error = std::numeric_limits<double>::infinity();
            profile.diagnostics.push_back("rank " + std::to_string(r) + ": " + e.what());
            previous.reset();
        }
        if (!profile.entries.empty() && !entry.failed) {
            const RankEntry& prev = profile.entries.back();
            if (!prev.failed && entry.max_error > prev.max_error + 1e-9) {
                std::ostringstream msg;
                msg.precision(6);
                msg << "rank " << r << ": max error " << entry.max_error << " exceeds rank " << r - 1 << " value "
                    << prev.max_error;
                profile.diagnostics.push_back(msg.str());
            }
        }
        profile.entries.push_back(entry);
        if (stop_below_epsilon && entry.max_error < cfg.epsilon) break;
    }
    return profile;
}

std::optional<std::size_t> minimal_rank(const RankProfile& profile, double epsilon) {
    for (const RankEntry& e : profile.entries) {
        if (e.max_error < epsilon) return e.rank;
    }
    return std::nullopt;
}

std::optional<std::size_t> minimal_rank(const Tensor& target, const AnalysisConfig& cfg) {
    return minimal_rank(rank_profile(target, cfg, {}, true), cfg.epsilon);
}

std::size_t general_param_count(const Dims& dims) {
    if (dims.empty()) throw StructuralError("general_param_count needs at least the child dimension");
    const Dims parents(dims.begin(), dims.end() - 1);
    return (dims.back() - 1) * element_count(parents);
}

std::size_t cp_param_count(std::size_t k, std::size_t r) {
    if (k < 1 || r < 1) throw StructuralError("cp_param_count needs k >= 1 and r >= 1");
    return k * (r - 1) + r;
}

std::size_t cp_param_count_general(const Dims& dims, std::size_t r) {
    if (dims.empty() || r < 1) throw StructuralError("cp_param_count_general needs dims and r >= 1");
    std::size_t free_per_term = 0;
    for (std::size_t n : dims) {
        if (n < 2) throw StructuralError("cp_param_count_general needs every dimension >= 2");
        free_per_term += n - 1;
    }
    return free_per_term * (r - 1) + r;
}

std::string to_string(ControlMode mode) { return mode == ControlMode::normalized ? "normalized" : "raw"; }

ControlMode control_mode_from_string(const std::string& s) {
    if (s == "normalized") return ControlMode::normalized;
    if (s == "raw") return ControlMode::raw;
    throw StructuralError("unknown control mode '" + s + "' (expected normalized or raw)");
}

Tensor random_cpt_like(const Dims& dims, std::uint64_t seed, ControlMode mode) {
    std::vector<double> data(element_count(dims));
    Rng rng(seed);
    for (double& x : data) x = rng.uniform();
    Tensor t = Tensor::from_flat(dims, std::move(data));
    if (mode == ControlMode::raw) return t;

    std::vector<double> norm(t.data().begin(), t.data().end());
    const std::size_t card = dims.back();
    for (std::size_t c = 0; c < norm.size(); c += card) {
        double sum = 0.0;
        for (std::size_t s = 0; s < card; ++s) sum += norm[c + s];
        for (std::size_t s = 0; s < card; ++s) norm[c + s] = sum > 0.0 ? norm[c + s] / sum : 1.0 / card;
    }
    return Tensor::from_flat(dims, std::move(norm));
}

SqueezedTensor squeeze_singleton_parents(const Tensor& t) {
    SqueezedTensor out;
    Dims kept;
    const std::size_t k = t.order();
    for (std::size_t j = 0; j + 1 < k; ++j) {
        if (t.dims()[j] == 1) {
            out.dropped_modes.push_back(j);
        } else {
            kept.push_back(t.dims()[j]);
        }
    }
    if (kept.empty()) {
        if (!out.dropped_modes.empty()) out.dropped_modes.erase(out.dropped_modes.begin());
        kept.push_back(1);
    }
    kept.push_back(t.dims().back());
    // Dropping size-1 modes leaves the row-major data order unchanged.
    out.tensor = Tensor::from_flat(std::move(kept), std::vector<double>(t.data().begin(), t.data().end()));
    return out;
}

}  // namespace cptrank
