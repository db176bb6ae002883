#include "cptrank/corpus.hpp"

#include "cptrank/error.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

namespace cptrank {

std::uint64_t control_seed_for(std::uint64_t base, const std::string& network, const std::string& node) {
    // FNV-1a over "network/node".
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    mix(network);
    mix("/");
    mix(node);
    return derive_seed(base, h);
}

std::vector<CurvePoint> percentage_curve(const std::vector<CorpusRecord>& records, std::size_t r_max) {
    std::vector<CurvePoint> curve;
    if (records.empty()) return curve;
    for (std::size_t r = 1; r <= r_max; ++r) {
        const auto hits = std::count_if(records.begin(), records.end(), [r](const CorpusRecord& rec) {
            return rec.minimal_rank && *rec.minimal_rank <= r;
        });
        curve.push_back({r, 100.0 * static_cast<double>(hits) / static_cast<double>(records.size())});
    }
    return curve;
}

namespace {

CorpusRecord make_record(const std::string& network, const std::string& node, const Tensor& cpt, bool control,
                         std::uint64_t seed) {
    CorpusRecord rec;
    rec.network = network;
    rec.node = node;
    rec.dims = cpt.dims();
    rec.control = control;
    rec.control_seed = control ? seed : 0;
    rec.general_params = general_param_count(cpt.dims());
    return rec;
}

void analyse(CorpusRecord& rec, const Tensor& table, const AnalysisConfig& cfg) {
    const SqueezedTensor sq = squeeze_singleton_parents(table);
    rec.analyzed_dims = sq.tensor.dims();
    rec.squeezed_modes = sq.dropped_modes;
    ProfileSource src{rec.control ? SourceKind::random_control : SourceKind::network_cpt, rec.network, rec.node,
                      rec.control_seed};
    RankProfile p = rank_profile(sq.tensor, cfg, std::move(src), true);
    rec.minimal_rank = minimal_rank(p, cfg.epsilon);
    rec.profile = std::move(p.entries);
    rec.diagnostics = std::move(p.diagnostics);
    const bool countable = std::all_of(rec.analyzed_dims.begin(), rec.analyzed_dims.end(),
                                       [](std::size_t n) { return n >= 2; });
    if (rec.minimal_rank && countable) rec.cp_params = cp_param_count_general(rec.analyzed_dims, *rec.minimal_rank);
}

struct Job {
    CorpusRecord* record;
    Tensor table;
};

void run_jobs(std::vector<Job>& jobs, const AnalysisConfig& cfg, std::size_t workers,
              const std::function<void(const std::string&)>& log) {
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                analyse(*jobs[i].record, jobs[i].table, cfg);
            } catch (...) {
                std::lock_guard lock(log_mutex);
                if (!failure) failure = std::current_exception();
                next = jobs.size();
                return;
            }
            const std::size_t finished = ++done;
            if (log) {
                std::lock_guard lock(log_mutex);
                const CorpusRecord& r = *jobs[i].record;
                log("[" + std::to_string(finished) + "/" + std::to_string(jobs.size()) + "] " + r.network + "/" +
                    r.node + (r.control ? " (control)" : "") + " " + format_dims(r.dims) + " minimal rank " +
                    (r.minimal_rank ? std::to_string(*r.minimal_rank) : ">" + std::to_string(cfg.r_max)));
            }
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, jobs.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

CorpusReport run_corpus(const std::vector<std::filesystem::path>& paths, const AnalysisConfig& cfg,
                        const CorpusOptions& options) {
    cfg.validate();
    CorpusReport report;
    report.config = cfg;
    report.min_parents = options.min_parents;
    report.with_controls = options.with_controls;
    report.control_mode = options.control_mode;

    ParseOptions parse;
    parse.strict_normalization = options.strict;
    parse.on_warning = [&](const std::string& w) { report.warnings.push_back(w); };

    struct Selected {
        std::string network;
        std::string node;
        Tensor cpt;
    };
    std::vector<Selected> selected;
    for (const auto& path : paths) {
        try {
            const Network net = load_network(path, parse);
            for (const NodeSpec& node : select_cpts(net, options.min_parents)) {
                selected.push_back({net.name(), node.name, cpt_to_tensor(node, net)});
            }
        } catch (const std::exception& e) {
            if (options.strict) throw;
            report.file_errors.push_back({path.string(), e.what()});
            if (options.log) options.log("error: " + path.string() + ": " + e.what());
        }
    }
    std::stable_sort(selected.begin(), selected.end(), [](const Selected& a, const Selected& b) {
        return std::tie(a.network, a.node) < std::tie(b.network, b.node);
    });
    if (selected.empty()) {
        report.warnings.push_back("no CPT has at least " + std::to_string(options.min_parents) + " parents");
        if (options.log) options.log("warning: " + report.warnings.back());
        return report;
    }

    report.records.reserve(selected.size());
    std::vector<Job> jobs;
    for (const Selected& s : selected) report.records.push_back(make_record(s.network, s.node, s.cpt, false, 0));
    if (options.with_controls) {
        report.controls.reserve(selected.size());
        for (const Selected& s : selected) {
            const std::uint64_t seed = control_seed_for(cfg.solver.seed, s.network, s.node);
            report.controls.push_back(make_record(s.network, s.node, s.cpt, true, seed));
        }
    }
    for (std::size_t i = 0; i < selected.size(); ++i) {
        jobs.push_back({&report.records[i], selected[i].cpt});
        if (options.with_controls) {
            CorpusRecord& c = report.controls[i];
            jobs.push_back({&c, random_cpt_like(c.dims, c.control_seed, options.control_mode)});
        }
    }
    const std::size_t workers = options.jobs != 0 ? options.jobs : std::max(1U, std::thread::hardware_concurrency());
    run_jobs(jobs, cfg, workers, options.log);

    report.curve = percentage_curve(report.records, cfg.r_max);
    if (options.with_controls) report.control_curve = percentage_curve(report.controls, cfg.r_max);
    return report;
}

ProfileRun profile_single(const std::filesystem::path& path, const std::string& node, const AnalysisConfig& cfg,
                          std::size_t min_parents, bool with_control, ControlMode control_mode,
                          const ParseOptions& parse) {
    const Network net = load_network(path, parse);
    const NodeSpec* spec = net.find(node);
    if (spec == nullptr || spec->parents.size() < min_parents) {
        std::string msg = spec == nullptr ? "no node named '" + node + "' in " + net.name()
                                          : "node '" + node + "' has fewer than " + std::to_string(min_parents) +
                                                " parents";
        msg += "; nodes with at least " + std::to_string(min_parents) + " parents:";
        for (const NodeSpec& n : select_cpts(net, min_parents)) msg += " " + n.name;
        throw NodeLookupError(msg);
    }
    const Tensor cpt = cpt_to_tensor(*spec, net);
    ProfileRun run;
    run.network = net.name();
    run.node = node;
    run.dims = cpt.dims();
    const Tensor analysed = squeeze_singleton_parents(cpt).tensor;
    run.profile = rank_profile(analysed, cfg, {SourceKind::network_cpt, net.name(), node});
    if (with_control) {
        const std::uint64_t seed = control_seed_for(cfg.solver.seed, net.name(), node);
        const Tensor control = squeeze_singleton_parents(random_cpt_like(cpt.dims(), seed, control_mode)).tensor;
        run.control = rank_profile(control, cfg, {SourceKind::random_control, net.name(), node, seed});
    }
    return run;
}

}  // namespace cptrank
