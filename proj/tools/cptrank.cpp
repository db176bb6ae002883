// cptrank: effective CP rank of Bayesian network CPTs.
//
//   cptrank corpus    --net a.net b.net --controls --out report.csv --curve curve.csv [--json report.json]
//   cptrank profile   --net hailfinder.net --node Boundaries --control --out profile.csv
//   cptrank decompose --net hailfinder.net --node Boundaries --rank 3 --dump model.json
//
// Exit codes: 0 success, 1 usage error, 2 parse/validation failure, 3 solver abort.

#include "cptrank/corpus.hpp"
#include "cptrank/error.hpp"
#include "cptrank/json_io.hpp"
#include "cptrank/network.hpp"
#include "cptrank/report.hpp"
#include "cptrank/solver.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace cptrank;

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct CommonFlags {
    double epsilon = 1e-3;
    std::size_t r_max = 20;
    int restarts = 10;
    bool nvec = true;
    int max_iters = 200;
    std::optional<std::uint64_t> seed;
    bool warm_start = false;
};

void add_solver_flags(CLI::App* cmd, CommonFlags& f, bool with_rank_sweep) {
    cmd->add_option("--restarts", f.restarts, "Random starting points per rank")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--nvec,!--no-nvec", f.nvec, "Add the singular-vector start (default on)");
    cmd->add_option("--max-iters", f.max_iters, "LM iteration cap per start")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Base seed (falls back to $CPTRANK_SEED, then 42)");
    if (with_rank_sweep) {
        cmd->add_option("--epsilon", f.epsilon, "Max-error threshold")->check(CLI::PositiveNumber);
        cmd->add_option("--rmax", f.r_max, "Largest rank tried")->check(CLI::PositiveNumber);
        cmd->add_flag("--warm-start", f.warm_start, "Seed rank r+1 with the rank-r solution");
    }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("CPTRANK_SEED"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw CLI::ValidationError("CPTRANK_SEED", "not an unsigned integer: " + std::string(env));
    }
    return 42;
}

AnalysisConfig analysis_config(const CommonFlags& f) {
    AnalysisConfig cfg;
    cfg.epsilon = f.epsilon;
    cfg.r_max = f.r_max;
    cfg.warm_start = f.warm_start;
    cfg.solver.n_random_starts = f.restarts;
    cfg.solver.use_nvec_start = f.nvec;
    cfg.solver.max_iters = f.max_iters;
    cfg.solver.seed = resolve_seed(f.seed);
    if (cfg.solver.n_random_starts == 0 && !cfg.solver.use_nvec_start) {
        throw CLI::ValidationError("--restarts", "need at least one start: use --restarts > 0 or --nvec");
    }
    return cfg;
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

int run_corpus_command(const std::vector<std::string>& nets, const CommonFlags& flags, const CorpusOptions& options,
                       const std::string& out_csv, const std::string& curve_csv, const std::string& json_path) {
    const AnalysisConfig cfg = analysis_config(flags);
    std::vector<std::filesystem::path> paths(nets.begin(), nets.end());
    const CorpusReport report = run_corpus(paths, cfg, options);

    emit_report(report, ReportFormat::csv, out_csv);
    {
        std::ofstream curve = open_output(curve_csv);
        write_curve_csv(report, curve);
    }
    if (!json_path.empty()) emit_report(report, ReportFormat::json, json_path);

    std::size_t low = 0;
    for (const auto& r : report.records) low += (r.minimal_rank && *r.minimal_rank <= 2) ? 1 : 0;
    log_line("analysed " + std::to_string(report.records.size()) + " CPTs from " + std::to_string(paths.size()) +
             " file(s); " + std::to_string(low) + " have minimal rank <= 2 at epsilon " + format_double(cfg.epsilon));
    for (const auto& w : report.warnings) log_line("warning: " + w);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective CP tensor rank of Bayesian network conditional probability tables"};
    app.require_subcommand(1);

    // corpus
    CommonFlags corpus_flags;
    CorpusOptions corpus_opts;
    std::vector<std::string> corpus_nets;
    std::string corpus_out, corpus_curve, corpus_json, control_mode = "normalized";
    auto* corpus = app.add_subcommand("corpus", "Minimal ranks of every selected CPT in a set of networks");
    corpus->add_option("--net", corpus_nets, "Network files (.net or .json)")->required()->expected(1, -1);
    corpus->add_option("--min-parents", corpus_opts.min_parents, "Only CPTs with at least this many parents");
    add_solver_flags(corpus, corpus_flags, true);
    corpus->add_flag("--controls", corpus_opts.with_controls, "Also analyse a random table per CPT");
    corpus->add_option("--control-mode", control_mode, "normalized or raw")
        ->check(CLI::IsMember({"normalized", "raw"}));
    corpus->add_option("--jobs", corpus_opts.jobs, "Worker threads (default: hardware threads)");
    corpus->add_flag("--strict", corpus_opts.strict, "Fail on the first unreadable or invalid file");
    corpus->add_option("--out", corpus_out, "Per-rank CSV report")->required();
    corpus->add_option("--curve", corpus_curve, "Percentage-vs-rank CSV")->required();
    corpus->add_option("--json", corpus_json, "Full report as JSON");

    // profile
    CommonFlags profile_flags;
    std::string profile_net, profile_node, profile_out;
    std::size_t profile_min_parents = 3;
    bool profile_control = false, profile_strict = false;
    auto* profile = app.add_subcommand("profile", "Max error versus rank for one CPT");
    profile->add_option("--net", profile_net, "Network file")->required();
    profile->add_option("--node", profile_node, "Child node of the CPT")->required();
    profile->add_option("--min-parents", profile_min_parents, "Refuse nodes with fewer parents");
    add_solver_flags(profile, profile_flags, true);
    profile->add_flag("--control", profile_control, "Add a matched random control");
    profile->add_option("--control-mode", control_mode, "normalized or raw")
        ->check(CLI::IsMember({"normalized", "raw"}));
    profile->add_flag("--strict", profile_strict, "Reject CPTs that do not sum to one");
    profile->add_option("--out", profile_out, "Output CSV ('-' for stdout)")->required();

    // decompose
    CommonFlags dec_flags;
    std::string dec_net, dec_node, dec_dump;
    std::size_t dec_rank = 1;
    auto* decompose = app.add_subcommand("decompose", "Fit one CPT at a fixed rank and dump the model");
    decompose->add_option("--net", dec_net, "Network file")->required();
    decompose->add_option("--node", dec_node, "Child node of the CPT")->required();
    decompose->add_option("--rank", dec_rank, "CP rank")->required()->check(CLI::PositiveNumber);
    add_solver_flags(decompose, dec_flags, false);
    decompose->add_option("--dump", dec_dump, "Write the fitted model as JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (corpus->parsed()) {
            corpus_opts.control_mode = control_mode_from_string(control_mode);
            corpus_opts.log = log_line;
            return run_corpus_command(corpus_nets, corpus_flags, corpus_opts, corpus_out, corpus_curve, corpus_json);
        }

        ParseOptions parse;
        parse.strict_normalization = false;
        parse.on_warning = [](const std::string& w) { log_line("warning: " + w); };

        if (profile->parsed()) {
            if (profile_strict) parse.strict_normalization = true;
            const AnalysisConfig cfg = analysis_config(profile_flags);
            const ProfileRun run = profile_single(profile_net, profile_node, cfg, profile_min_parents, profile_control,
                                                  control_mode_from_string(control_mode), parse);
            log_line(run.network + "/" + run.node + ": dims " + format_dims(run.dims));
            if (profile_out == "-") {
                write_profile_csv(run, std::cout);
            } else {
                std::ofstream out = open_output(profile_out);
                write_profile_csv(run, out);
            }
            const auto r = minimal_rank(run.profile, cfg.epsilon);
            log_line("minimal rank at epsilon " + format_double(cfg.epsilon) + ": " +
                     (r ? std::to_string(*r) : ">" + std::to_string(cfg.r_max)));
            return 0;
        }

        if (decompose->parsed()) {
            const AnalysisConfig cfg = analysis_config(dec_flags);
            const Network net = load_network(dec_net, parse);
            const NodeSpec* node = net.find(dec_node);
            if (node == nullptr) throw NodeLookupError("no node named '" + dec_node + "' in " + net.name());
            const Tensor cpt = cpt_to_tensor(*node, net);
            const FitResult fit = multi_start_decompose(cpt, dec_rank, cfg.solver);
            Json doc = model_to_json(fit.model.normalized());
            {
                std::ofstream out = open_output(dec_dump);
                out << doc.dump(2) << '\n';
            }
            std::cout << "network=" << net.name() << " node=" << dec_node << " dims=" << format_dims(cpt.dims())
                      << " rank=" << dec_rank << " max_error=" << format_double(fit.max_error)
                      << " frob_error=" << format_double(fit.frob_error) << " start=" << to_string(fit.start)
                      << '\n';
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NodeLookupError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitInput;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const StructuralError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInput;
    } catch (const SolverError& e) {
        std::cerr << "solver abort: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
