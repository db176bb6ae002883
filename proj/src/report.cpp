#include "cptrank/report.hpp"

#include "cptrank/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace cptrank {

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

namespace {

std::string minimal_rank_text(const CorpusRecord& rec, std::size_t r_max) {
    return rec.minimal_rank ? std::to_string(*rec.minimal_rank) : ">" + std::to_string(r_max);
}

void write_rows(const std::vector<CorpusRecord>& records, std::size_t r_max, std::ostream& out) {
    for (const CorpusRecord& rec : records) {
        for (const RankEntry& e : rec.profile) {
            out << rec.network << ',' << rec.node << ',' << format_dims(rec.dims) << ',' << e.rank << ','
                << format_double(e.max_error) << ',' << format_double(e.frob_error) << ','
                << minimal_rank_text(rec, r_max) << ',' << rec.general_params << ','
                << (rec.cp_params ? std::to_string(*rec.cp_params) : "") << ','
                << (rec.control ? "control" : "cpt") << '\n';
        }
    }
}

// JSON has no infinity; failed ranks store null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
double number_from(const Json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

Json entry_to_json(const RankEntry& e) {
    return Json{{"rank", e.rank},
                {"max_error", number_or_null(e.max_error)},
                {"frob_error", number_or_null(e.frob_error)},
                {"iterations", e.iterations},
                {"converged", e.converged},
                {"start_kind", e.start.kind == StartKind::random ? "random"
                               : e.start.kind == StartKind::nvec ? "nvec"
                                                                 : "warm"},
                {"start_index", e.start.index},
                {"failed", e.failed}};
}

RankEntry entry_from_json(const Json& j) {
    RankEntry e;
    e.rank = j.at("rank").get<std::size_t>();
    e.max_error = number_from(j.at("max_error"));
    e.frob_error = number_from(j.at("frob_error"));
    e.iterations = j.at("iterations").get<int>();
    e.converged = j.at("converged").get<bool>();
    const auto kind = j.at("start_kind").get<std::string>();
    e.start.kind = kind == "random" ? StartKind::random : kind == "nvec" ? StartKind::nvec : StartKind::warm;
    e.start.index = j.at("start_index").get<std::size_t>();
    e.failed = j.at("failed").get<bool>();
    return e;
}

Json record_to_json(const CorpusRecord& r) {
    Json profile = Json::array();
    for (const RankEntry& e : r.profile) profile.push_back(entry_to_json(e));
    return Json{{"network", r.network},
                {"node", r.node},
                {"dims", r.dims},
                {"analyzed_dims", r.analyzed_dims},
                {"squeezed_modes", r.squeezed_modes},
                {"control", r.control},
                {"control_seed", r.control_seed},
                {"minimal_rank", r.minimal_rank ? Json(*r.minimal_rank) : Json(nullptr)},
                {"profile", std::move(profile)},
                {"general_params", r.general_params},
                {"cp_params", r.cp_params ? Json(*r.cp_params) : Json(nullptr)},
                {"diagnostics", r.diagnostics}};
}

CorpusRecord record_from_json(const Json& j) {
    CorpusRecord r;
    r.network = j.at("network").get<std::string>();
    r.node = j.at("node").get<std::string>();
    r.dims = j.at("dims").get<Dims>();
    r.analyzed_dims = j.at("analyzed_dims").get<Dims>();
    r.squeezed_modes = j.at("squeezed_modes").get<std::vector<std::size_t>>();
    r.control = j.at("control").get<bool>();
    r.control_seed = j.at("control_seed").get<std::uint64_t>();
    if (!j.at("minimal_rank").is_null()) r.minimal_rank = j.at("minimal_rank").get<std::size_t>();
    for (const Json& e : j.at("profile")) r.profile.push_back(entry_from_json(e));
    r.general_params = j.at("general_params").get<std::size_t>();
    if (!j.at("cp_params").is_null()) r.cp_params = j.at("cp_params").get<std::size_t>();
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    return r;
}

Json curve_to_json(const std::vector<CurvePoint>& curve) {
    Json out = Json::array();
    for (const CurvePoint& p : curve) out.push_back({{"rank", p.rank}, {"percentage", p.percentage}});
    return out;
}

std::vector<CurvePoint> curve_from_json(const Json& j) {
    std::vector<CurvePoint> out;
    for (const Json& p : j) out.push_back({p.at("rank").get<std::size_t>(), p.at("percentage").get<double>()});
    return out;
}

}  // namespace

void write_report_csv(const CorpusReport& report, std::ostream& out) {
    out << "network,node,dims,rank,max_error,frob_error,minimal_rank,general_params,cp_params,source\n";
    write_rows(report.records, report.config.r_max, out);
    write_rows(report.controls, report.config.r_max, out);
}

void write_curve_csv(const CorpusReport& report, std::ostream& out) {
    out << "rank,percentage,control_percentage\n";
    for (std::size_t i = 0; i < report.curve.size(); ++i) {
        out << report.curve[i].rank << ',' << format_double(report.curve[i].percentage) << ',';
        if (i < report.control_curve.size()) out << format_double(report.control_curve[i].percentage);
        out << '\n';
    }
}

void write_profile_csv(const ProfileRun& run, std::ostream& out) {
    out << "rank,max_error,control_max_error\n";
    for (std::size_t i = 0; i < run.profile.entries.size(); ++i) {
        const RankEntry& e = run.profile.entries[i];
        out << e.rank << ',' << format_double(e.max_error) << ',';
        if (run.control && i < run.control->entries.size()) out << format_double(run.control->entries[i].max_error);
        out << '\n';
    }
}

Json report_to_json(const CorpusReport& report) {
    const AnalysisConfig& c = report.config;
    const SolverConfig& s = c.solver;
    Json records = Json::array();
    for (const CorpusRecord& r : report.records) records.push_back(record_to_json(r));
    Json controls = Json::array();
    for (const CorpusRecord& r : report.controls) controls.push_back(record_to_json(r));
    Json errors = Json::array();
    for (const FileError& e : report.file_errors) errors.push_back({{"path", e.path}, {"message", e.message}});
    return Json{
        {"config",
         {{"epsilon", c.epsilon},
          {"r_max", c.r_max},
          {"warm_start", c.warm_start},
          {"min_parents", report.min_parents},
          {"with_controls", report.with_controls},
          {"control_mode", to_string(report.control_mode)},
          {"solver",
           {{"max_iters", s.max_iters},
            {"rel_fit_tol", s.rel_fit_tol},
            {"abs_fit_tol", s.abs_fit_tol},
            {"lm_damping_init", s.lm_damping_init},
            {"lm_damping_grow", s.lm_damping_grow},
            {"lm_damping_shrink", s.lm_damping_shrink},
            {"n_random_starts", s.n_random_starts},
            {"use_nvec_start", s.use_nvec_start},
            {"seed", s.seed}}}}},
        {"records", std::move(records)},
        {"controls", std::move(controls)},
        {"curve", curve_to_json(report.curve)},
        {"control_curve", curve_to_json(report.control_curve)},
        {"file_errors", std::move(errors)},
        {"warnings", report.warnings}};
}

CorpusReport report_from_json(const Json& j) {
    try {
        CorpusReport r;
        const Json& c = j.at("config");
        r.config.epsilon = c.at("epsilon").get<double>();
        r.config.r_max = c.at("r_max").get<std::size_t>();
        r.config.warm_start = c.at("warm_start").get<bool>();
        r.min_parents = c.at("min_parents").get<std::size_t>();
        r.with_controls = c.at("with_controls").get<bool>();
        r.control_mode = control_mode_from_string(c.at("control_mode").get<std::string>());
        const Json& s = c.at("solver");
        SolverConfig& sc = r.config.solver;
        sc.max_iters = s.at("max_iters").get<int>();
        sc.rel_fit_tol = s.at("rel_fit_tol").get<double>();
        sc.abs_fit_tol = s.at("abs_fit_tol").get<double>();
        sc.lm_damping_init = s.at("lm_damping_init").get<double>();
        sc.lm_damping_grow = s.at("lm_damping_grow").get<double>();
        sc.lm_damping_shrink = s.at("lm_damping_shrink").get<double>();
        sc.n_random_starts = s.at("n_random_starts").get<int>();
        sc.use_nvec_start = s.at("use_nvec_start").get<bool>();
        sc.seed = s.at("seed").get<std::uint64_t>();
        for (const Json& rec : j.at("records")) r.records.push_back(record_from_json(rec));
        for (const Json& rec : j.at("controls")) r.controls.push_back(record_from_json(rec));
        r.curve = curve_from_json(j.at("curve"));
        r.control_curve = curve_from_json(j.at("control_curve"));
        for (const Json& e : j.at("file_errors")) {
            r.file_errors.push_back({e.at("path").get<std::string>(), e.at("message").get<std::string>()});
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const Json::exception& e) {
        throw StructuralError(std::string("malformed report JSON: ") + e.what());
    }
}

void emit_report(const CorpusReport& report, ReportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (format == ReportFormat::csv) {
        write_report_csv(report, out);
    } else {
        out << report_to_json(report).dump(2) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace cptrank
