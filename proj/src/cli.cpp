#include "vlt/cli.hpp"

#include "vlt/classifier.hpp"
#include "vlt/corpus.hpp"
#include "vlt/cve_search.hpp"
#include "vlt/error.hpp"
#include "vlt/git_import.hpp"
#include "vlt/index.hpp"
#include "vlt/io.hpp"
#include "vlt/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <sstream>

namespace vlt::cli {

namespace {

struct Config {
    int jobs = 0;
    int verbosity = 0;

    // ingest
    std::vector<std::string> corpus_inputs;
    std::vector<std::string> git_dirs;
    std::vector<std::string> git_names;
    bool lenient_blobs = false;

    // shared
    std::string corpus;
    std::string index;
    std::string out;

    // scan-cve
    std::optional<std::string> pattern;

    // trace
    std::string fix_commit;
    std::vector<std::string> paths;
    std::optional<std::string> cve;
    std::optional<std::string> upstream;
    bool fixed_only = false;

    // report
    std::string in;
    std::string format;
    std::string lists;
};

class Log {
public:
    Log(std::ostream& err, int verbosity) : err_(err), verbosity_(verbosity) {}
    void info(const std::string& msg) const {
        if (verbosity_ > 0) err_ << "vlt: " << msg << '\n';
    }

private:
    std::ostream& err_;
    int verbosity_;
};

int effective_jobs(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("VLT_JOBS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return 0;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::fixed << s << "s";
    return ss.str();
}

Corpus load_corpus(const std::string& path, bool lenient = false) {
    return ingest_corpus_file(path, {lenient ? BlobCheck::Lenient : BlobCheck::Strict});
}

int do_ingest(const Config& cfg, const Log& log) {
    if (cfg.git_dirs.size() != cfg.git_names.size()) {
        throw CLI::ValidationError("--git", "each --git DIR needs a matching --name N");
    }
    if (cfg.corpus_inputs.empty() && cfg.git_dirs.empty()) {
        throw CLI::ValidationError("ingest", "give at least one --corpus or --git input");
    }
    Corpus corpus;
    for (const auto& f : cfg.corpus_inputs) {
        merge_into(corpus, load_corpus(f, cfg.lenient_blobs));
        log.info("read corpus " + f);
    }
    for (std::size_t i = 0; i < cfg.git_dirs.size(); ++i) {
        auto p = import_repository(corpus, cfg.git_dirs[i], cfg.git_names[i]);
        log.info("imported " + cfg.git_dirs[i] + " as " + p.name + " (head " + p.head.str() + ")");
    }
    auto violations = validate_corpus(corpus, cfg.lenient_blobs ? BlobCheck::Lenient : BlobCheck::Strict);
    if (has_errors(violations)) {
        std::string msg = "merged corpus failed validation:";
        for (const auto& v : violations) {
            if (v.severity == Severity::Error) msg += "\n  " + v.message;
        }
        throw Error(ErrorCode::InvalidCorpus, msg);
    }
    std::ostringstream ss;
    serialize_corpus(corpus, ss);
    write_file_atomic(cfg.out, ss.str());
    log.info("wrote " + std::to_string(corpus.projects.size()) + " projects, " +
             std::to_string(corpus.commits.size()) + " commits to " + cfg.out);
    return kExitOk;
}

int do_index(const Config& cfg, const Log& log) {
    auto t0 = std::chrono::steady_clock::now();
    Corpus corpus = load_corpus(cfg.corpus, true);
    IndexBundle index = build_indexes_parallel(corpus, effective_jobs(cfg.jobs));
    save_index(index, cfg.out);
    log.info("indexed " + std::to_string(index.b2c.size()) + " blobs, " + std::to_string(index.edge_log.size()) +
             " lineage edges in " + fmt_seconds(seconds_since(t0)));
    return kExitOk;
}

void check_index_matches(const IndexBundle& index, const Corpus& corpus) {
    bool same = index.p2h.size() == corpus.projects.size();
    for (const auto& [name, project] : corpus.projects) {
        auto it = index.p2h.find(name);
        same = same && it != index.p2h.end() && it->second == project.head;
    }
    if (!same) throw Error(ErrorCode::CorruptIndex, "index was not built from this corpus (project heads differ)");
}

int do_scan(const Config& cfg, std::ostream& out, const Log& log) {
    Corpus corpus = load_corpus(cfg.corpus, true);
    check_index_matches(load_index(cfg.index), corpus);
    auto hits = scan_commit_messages(corpus, cfg.pattern, effective_jobs(cfg.jobs));
    log.info(std::to_string(hits.size()) + " matching (project, commit) pairs");
    std::string text = hits_to_jsonl(hits);
    if (cfg.out.empty()) {
        out << text;
    } else {
        write_file_atomic(cfg.out, text);
    }
    return kExitOk;
}

int do_trace(const Config& cfg, const Log& log) {
    auto t0 = std::chrono::steady_clock::now();
    Corpus corpus = load_corpus(cfg.corpus, true);
    IndexBundle index = load_index(cfg.index);
    check_index_matches(index, corpus);
    log.info("loaded corpus and index in " + fmt_seconds(seconds_since(t0)));

    FixSpec fix;
    fix.fix_commit = CommitId(cfg.fix_commit);
    if (!cfg.paths.empty()) fix.path_filter = std::set<std::string>(cfg.paths.begin(), cfg.paths.end());
    fix.cve_id = cfg.cve;

    TraceOptions options;
    options.upstream = cfg.upstream;
    options.include_fixed_only = cfg.fixed_only;
    options.jobs = effective_jobs(cfg.jobs);
    TraceReport report = classify_all(index, corpus, fix, options);
    write_file_atomic(cfg.out, render(report, Format::Json));
    const auto& s = report.summary;
    log.info("traced in " + fmt_seconds(seconds_since(t0)) + ": " + std::to_string(s.vulnerable_blobs) +
             " vulnerable blobs, " + std::to_string(s.vulnerable_projects) + " vulnerable / " +
             std::to_string(s.safe_projects) + " safe / " + std::to_string(s.unknown_projects) + " unknown");
    return kExitOk;
}

int do_report(const Config& cfg, std::ostream& out, const Log& log) {
    TraceReport report = report_from_json(read_file(cfg.in));
    std::string text = render(report, parse_format(cfg.format));
    if (cfg.out.empty()) {
        out << text;
    } else {
        write_file_atomic(cfg.out, text);
    }
    if (!cfg.lists.empty()) {
        write_project_lists(report, cfg.lists);
        log.info("wrote project lists to " + cfg.lists);
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Config cfg;
    CLI::App app{"Trace vulnerable file lineage across a corpus of projects", "vlt"};
    app.require_subcommand(1);
    app.add_option("-j,--jobs", cfg.jobs, "Worker threads (default: $VLT_JOBS, else all cores)")
        ->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", cfg.verbosity, "Progress messages on stderr");

    auto* ingest = app.add_subcommand("ingest", "Merge corpus files and Git repositories into one corpus file");
    ingest->add_option("--corpus", cfg.corpus_inputs, "VLC-JSONL corpus file (repeatable)")
        ->check(CLI::ExistingFile);
    ingest->add_option("--git", cfg.git_dirs, "Git repository to import (repeatable)")->check(CLI::ExistingDirectory);
    ingest->add_option("--name", cfg.git_names, "Project name for the matching --git (repeatable)");
    ingest->add_flag("--lenient-blobs", cfg.lenient_blobs, "Allow tree entries naming blobs without records");
    ingest->add_option("--out", cfg.out, "Output corpus file")->required();

    auto* index = app.add_subcommand("index", "Build the lineage and containment index");
    index->add_option("--corpus", cfg.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
    index->add_option("--out", cfg.out, "Output index file")->required();

    auto* scan = app.add_subcommand("scan-cve", "Find commits whose messages mention CVE identifiers");
    scan->add_option("--index", cfg.index, "Index file")->required()->check(CLI::ExistingFile);
    scan->add_option("--corpus", cfg.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
    scan->add_option("--pattern", cfg.pattern, "Case-insensitive regular expression (default: CVE id pattern)");
    scan->add_option("--out", cfg.out, "Output JSONL file (default: stdout)");

    auto* trace = app.add_subcommand("trace", "Classify every project that ever held a vulnerable blob");
    trace->add_option("--index", cfg.index, "Index file")->required()->check(CLI::ExistingFile);
    trace->add_option("--corpus", cfg.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
    trace->add_option("--fix-commit", cfg.fix_commit, "Commit that fixes the vulnerability")->required();
    trace->add_option("--paths", cfg.paths, "Only trace these changed paths")->delimiter(',');
    trace->add_option("--cve", cfg.cve, "CVE identifier label");
    trace->add_option("--upstream", cfg.upstream, "Project name for the summary row");
    trace->add_flag("--fixed-only", cfg.fixed_only, "Also list projects that only ever held fixed blobs");
    trace->add_option("--out", cfg.out, "Output report JSON")->required();

    auto* report = app.add_subcommand("report", "Render a trace report");
    report->add_option("--in", cfg.in, "Report JSON from trace")->required()->check(CLI::ExistingFile);
    report->add_option("--format", cfg.format, "Output format")
        ->required()
        ->check(CLI::IsMember({"table", "csv", "json"}));
    report->add_option("--lists", cfg.lists, "Directory for per-status project lists");
    report->add_option("--out", cfg.out, "Output file (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (cfg.cve && !is_cve_id(*cfg.cve)) {
            throw CLI::ValidationError("--cve", "'" + *cfg.cve + "' is not of the form CVE-YYYY-NNNN");
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "vlt: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    Log log(err, cfg.verbosity);
    try {
        if (ingest->parsed()) return do_ingest(cfg, log);
        if (index->parsed()) return do_index(cfg, log);
        if (scan->parsed()) return do_scan(cfg, out, log);
        if (trace->parsed()) return do_trace(cfg, log);
        if (report->parsed()) return do_report(cfg, out, log);
    } catch (const CLI::ValidationError& e) {
        err << "vlt: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "vlt: " << to_string(e.code()) << ": " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "vlt: internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}

} // namespace vlt::cli
