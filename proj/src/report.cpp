#include "vlt/report.hpp"

#include "vlt/error.hpp"
#include "vlt/io.hpp"

#include <json.hpp>

#include <algorithm>

namespace vlt {

using nlohmann::json;

Format parse_format(std::string_view name) {
    if (name == "table") return Format::Table;
    if (name == "csv") return Format::Csv;
    if (name == "json") return Format::Json;
    throw Error(ErrorCode::UnknownFormat,
                "unknown format '" + std::string(name) + "' (valid formats: table, csv, json)");
}

SummaryRow summarize(const TraceReport& report, const std::string& upstream_name) {
    SummaryRow row;
    row.project_with_cve = upstream_name;
    row.cve = report.fix.cve_id.value_or("UNKNOWN");
    row.vulnerable_blobs = report.lineage.vulnerable.size();
    for (const auto& s : report.statuses) {
        switch (s.status) {
        case Status::Vulnerable: ++row.vulnerable_projects; break;
        case Status::Safe: ++row.safe_projects; break;
        case Status::Unknown: ++row.unknown_projects; break;
        }
    }
    return row;
}

namespace {

std::array<std::string, 6> cells(const SummaryRow& r) {
    return {r.project_with_cve,
            r.cve,
            std::to_string(r.vulnerable_blobs),
            std::to_string(r.vulnerable_projects),
            std::to_string(r.safe_projects),
            std::to_string(r.unknown_projects)};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

template <typename T>
json string_array(const T& items) {
    json arr = json::array();
    for (const auto& i : items) {
        if constexpr (std::is_same_v<std::decay_t<decltype(i)>, std::string>) arr.push_back(i);
        else arr.push_back(i.str());
    }
    return arr;
}

std::set<BlobId> blob_set(const json& arr) {
    std::set<BlobId> out;
    for (const auto& v : arr) out.emplace(v.get<std::string>());
    return out;
}

} // namespace

std::string render_table(std::span<const SummaryRow> rows) {
    std::array<std::size_t, 6> width{};
    for (std::size_t i = 0; i < 6; ++i) width[i] = std::string_view(kSummaryColumns[i]).size();
    std::vector<std::array<std::string, 6>> body;
    for (const auto& r : rows) {
        body.push_back(cells(r));
        for (std::size_t i = 0; i < 6; ++i) width[i] = std::max(width[i], body.back()[i].size());
    }
    auto line = [&](const auto& fields) {
        std::string out;
        for (std::size_t i = 0; i < 6; ++i) {
            std::string f = fields[i];
            if (i + 1 < 6) f.resize(width[i] + 2, ' ');
            out += f;
        }
        return out + '\n';
    };
    std::array<std::string, 6> head;
    for (std::size_t i = 0; i < 6; ++i) head[i] = kSummaryColumns[i];
    std::string out = line(head);
    for (const auto& b : body) out += line(b);
    return out;
}

std::string render_csv(std::span<const SummaryRow> rows) {
    std::string out;
    for (std::size_t i = 0; i < 6; ++i) {
        if (i) out += ',';
        out += csv_field(kSummaryColumns[i]);
    }
    out += "\r\n";
    for (const auto& r : rows) {
        auto c = cells(r);
        for (std::size_t i = 0; i < 6; ++i) {
            if (i) out += ',';
            out += csv_field(c[i]);
        }
        out += "\r\n";
    }
    return out;
}

std::string report_to_json(const TraceReport& report) {
    json fix{{"fix_commit", report.fix.fix_commit.str()},
             {"path_filter", report.fix.path_filter ? string_array(*report.fix.path_filter) : json(nullptr)},
             {"cve_id", report.fix.cve_id ? json(*report.fix.cve_id) : json(nullptr)}};

    json seeds = json::array();
    for (const auto& s : report.lineage.seeds) {
        seeds.push_back({{"path", s.path},
                         {"vulnerable_seed", s.vulnerable_seed.str()},
                         {"fixed_seed", s.fixed_seed.str()}});
    }
    json lineage{{"seeds", seeds},
                 {"vulnerable", string_array(report.lineage.vulnerable)},
                 {"fixed", string_array(report.lineage.fixed)},
                 {"overlap", string_array(report.lineage.overlap)}};

    json statuses = json::array();
    for (const auto& st : report.statuses) {
        json evidence = json::array();
        for (const auto& e : st.evidence) {
            evidence.push_back({{"path", e.path}, {"blob", e.blob.str()}, {"set", to_string(e.set)}});
        }
        statuses.push_back({{"project", st.project},
                            {"status", to_string(st.status)},
                            {"evidence", evidence},
                            {"ever_contained", string_array(st.ever_contained)}});
    }

    const auto& r = report.summary;
    json summary{{"project_with_cve", r.project_with_cve},
                 {"cve", r.cve},
                 {"vulnerable_blobs", r.vulnerable_blobs},
                 {"vulnerable_projects", r.vulnerable_projects},
                 {"safe_projects", r.safe_projects},
                 {"unknown_projects", r.unknown_projects}};

    json doc{{"schema_version", kReportSchemaVersion},
             {"fix", fix},
             {"lineage", lineage},
             {"statuses", statuses},
             {"summary", summary}};
    if (report.fixed_only_adopters) doc["fixed_only_adopters"] = string_array(*report.fixed_only_adopters);
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

TraceReport report_from_json(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::MalformedRecord, "report is not a JSON object");
    }
    try {
        if (doc.at("schema_version").get<std::string>() != kReportSchemaVersion) {
            throw Error(ErrorCode::VersionMismatch, "unsupported report schema_version");
        }
        TraceReport report;
        const json& fix = doc.at("fix");
        report.fix.fix_commit = CommitId(fix.at("fix_commit").get<std::string>());
        if (!fix.at("path_filter").is_null()) {
            report.fix.path_filter = fix.at("path_filter").get<std::set<std::string>>();
        }
        if (!fix.at("cve_id").is_null()) report.fix.cve_id = fix.at("cve_id").get<std::string>();

        const json& lineage = doc.at("lineage");
        for (const auto& s : lineage.at("seeds")) {
            report.lineage.seeds.push_back({s.at("path").get<std::string>(),
                                            BlobId(s.at("vulnerable_seed").get<std::string>()),
                                            BlobId(s.at("fixed_seed").get<std::string>())});
        }
        report.lineage.vulnerable = blob_set(lineage.at("vulnerable"));
        report.lineage.fixed = blob_set(lineage.at("fixed"));
        report.lineage.overlap = blob_set(lineage.at("overlap"));

        for (const auto& s : doc.at("statuses")) {
            ProjectStatus st;
            st.project = s.at("project").get<std::string>();
            auto status = parse_status(s.at("status").get<std::string>());
            if (!status) throw Error(ErrorCode::MalformedRecord, "bad status for project " + st.project);
            st.status = *status;
            for (const auto& e : s.at("evidence")) {
                auto set = parse_blob_set(e.at("set").get<std::string>());
                if (!set) throw Error(ErrorCode::MalformedRecord, "bad evidence set for project " + st.project);
                st.evidence.push_back({e.at("path").get<std::string>(), BlobId(e.at("blob").get<std::string>()), *set});
            }
            st.ever_contained = blob_set(s.at("ever_contained"));
            report.statuses.push_back(std::move(st));
        }

        const json& r = doc.at("summary");
        report.summary = {r.at("project_with_cve").get<std::string>(),
                          r.at("cve").get<std::string>(),
                          r.at("vulnerable_blobs").get<std::uint64_t>(),
                          r.at("vulnerable_projects").get<std::uint64_t>(),
                          r.at("safe_projects").get<std::uint64_t>(),
                          r.at("unknown_projects").get<std::uint64_t>()};
        if (auto it = doc.find("fixed_only_adopters"); it != doc.end()) {
            report.fixed_only_adopters = it->get<std::vector<std::string>>();
        }
        return report;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, std::string("malformed report: ") + e.what());
    }
}

std::string render(const TraceReport& report, Format format) {
    switch (format) {
    case Format::Table: return render_table(std::span(&report.summary, 1));
    case Format::Csv: return render_csv(std::span(&report.summary, 1));
    case Format::Json: return report_to_json(report);
    }
    throw Error(ErrorCode::UnknownFormat, "unknown format");
}

void write_project_lists(const TraceReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string lists[3];
    for (const auto& s : report.statuses) lists[static_cast<int>(s.status)] += s.project + "\n";
    write_file_atomic(dir / "vulnerable.txt", lists[0]);
    write_file_atomic(dir / "safe.txt", lists[1]);
    write_file_atomic(dir / "unknown.txt", lists[2]);
    if (report.fixed_only_adopters) {
        std::string adopters;
        for (const auto& p : *report.fixed_only_adopters) adopters += p + "\n";
        write_file_atomic(dir / "fixed_only.txt", adopters);
    }
}

} // namespace vlt
