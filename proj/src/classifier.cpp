#include "vlt/classifier.hpp"

#include "vlt/error.hpp"
#include "vlt/report.hpp"

#include <omp.h>

#include <algorithm>
#include <map>

namespace vlt {

const char* to_string(Status s) noexcept {
    switch (s) {
    case Status::Vulnerable: return "Vulnerable";
    case Status::Safe: return "Safe";
    case Status::Unknown: return "Unknown";
    }
    return "Unknown";
}

const char* to_string(BlobSet s) noexcept {
    return s == BlobSet::Vulnerable ? "vulnerable" : "fixed";
}

std::optional<Status> parse_status(std::string_view text) {
    if (text == "Vulnerable") return Status::Vulnerable;
    if (text == "Safe") return Status::Safe;
    if (text == "Unknown") return Status::Unknown;
    return std::nullopt;
}

std::optional<BlobSet> parse_blob_set(std::string_view text) {
    if (text == "vulnerable") return BlobSet::Vulnerable;
    if (text == "fixed") return BlobSet::Fixed;
    return std::nullopt;
}

namespace {

// project -> blobs from `blobs` found anywhere in its history
std::map<std::string, std::set<BlobId>> holders(const IndexBundle& index, const std::set<BlobId>& blobs) {
    std::map<std::string, std::set<BlobId>> out;
    for (const auto& b : blobs) {
        for (const auto& c : commits_of_blob(index, b)) {
            for (const auto& p : projects_of_commit(index, c)) out[p].insert(b);
        }
    }
    return out;
}

ProjectStatus classify_head(const Corpus& corpus, const LineageSets& lineage, const std::string& project,
                            const CommitId& head, std::set<BlobId> ever_contained) {
    ProjectStatus st;
    st.project = project;
    st.ever_contained = std::move(ever_contained);
    bool vulnerable = false, fixed = false;
    for (const auto& [path, blob] : corpus.commit(head).tree) {
        if (lineage.vulnerable.contains(blob)) {
            st.evidence.push_back({path, blob, BlobSet::Vulnerable});
            vulnerable = true;
        } else if (lineage.fixed.contains(blob)) {
            st.evidence.push_back({path, blob, BlobSet::Fixed});
            fixed = true;
        }
    }
    st.status = vulnerable ? Status::Vulnerable : fixed ? Status::Safe : Status::Unknown;
    return st;
}

} // namespace

std::set<std::string> candidate_projects(const IndexBundle& index, const LineageSets& lineage) {
    std::set<std::string> out;
    for (auto& [name, blobs] : holders(index, lineage.vulnerable)) out.insert(name);
    return out;
}

ProjectStatus classify_project(const IndexBundle& index, const Corpus& corpus, const LineageSets& lineage,
                               const std::string& project) {
    const CommitId& head = head_of_project(index, project);
    std::set<BlobId> ever;
    for (const auto& b : lineage.vulnerable) {
        for (const auto& c : commits_of_blob(index, b)) {
            if (projects_of_commit(index, c).contains(project)) {
                ever.insert(b);
                break;
            }
        }
    }
    return classify_head(corpus, lineage, project, head, std::move(ever));
}

TraceReport classify_all(const IndexBundle& index, const Corpus& corpus, const FixSpec& fix,
                         const TraceOptions& options) {
    TraceReport report;
    report.fix = fix;
    report.lineage = compute_lineage(index, corpus, fix);

    auto history = holders(index, report.lineage.vulnerable);
    std::vector<std::pair<std::string, std::set<BlobId>>> candidates(history.begin(), history.end());
    for (const auto& [name, blobs] : candidates) head_of_project(index, name);

    report.statuses.resize(candidates.size());
    const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto& [name, ever] = candidates[static_cast<std::size_t>(i)];
        report.statuses[static_cast<std::size_t>(i)] =
            classify_head(corpus, report.lineage, name, index.p2h.at(name), ever);
    }
    std::stable_sort(report.statuses.begin(), report.statuses.end(),
                     [](const ProjectStatus& a, const ProjectStatus& b) {
                         return std::tie(a.status, a.project) < std::tie(b.status, b.project);
                     });

    if (options.include_fixed_only) {
        std::vector<std::string> adopters;
        for (const auto& [name, blobs] : holders(index, report.lineage.fixed)) {
            if (!history.contains(name)) adopters.push_back(name);
        }
        report.fixed_only_adopters = std::move(adopters);
    }

    std::string upstream = "UNKNOWN";
    if (options.upstream) {
        upstream = *options.upstream;
    } else if (const auto& owners = projects_of_commit(index, fix.fix_commit); !owners.empty()) {
        upstream = *owners.begin();
    }
    report.summary = summarize(report, upstream);
    return report;
}

} // namespace vlt
