#pragma once

#include "vlt/corpus.hpp"
#include "vlt/index.hpp"
#include "vlt/lineage.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vlt {

enum class Status { Vulnerable, Safe, Unknown };
enum class BlobSet { Vulnerable, Fixed };

const char* to_string(Status s) noexcept;
const char* to_string(BlobSet s) noexcept;
std::optional<Status> parse_status(std::string_view text);
std::optional<BlobSet> parse_blob_set(std::string_view text);

/// A head-tree entry whose blob belongs to one of the lineage sets.
struct Evidence {
    std::string path;
    BlobId blob;
    BlobSet set = BlobSet::Vulnerable;

    friend auto operator<=>(const Evidence&, const Evidence&) = default;
    friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct ProjectStatus {
    std::string project;
    Status status = Status::Unknown;
    std::vector<Evidence> evidence;
    /// Vulnerable blobs present anywhere in the project's reachable history.
    std::set<BlobId> ever_contained;

    friend bool operator==(const ProjectStatus&, const ProjectStatus&) = default;
};

/// One row shaped like the published summary table.
struct SummaryRow {
    std::string project_with_cve;
    std::string cve;
    std::uint64_t vulnerable_blobs = 0;
    std::uint64_t vulnerable_projects = 0;
    std::uint64_t safe_projects = 0;
    std::uint64_t unknown_projects = 0;

    friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct TraceReport {
    FixSpec fix;
    LineageSets lineage;
    /// Sorted by (status, project).
    std::vector<ProjectStatus> statuses;
    SummaryRow summary;
    /// Projects that only ever held fixed blobs; filled on request.
    std::optional<std::vector<std::string>> fixed_only_adopters;

    friend bool operator==(const TraceReport&, const TraceReport&) = default;
};

struct TraceOptions {
    /// Name for the summary row; defaults to the alphabetically first
    /// project whose history contains the fix commit.
    std::optional<std::string> upstream;
    bool include_fixed_only = false;
    /// Worker threads for classification; <= 0 uses the OpenMP default.
    int jobs = 0;
};

/// Projects whose reachable history contains at least one vulnerable blob.
std::set<std::string> candidate_projects(const IndexBundle& index, const LineageSets& lineage);

/// Head-state rule, checked in order: any vulnerable blob in the head tree
/// makes the project Vulnerable; otherwise any fixed blob makes it Safe;
/// otherwise Unknown.
ProjectStatus classify_project(const IndexBundle& index, const Corpus& corpus, const LineageSets& lineage,
                               const std::string& project);

TraceReport classify_all(const IndexBundle& index, const Corpus& corpus, const FixSpec& fix,
                         const TraceOptions& options = {});

} // namespace vlt
