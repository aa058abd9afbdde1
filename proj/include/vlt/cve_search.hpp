#pragma once

#include "vlt/corpus.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vlt {

struct CveHit {
    std::string project;
    CommitId commit;
    /// Uppercased, deduplicated, in order of first appearance.
    std::vector<std::string> cve_ids;
    /// At most 120 bytes of the message around the first match.
    std::string excerpt;

    friend bool operator==(const CveHit&, const CveHit&) = default;
};

inline constexpr const char* kCvePattern = R"(CVE-\d{4}-\d{4,})";
inline constexpr std::size_t kExcerptLength = 120;

/// One hit per (project, reachable commit) whose message matches `pattern`
/// (ECMAScript syntax, case-insensitive). Defaults to the CVE identifier
/// pattern. Sorted by (project, commit).
std::vector<CveHit> scan_commit_messages(const Corpus& corpus,
                                         const std::optional<std::string>& pattern = std::nullopt,
                                         int jobs = 0);

/// One JSON object per line: {project, commit, cve_ids, excerpt}.
std::string hits_to_jsonl(const std::vector<CveHit>& hits);

} // namespace vlt
