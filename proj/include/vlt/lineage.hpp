#pragma once

#include "vlt/corpus.hpp"
#include "vlt/index.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vlt {

struct FixSpec {
    CommitId fix_commit;
    /// Absent means every path the fix changed in place.
    std::optional<std::set<std::string>> path_filter;
    /// Label only, e.g. "CVE-2019-17543".
    std::optional<std::string> cve_id;

    friend bool operator==(const FixSpec&, const FixSpec&) = default;
};

/// One file repaired by the fix: its blob right before and right after.
struct FixSeed {
    std::string path;
    BlobId vulnerable_seed;
    BlobId fixed_seed;

    friend auto operator<=>(const FixSeed&, const FixSeed&) = default;
    friend bool operator==(const FixSeed&, const FixSeed&) = default;
};

/// Blobs presumed vulnerable (every earlier revision of a seed) and fixed
/// (every later revision). `overlap` holds blobs that were in both closures;
/// they are kept in `vulnerable` and removed from `fixed`.
struct LineageSets {
    std::vector<FixSeed> seeds;
    std::set<BlobId> vulnerable;
    std::set<BlobId> fixed;
    std::set<BlobId> overlap;

    friend bool operator==(const LineageSets&, const LineageSets&) = default;
};

/// True for CVE-YYYY-NNNN with four or more trailing digits.
bool is_cve_id(const std::string& text);

std::vector<FixSeed> fix_seeds(const IndexBundle& index, const Corpus& corpus, const FixSpec& fix);

/// Smallest superset of `seeds` closed under b2ob. Cycle safe.
std::set<BlobId> ancestor_closure(const IndexBundle& index, const std::set<BlobId>& seeds);

/// Smallest superset of `seeds` closed under ob2b. Cycle safe.
std::set<BlobId> descendant_closure(const IndexBundle& index, const std::set<BlobId>& seeds);

LineageSets compute_lineage(const IndexBundle& index, const Corpus& corpus, const FixSpec& fix);

} // namespace vlt
