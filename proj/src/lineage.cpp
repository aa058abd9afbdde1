#include "vlt/lineage.hpp"

#include "vlt/error.hpp"

#include <algorithm>
#include <regex>

namespace vlt {

bool is_cve_id(const std::string& text) {
    static const std::regex pattern(R"(CVE-\d{4}-\d{4,})");
    return std::regex_match(text, pattern);
}

std::vector<FixSeed> fix_seeds(const IndexBundle& /*index*/, const Corpus& corpus, const FixSpec& fix) {
    if (fix.cve_id && !is_cve_id(*fix.cve_id)) {
        throw Error(ErrorCode::InvalidCveId, "'" + *fix.cve_id + "' is not a CVE identifier");
    }
    const Commit* commit = corpus.find_commit(fix.fix_commit);
    if (!commit) throw Error(ErrorCode::UnknownCommit, "unknown fix commit '" + fix.fix_commit.str() + "'");
    if (commit->parents.empty()) {
        throw Error(ErrorCode::RootFixCommit,
                    "fix commit '" + fix.fix_commit.str() + "' has no parent to compare against");
    }

    std::vector<FixSeed> seeds;
    for (const auto& e : diff_against_parents(*commit, corpus)) {
        if (fix.path_filter && !fix.path_filter->contains(e.path)) continue;
        FixSeed seed{e.path, e.old_blob, e.new_blob};
        if (std::find(seeds.begin(), seeds.end(), seed) == seeds.end()) seeds.push_back(std::move(seed));
    }
    return seeds;
}

namespace {

std::set<BlobId> closure(const std::map<BlobId, std::set<BlobId>>& edges, const std::set<BlobId>& seeds) {
    std::set<BlobId> seen = seeds;
    std::vector<BlobId> frontier(seeds.begin(), seeds.end());
    while (!frontier.empty()) {
        BlobId b = std::move(frontier.back());
        frontier.pop_back();
        auto it = edges.find(b);
        if (it == edges.end()) continue;
        for (const auto& next : it->second) {
            if (seen.insert(next).second) frontier.push_back(next);
        }
    }
    return seen;
}

} // namespace

std::set<BlobId> ancestor_closure(const IndexBundle& index, const std::set<BlobId>& seeds) {
    return closure(index.b2ob, seeds);
}

std::set<BlobId> descendant_closure(const IndexBundle& index, const std::set<BlobId>& seeds) {
    return closure(index.ob2b, seeds);
}

LineageSets compute_lineage(const IndexBundle& index, const Corpus& corpus, const FixSpec& fix) {
    LineageSets out;
    out.seeds = fix_seeds(index, corpus, fix);
    if (out.seeds.empty()) {
        throw Error(ErrorCode::EmptySeeds, "fix commit '" + fix.fix_commit.str() +
                                               "' changes no tracked file in place under the path filter");
    }
    std::set<BlobId> bad, good;
    for (const auto& s : out.seeds) {
        bad.insert(s.vulnerable_seed);
        good.insert(s.fixed_seed);
    }
    out.vulnerable = ancestor_closure(index, bad);
    out.fixed = descendant_closure(index, good);
    std::set_intersection(out.vulnerable.begin(), out.vulnerable.end(), out.fixed.begin(), out.fixed.end(),
                          std::inserter(out.overlap, out.overlap.end()));
    for (const auto& b : out.overlap) out.fixed.erase(b);
    return out;
}

} // namespace vlt
