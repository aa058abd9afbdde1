#pragma once

#include "vlt/corpus.hpp"
#include "vlt/ids.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace vlt {

/// Within `commit`, the file at `path` changed from `old_blob` (in one
/// parent) to `new_blob`.
struct LineageEdge {
    std::string path;
    BlobId old_blob;
    BlobId new_blob;
    CommitId commit;

    friend auto operator<=>(const LineageEdge&, const LineageEdge&) = default;
    friend bool operator==(const LineageEdge&, const LineageEdge&) = default;
};

/// The five corpus-wide maps the tracer runs on, plus the edges b2ob/ob2b
/// were built from.
struct IndexBundle {
    std::map<BlobId, std::set<BlobId>> b2ob;          // blob -> older blobs
    std::map<BlobId, std::set<BlobId>> ob2b;          // older blob -> blobs
    std::map<BlobId, std::set<CommitId>> b2c;         // blob -> containing commits
    std::map<CommitId, std::set<std::string>> c2p;    // commit -> projects reaching it
    std::map<std::string, CommitId> p2h;              // project -> head
    std::set<LineageEdge> edge_log;

    friend bool operator==(const IndexBundle&, const IndexBundle&) = default;
};

inline constexpr std::uint32_t kIndexFormatVersion = 1;

/// Paths present in both trees with differing blobs, against every parent.
/// Added, deleted, and renamed paths produce no edge.
std::vector<LineageEdge> diff_against_parents(const Commit& commit, const Corpus& corpus);

/// Single-threaded reference build.
IndexBundle build_indexes(const Corpus& corpus);

/// OpenMP build: commits are partitioned across threads for edges and b2c,
/// projects for c2p, and the thread-local partials merged. Equal to
/// build_indexes for every corpus. jobs <= 0 uses the OpenMP default.
IndexBundle build_indexes_parallel(const Corpus& corpus, int jobs = 0);

/// Index of a single project's reachable history.
IndexBundle partial_index(const Corpus& corpus, const Project& project);

/// Set union of every map. Associative and commutative; fails if the two
/// bundles disagree on a project head.
void merge_index(IndexBundle& into, const IndexBundle& from);

const std::set<CommitId>& commits_of_blob(const IndexBundle& index, const BlobId& blob);
const CommitId& head_of_project(const IndexBundle& index, const std::string& project);
const std::set<std::string>& projects_of_commit(const IndexBundle& index, const CommitId& commit);

std::string encode_index(const IndexBundle& index);
IndexBundle decode_index(std::string_view bytes);

void save_index(const IndexBundle& index, const std::filesystem::path& path);
IndexBundle load_index(const std::filesystem::path& path);

} // namespace vlt
