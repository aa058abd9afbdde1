#pragma once

#include "vlt/ids.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vlt {

/// Path ('/'-separated, no leading '/') to blob.
using TreeSnapshot = std::map<std::string, BlobId>;

struct Commit {
    CommitId id;
    std::vector<CommitId> parents;
    TreeSnapshot tree;
    std::int64_t timestamp = 0;
    std::string message;

    friend bool operator==(const Commit&, const Commit&) = default;
};

struct Project {
    std::string name;
    CommitId head;

    friend bool operator==(const Project&, const Project&) = default;
};

/// A collection of projects sharing one commit and blob namespace. Commits
/// may be referenced by several projects (forks). Blob content is optional:
/// hand-written corpora may name blobs by opaque tokens.
struct Corpus {
    std::map<std::string, Project> projects;
    std::map<CommitId, Commit> commits;
    std::map<BlobId, std::optional<std::string>> blobs;

    const Commit* find_commit(const CommitId& id) const;
    const Commit& commit(const CommitId& id) const;

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Lowercase hex SHA-256 of the raw bytes.
BlobId blob_digest(std::span<const std::byte> content);
BlobId blob_digest(std::string_view content);

enum class Severity { Warning, Error };

struct Violation {
    Severity severity = Severity::Error;
    std::string message;
};

enum class BlobCheck {
    /// A tree entry naming a blob with no blob record is an error.
    Strict,
    /// Missing blob records are tolerated (warning only).
    Lenient,
};

/// Checks every corpus invariant. Violations are data, never thrown.
std::vector<Violation> validate_corpus(const Corpus& corpus,
                                       BlobCheck blobs = BlobCheck::Strict);

bool has_errors(const std::vector<Violation>& violations);

/// Commits reachable from any project head, in no particular order.
std::vector<CommitId> reachable_commits(const Corpus& corpus);

/// Commits reachable from one head (inclusive).
std::vector<CommitId> reachable_from(const Corpus& corpus, const CommitId& head);

struct IngestOptions {
    BlobCheck blobs = BlobCheck::Strict;
};

/// Parses a VLC-JSONL v1 record stream. Record order does not matter; all
/// cross references are resolved after the whole stream is read.
Corpus ingest_corpus(std::istream& in, const IngestOptions& options = {});
Corpus ingest_corpus_file(const std::string& path, const IngestOptions& options = {});

/// Writes the corpus as VLC-JSONL v1: blobs, then commits, then projects,
/// each sorted by key.
void serialize_corpus(const Corpus& corpus, std::ostream& out);

/// Union of two corpora. Shared ids must carry identical records.
void merge_into(Corpus& target, const Corpus& source);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

} // namespace vlt
