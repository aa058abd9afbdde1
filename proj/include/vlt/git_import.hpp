#pragma once

#include "vlt/corpus.hpp"

#include <filesystem>
#include <string>

namespace vlt {

struct GitImportOptions {
    /// Keep blob bytes in the corpus. Ids are SHA-256 of content either way.
    bool keep_content = true;
};

/// Reads a Git object database (working tree with .git/, or bare) and adds
/// the history reachable from its default branch to `corpus` as project
/// `name`. Commit ids keep Git's SHA-1 hex; blob ids are recomputed as
/// SHA-256 of the content so they agree with corpus-format ingestion.
///
/// Without a HEAD file, the head is the newest childless commit in the
/// object store, ties broken by the smallest id.
Project import_repository(Corpus& corpus, const std::filesystem::path& path, const std::string& name,
                          const GitImportOptions& options = {});

} // namespace vlt
