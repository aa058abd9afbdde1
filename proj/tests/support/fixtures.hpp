#pragma once

#include "vlt/corpus.hpp"

#include <filesystem>
#include <string>

namespace vlt::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(VLT_FIXTURE_DIR) / name;
}

inline Corpus load_fixture(const std::string& name) {
    return ingest_corpus_file(fixture_path(name + ".jsonl").string());
}

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

} // namespace vlt::testing
