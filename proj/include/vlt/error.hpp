#pragma once

#include <stdexcept>
#include <string>

namespace vlt {

enum class ErrorCode {
    MalformedRecord,
    DuplicateId,
    DigestMismatch,
    DanglingReference,
    InvalidCorpus,
    UnknownCommit,
    UnknownProject,
    RootFixCommit,
    EmptySeeds,
    InvalidCveId,
    InvalidPattern,
    WrongMagic,
    VersionMismatch,
    Truncated,
    CorruptIndex,
    GitObjectStore,
    GitDefaultBranch,
    GitCorruptObject,
    UnknownFormat,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure the library reports on bad input data. Internal faults
/// surface as other std::exception types.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace vlt
