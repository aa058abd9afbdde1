#include "vlt/error.hpp"

namespace vlt {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedRecord: return "malformed record";
    case ErrorCode::DuplicateId: return "duplicate id";
    case ErrorCode::DigestMismatch: return "digest mismatch";
    case ErrorCode::DanglingReference: return "dangling reference";
    case ErrorCode::InvalidCorpus: return "invalid corpus";
    case ErrorCode::UnknownCommit: return "unknown commit";
    case ErrorCode::UnknownProject: return "unknown project";
    case ErrorCode::RootFixCommit: return "root fix commit";
    case ErrorCode::EmptySeeds: return "empty seeds";
    case ErrorCode::InvalidCveId: return "invalid CVE id";
    case ErrorCode::InvalidPattern: return "invalid pattern";
    case ErrorCode::WrongMagic: return "wrong magic";
    case ErrorCode::VersionMismatch: return "version mismatch";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::CorruptIndex: return "corrupt index";
    case ErrorCode::GitObjectStore: return "unreadable object store";
    case ErrorCode::GitDefaultBranch: return "unresolvable default branch";
    case ErrorCode::GitCorruptObject: return "corrupt object";
    case ErrorCode::UnknownFormat: return "unknown format";
    case ErrorCode::Io: return "i/o error";
    }
    return "error";
}

} // namespace vlt
