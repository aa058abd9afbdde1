#include "vlt/corpus.hpp"

#include "vlt/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace vlt {

using nlohmann::json;

const Commit* Corpus::find_commit(const CommitId& id) const {
    auto it = commits.find(id);
    return it == commits.end() ? nullptr : &it->second;
}

const Commit& Corpus::commit(const CommitId& id) const {
    if (const Commit* c = find_commit(id)) return *c;
    throw Error(ErrorCode::UnknownCommit, "unknown commit '" + id.str() + "'");
}

BlobId blob_digest(std::span<const std::byte> content) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(content.data(), content.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("EVP_Digest(sha256) failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return BlobId(std::move(out));
}

BlobId blob_digest(std::string_view content) {
    return blob_digest(std::as_bytes(std::span(content.data(), content.size())));
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(bytes.data()),
                            static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw Error(ErrorCode::MalformedRecord, "base64 length is not a multiple of 4");
    }
    std::string out(3 * (text.size() / 4), '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0) throw Error(ErrorCode::MalformedRecord, "invalid base64");
    // EVP_DecodeBlock counts padding as zero bytes.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

namespace {

bool valid_path(const std::string& p) {
    if (p.empty() || p.front() == '/' || p.back() == '/') return false;
    return p.find("//") == std::string::npos;
}

std::vector<CommitId> reachable_impl(const Corpus& corpus, std::vector<CommitId> stack) {
    std::unordered_set<CommitId> seen;
    std::vector<CommitId> out;
    while (!stack.empty()) {
        CommitId id = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(id).second) continue;
        const Commit* c = corpus.find_commit(id);
        if (!c) continue;
        out.push_back(id);
        for (const auto& p : c->parents) {
            if (!seen.contains(p)) stack.push_back(p);
        }
    }
    return out;
}

// Reports one violation per back edge found by an iterative three-colour DFS.
void find_cycles(const Corpus& corpus, std::vector<Violation>& out) {
    enum class Colour { Grey, Black };
    std::unordered_map<CommitId, Colour> colour;
    std::vector<CommitId> heads;
    for (const auto& [name, project] : corpus.projects) heads.push_back(project.head);
    std::sort(heads.begin(), heads.end());

    struct Frame {
        const Commit* commit;
        std::size_t next_parent;
    };
    for (const auto& head : heads) {
        const Commit* root = corpus.find_commit(head);
        if (!root || colour.contains(head)) continue;
        std::vector<Frame> stack{{root, 0}};
        colour[head] = Colour::Grey;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next_parent == f.commit->parents.size()) {
                colour[f.commit->id] = Colour::Black;
                stack.pop_back();
                continue;
            }
            const CommitId& pid = f.commit->parents[f.next_parent++];
            const Commit* parent = corpus.find_commit(pid);
            if (!parent) continue;
            auto it = colour.find(pid);
            if (it == colour.end()) {
                colour[pid] = Colour::Grey;
                stack.push_back({parent, 0});
            } else if (it->second == Colour::Grey) {
                std::string names;
                bool in_cycle = false;
                for (const auto& frame : stack) {
                    if (frame.commit->id == pid) in_cycle = true;
                    if (!in_cycle) continue;
                    if (!names.empty()) names += ", ";
                    names += frame.commit->id.str();
                }
                out.push_back({Severity::Error, "parent cycle among commits: " + names});
            }
        }
    }
}

} // namespace

std::vector<CommitId> reachable_from(const Corpus& corpus, const CommitId& head) {
    return reachable_impl(corpus, {head});
}

std::vector<CommitId> reachable_commits(const Corpus& corpus) {
    std::vector<CommitId> heads;
    for (const auto& [name, project] : corpus.projects) heads.push_back(project.head);
    return reachable_impl(corpus, std::move(heads));
}

std::vector<Violation> validate_corpus(const Corpus& corpus, BlobCheck blobs) {
    std::vector<Violation> out;

    for (const auto& [id, content] : corpus.blobs) {
        if (id.empty()) out.push_back({Severity::Error, "blob with empty id"});
        if (content && blob_digest(*content) != id) {
            out.push_back({Severity::Error, "blob " + id.str() + ": digest mismatch, content hashes to " +
                                                blob_digest(*content).str()});
        }
    }

    for (const auto& [id, commit] : corpus.commits) {
        if (id.empty()) out.push_back({Severity::Error, "commit with empty id"});
        if (commit.id != id) {
            out.push_back({Severity::Error, "commit " + id.str() + ": keyed under a different id"});
        }
        std::unordered_set<CommitId> parents;
        for (const auto& p : commit.parents) {
            if (p == id) out.push_back({Severity::Error, "commit " + id.str() + ": lists itself as parent"});
            if (!parents.insert(p).second) {
                out.push_back({Severity::Error, "commit " + id.str() + ": duplicate parent " + p.str()});
            }
            if (!corpus.commits.contains(p)) {
                out.push_back({Severity::Error, "commit " + id.str() + ": dangling parent " + p.str()});
            }
        }
        for (const auto& [path, blob] : commit.tree) {
            if (!valid_path(path)) {
                out.push_back({Severity::Error, "commit " + id.str() + ": invalid path '" + path + "'"});
            }
            if (!corpus.blobs.contains(blob)) {
                out.push_back({blobs == BlobCheck::Strict ? Severity::Error : Severity::Warning,
                               "commit " + id.str() + ": path " + path + " names absent blob " + blob.str()});
            }
        }
    }

    for (const auto& [name, project] : corpus.projects) {
        if (name.empty()) out.push_back({Severity::Error, "project with empty name"});
        if (project.name != name) {
            out.push_back({Severity::Error, "project " + name + ": keyed under a different name"});
        }
        if (!corpus.commits.contains(project.head)) {
            out.push_back({Severity::Error, "project " + name + ": dangling head " + project.head.str()});
        }
    }

    find_cycles(corpus, out);

    auto reachable = reachable_commits(corpus);
    std::unordered_set<CommitId> members(reachable.begin(), reachable.end());
    for (const auto& [id, commit] : corpus.commits) {
        if (!members.contains(id)) {
            out.push_back({Severity::Warning, "commit " + id.str() + ": orphan, not reachable from any head"});
        }
    }
    return out;
}

bool has_errors(const std::vector<Violation>& violations) {
    return std::any_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.severity == Severity::Error; });
}

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": " + what);
}

const json& require(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) malformed(line, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_string()) malformed(line, std::string("field '") + key + "' must be a string");
    auto s = v.get<std::string>();
    if (s.empty()) malformed(line, std::string("field '") + key + "' must be nonempty");
    return s;
}

void add_blob(Corpus& corpus, const BlobId& id, std::optional<std::string> content, std::size_t line) {
    auto [it, inserted] = corpus.blobs.try_emplace(id, content);
    if (inserted) return;
    if (!it->second) {
        it->second = std::move(content);
    } else if (content && *content != *it->second) {
        throw Error(ErrorCode::DuplicateId,
                    "line " + std::to_string(line) + ": conflicting content for blob " + id.str());
    }
}

Commit parse_commit(const json& rec, std::size_t line) {
    Commit c;
    c.id = CommitId(require_string(rec, "id", line));
    const json& ts = require(rec, "timestamp", line);
    if (!ts.is_number_integer()) malformed(line, "field 'timestamp' must be an integer");
    c.timestamp = ts.get<std::int64_t>();
    if (auto it = rec.find("parents"); it != rec.end()) {
        if (!it->is_array()) malformed(line, "field 'parents' must be an array");
        for (const auto& p : *it) {
            if (!p.is_string() || p.get_ref<const std::string&>().empty()) {
                malformed(line, "parent ids must be nonempty strings");
            }
            c.parents.emplace_back(p.get<std::string>());
        }
    }
    if (auto it = rec.find("message"); it != rec.end()) {
        if (!it->is_string()) malformed(line, "field 'message' must be a string");
        c.message = it->get<std::string>();
    }
    if (auto it = rec.find("tree"); it != rec.end()) {
        if (!it->is_object()) malformed(line, "field 'tree' must be an object");
        for (const auto& [path, blob] : it->items()) {
            if (!blob.is_string() || blob.get_ref<const std::string&>().empty()) {
                malformed(line, "tree entry '" + path + "' must map to a nonempty blob id");
            }
            c.tree.emplace(path, BlobId(blob.get<std::string>()));
        }
    }
    return c;
}

} // namespace

Corpus ingest_corpus(std::istream& in, const IngestOptions& options) {
    Corpus corpus;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;

        json rec = json::parse(text, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) malformed(line, "not a JSON object");
        std::string type = require_string(rec, "type", line);

        if (type == "blob") {
            BlobId id(require_string(rec, "id", line));
            std::optional<std::string> content;
            if (auto it = rec.find("content_b64"); it != rec.end()) {
                if (!it->is_string()) malformed(line, "field 'content_b64' must be a string");
                try {
                    content = base64_decode(it->get_ref<const std::string&>());
                } catch (const Error& e) {
                    malformed(line, e.what());
                }
                BlobId actual = blob_digest(*content);
                if (actual != id) {
                    throw Error(ErrorCode::DigestMismatch, "line " + std::to_string(line) + ": blob " +
                                                               id.str() + " content hashes to " + actual.str());
                }
            }
            add_blob(corpus, id, std::move(content), line);
        } else if (type == "commit") {
            Commit c = parse_commit(rec, line);
            auto [it, inserted] = corpus.commits.try_emplace(c.id, c);
            if (!inserted && it->second != c) {
                throw Error(ErrorCode::DuplicateId, "line " + std::to_string(line) +
                                                        ": conflicting duplicate commit " + c.id.str());
            }
        } else if (type == "project") {
            Project p{require_string(rec, "name", line), CommitId(require_string(rec, "head", line))};
            if (corpus.projects.contains(p.name)) {
                throw Error(ErrorCode::DuplicateId,
                            "line " + std::to_string(line) + ": duplicate project " + p.name);
            }
            corpus.projects.emplace(p.name, std::move(p));
        } else {
            malformed(line, "unknown record type '" + type + "'");
        }
    }

    for (const auto& [id, commit] : corpus.commits) {
        for (const auto& p : commit.parents) {
            if (!corpus.commits.contains(p)) {
                throw Error(ErrorCode::DanglingReference,
                            "commit " + id.str() + " names missing parent " + p.str());
            }
        }
    }
    for (const auto& [name, project] : corpus.projects) {
        if (!corpus.commits.contains(project.head)) {
            throw Error(ErrorCode::DanglingReference,
                        "project " + name + " names missing head " + project.head.str());
        }
    }

    auto violations = validate_corpus(corpus, options.blobs);
    if (has_errors(violations)) {
        std::string msg = "corpus failed validation:";
        for (const auto& v : violations) {
            if (v.severity == Severity::Error) msg += "\n  " + v.message;
        }
        throw Error(ErrorCode::InvalidCorpus, msg);
    }
    return corpus;
}

Corpus ingest_corpus_file(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open corpus file " + path);
    return ingest_corpus(in, options);
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& [id, content] : corpus.blobs) {
        json rec{{"type", "blob"}, {"id", id.str()}};
        if (content) rec["content_b64"] = base64_encode(*content);
        out << rec.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
    for (const auto& [id, commit] : corpus.commits) {
        json parents = json::array();
        for (const auto& p : commit.parents) parents.push_back(p.str());
        json tree = json::object();
        for (const auto& [path, blob] : commit.tree) tree[path] = blob.str();
        json rec{{"type", "commit"},       {"id", id.str()},          {"parents", parents},
                 {"timestamp", commit.timestamp}, {"message", commit.message}, {"tree", tree}};
        out << rec.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
    for (const auto& [name, project] : corpus.projects) {
        json rec{{"type", "project"}, {"name", name}, {"head", project.head.str()}};
        out << rec.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

void merge_into(Corpus& target, const Corpus& source) {
    for (const auto& [id, content] : source.blobs) add_blob(target, id, content, 0);
    for (const auto& [id, commit] : source.commits) {
        auto [it, inserted] = target.commits.try_emplace(id, commit);
        if (!inserted && it->second != commit) {
            throw Error(ErrorCode::DuplicateId, "conflicting duplicate commit " + id.str());
        }
    }
    for (const auto& [name, project] : source.projects) {
        auto [it, inserted] = target.projects.try_emplace(name, project);
        if (!inserted) throw Error(ErrorCode::DuplicateId, "duplicate project " + name);
    }
}

} // namespace vlt
