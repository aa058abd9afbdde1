#include "vlt/git_import.hpp"

#include "vlt/error.hpp"
#include "vlt/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace vlt {

namespace fs = std::filesystem;

namespace {

enum class ObjType { Commit = 1, Tree = 2, Blob = 3, Tag = 4 };

struct GitObject {
    ObjType type;
    std::string data;
};

using RawSha = std::array<unsigned char, 20>;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::GitCorruptObject, what); }

std::string to_hex(const unsigned char* p, std::size_t n = 20) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(hex[p[i] >> 4]);
        out.push_back(hex[p[i] & 0xf]);
    }
    return out;
}

bool is_sha_hex(std::string_view s) {
    return s.size() == 40 && std::all_of(s.begin(), s.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

RawSha from_hex(std::string_view hex) {
    RawSha out{};
    auto nibble = [](char c) { return c <= '9' ? c - '0' : c - 'a' + 10; };
    for (std::size_t i = 0; i < 20; ++i) {
        out[i] = static_cast<unsigned char>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return out;
}

/// Inflates one zlib stream starting at `in`. Returns the output; if
/// `expected` is set, the output must be exactly that long.
std::string inflate_stream(std::string_view in, std::optional<std::size_t> expected, const std::string& what) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw std::runtime_error("inflateInit failed");
    std::unique_ptr<z_stream, int (*)(z_stream*)> guard(&zs, inflateEnd);

    std::string out;
    out.resize(expected ? *expected : std::max<std::size_t>(in.size() * 4, 256));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(std::min<std::size_t>(in.size(), UINT32_MAX));
    std::size_t produced = 0;
    for (;;) {
        if (produced == out.size()) out.resize(out.size() * 2 + 64);
        zs.next_out = reinterpret_cast<Bytef*>(out.data() + produced);
        zs.avail_out = static_cast<uInt>(out.size() - produced);
        int rc = inflate(&zs, Z_NO_FLUSH);
        produced = out.size() - zs.avail_out;
        if (rc == Z_STREAM_END) break;
        if (rc == Z_BUF_ERROR && zs.avail_out != 0) corrupt(what + ": truncated zlib stream");
        if (rc != Z_OK && rc != Z_BUF_ERROR) corrupt(what + ": zlib error");
    }
    out.resize(produced);
    if (expected && produced != *expected) corrupt(what + ": inflated size mismatch");
    return out;
}

std::uint32_t be32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | p[3];
}

std::optional<ObjType> parse_type(std::string_view name) {
    if (name == "commit") return ObjType::Commit;
    if (name == "tree") return ObjType::Tree;
    if (name == "blob") return ObjType::Blob;
    if (name == "tag") return ObjType::Tag;
    return std::nullopt;
}

std::string apply_delta(const std::string& base, const std::string& delta, const std::string& what) {
    std::size_t pos = 0;
    auto varint = [&]() {
        std::uint64_t v = 0;
        int shift = 0;
        unsigned char c;
        do {
            if (pos >= delta.size()) corrupt(what + ": truncated delta header");
            c = static_cast<unsigned char>(delta[pos++]);
            v |= static_cast<std::uint64_t>(c & 0x7f) << shift;
            shift += 7;
        } while (c & 0x80);
        return v;
    };
    if (varint() != base.size()) corrupt(what + ": delta base size mismatch");
    const auto result_size = varint();
    std::string out;
    out.reserve(result_size);
    while (pos < delta.size()) {
        auto op = static_cast<unsigned char>(delta[pos++]);
        if (op & 0x80) {
            std::uint64_t off = 0, len = 0;
            for (int i = 0; i < 4; ++i) {
                if (op & (1 << i)) {
                    if (pos >= delta.size()) corrupt(what + ": truncated delta copy");
                    off |= static_cast<std::uint64_t>(static_cast<unsigned char>(delta[pos++])) << (8 * i);
                }
            }
            for (int i = 0; i < 3; ++i) {
                if (op & (0x10 << i)) {
                    if (pos >= delta.size()) corrupt(what + ": truncated delta copy");
                    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(delta[pos++])) << (8 * i);
                }
            }
            if (len == 0) len = 0x10000;
            if (off + len > base.size()) corrupt(what + ": delta copy out of range");
            out.append(base, off, len);
        } else if (op != 0) {
            if (pos + op > delta.size()) corrupt(what + ": truncated delta insert");
            out.append(delta, pos, op);
            pos += op;
        } else {
            corrupt(what + ": reserved delta opcode");
        }
    }
    if (out.size() != result_size) corrupt(what + ": delta result size mismatch");
    return out;
}

class Pack {
public:
    Pack(const fs::path& idx_path, const fs::path& pack_path)
        : name_(pack_path.filename().string()), data_(read_file(pack_path)) {
        if (data_.size() < 12 || data_.compare(0, 4, "PACK") != 0) corrupt(name_ + ": not a pack file");
        load_idx(read_file(idx_path));
    }

    std::optional<std::uint64_t> offset_of(const RawSha& sha) const {
        auto it = offsets_.find(to_hex(sha.data()));
        if (it == offsets_.end()) return std::nullopt;
        return it->second;
    }

    template <typename Fn>
    void for_each_id(Fn&& fn) const {
        for (const auto& [hex, off] : offsets_) fn(hex);
    }

    template <typename Resolver>
    GitObject read_at(std::uint64_t offset, Resolver&& resolve_ref) {
        if (auto it = cache_.find(offset); it != cache_.end()) return it->second;
        if (offset >= data_.size()) corrupt(name_ + ": object offset out of range");
        const auto* p = reinterpret_cast<const unsigned char*>(data_.data());
        std::size_t pos = offset;
        unsigned char c = p[pos++];
        int type = (c >> 4) & 7;
        std::uint64_t size = c & 15;
        int shift = 4;
        while (c & 0x80) {
            if (pos >= data_.size()) corrupt(name_ + ": truncated object header");
            c = p[pos++];
            size |= static_cast<std::uint64_t>(c & 0x7f) << shift;
            shift += 7;
        }
        const std::string what = name_ + "@" + std::to_string(offset);
        GitObject obj;
        if (type >= 1 && type <= 4) {
            obj.type = static_cast<ObjType>(type);
            obj.data = inflate_stream(std::string_view(data_).substr(pos), size, what);
        } else if (type == 6) {
            c = p[pos++];
            std::uint64_t rel = c & 0x7f;
            while (c & 0x80) {
                if (pos >= data_.size()) corrupt(what + ": truncated delta offset");
                c = p[pos++];
                rel = ((rel + 1) << 7) | (c & 0x7f);
            }
            if (rel == 0 || rel > offset) corrupt(what + ": bad delta base offset");
            GitObject base = read_at(offset - rel, resolve_ref);
            std::string delta = inflate_stream(std::string_view(data_).substr(pos), size, what);
            obj.type = base.type;
            obj.data = apply_delta(base.data, delta, what);
        } else if (type == 7) {
            if (pos + 20 > data_.size()) corrupt(what + ": truncated delta base id");
            std::string base_hex = to_hex(p + pos);
            pos += 20;
            GitObject base = resolve_ref(base_hex);
            std::string delta = inflate_stream(std::string_view(data_).substr(pos), size, what);
            obj.type = base.type;
            obj.data = apply_delta(base.data, delta, what);
        } else {
            corrupt(what + ": unknown pack object type " + std::to_string(type));
        }
        if (obj.type != ObjType::Blob) cache_.emplace(offset, obj);
        return obj;
    }

private:
    void load_idx(const std::string& idx) {
        const auto* p = reinterpret_cast<const unsigned char*>(idx.data());
        auto need = [&](std::size_t n) {
            if (idx.size() < n) corrupt(name_ + ": truncated pack index");
        };
        need(8);
        if (std::memcmp(p, "\377tOc", 4) == 0) {
            if (be32(p + 4) != 2) corrupt(name_ + ": unsupported pack index version");
            need(8 + 1024);
            const std::uint32_t n = be32(p + 8 + 255 * 4);
            const std::size_t names = 8 + 1024;
            const std::size_t crcs = names + 20ull * n;
            const std::size_t offs = crcs + 4ull * n;
            const std::size_t large = offs + 4ull * n;
            need(large);
            for (std::uint32_t i = 0; i < n; ++i) {
                std::uint64_t off = be32(p + offs + 4ull * i);
                if (off & 0x80000000u) {
                    std::size_t k = off & 0x7fffffffu;
                    need(large + 8 * (k + 1));
                    off = static_cast<std::uint64_t>(be32(p + large + 8 * k)) << 32 | be32(p + large + 8 * k + 4);
                }
                offsets_.emplace(to_hex(p + names + 20ull * i), off);
            }
        } else {
            need(1024);
            const std::uint32_t n = be32(p + 255 * 4);
            need(1024 + 24ull * n);
            for (std::uint32_t i = 0; i < n; ++i) {
                const unsigned char* e = p + 1024 + 24ull * i;
                offsets_.emplace(to_hex(e + 4), be32(e));
            }
        }
    }

    std::string name_;
    std::string data_;
    std::unordered_map<std::string, std::uint64_t> offsets_;
    std::unordered_map<std::uint64_t, GitObject> cache_;
};

class ObjectStore {
public:
    explicit ObjectStore(fs::path git_dir) : git_dir_(std::move(git_dir)) {
        std::error_code ec;
        if (!fs::is_directory(git_dir_ / "objects", ec)) {
            throw Error(ErrorCode::GitObjectStore, "no object database under " + git_dir_.string());
        }
        fs::path pack_dir = git_dir_ / "objects" / "pack";
        if (fs::is_directory(pack_dir, ec)) {
            std::vector<fs::path> idx_files;
            for (const auto& entry : fs::directory_iterator(pack_dir, ec)) {
                if (entry.path().extension() == ".idx") idx_files.push_back(entry.path());
            }
            std::sort(idx_files.begin(), idx_files.end());
            for (const auto& idx : idx_files) {
                auto pack = idx;
                pack.replace_extension(".pack");
                try {
                    packs_.push_back(std::make_unique<Pack>(idx, pack));
                } catch (const Error& e) {
                    if (e.code() == ErrorCode::Io) {
                        throw Error(ErrorCode::GitObjectStore, std::string("unreadable pack: ") + e.what());
                    }
                    throw;
                }
            }
        }
    }

    const fs::path& git_dir() const { return git_dir_; }

    GitObject read(const std::string& hex) {
        if (!is_sha_hex(hex)) corrupt("malformed object id '" + hex + "'");
        fs::path loose = git_dir_ / "objects" / hex.substr(0, 2) / hex.substr(2);
        std::error_code ec;
        if (fs::is_regular_file(loose, ec)) return read_loose(loose, hex);
        const RawSha raw = from_hex(hex);
        for (auto& pack : packs_) {
            if (auto off = pack->offset_of(raw)) {
                return pack->read_at(*off, [this](const std::string& base) { return read(base); });
            }
        }
        corrupt("object " + hex + " not found");
    }

    std::vector<std::string> all_ids() const {
        std::set<std::string> ids;
        std::error_code ec;
        for (const auto& dir : fs::directory_iterator(git_dir_ / "objects", ec)) {
            auto prefix = dir.path().filename().string();
            if (prefix.size() != 2 || !dir.is_directory()) continue;
            for (const auto& f : fs::directory_iterator(dir.path(), ec)) {
                std::string hex = prefix + f.path().filename().string();
                if (is_sha_hex(hex)) ids.insert(hex);
            }
        }
        for (const auto& pack : packs_) pack->for_each_id([&](const std::string& hex) { ids.insert(hex); });
        return {ids.begin(), ids.end()};
    }

private:
    static GitObject read_loose(const fs::path& path, const std::string& hex) {
        std::string raw;
        try {
            raw = read_file(path);
        } catch (const Error&) {
            throw Error(ErrorCode::GitObjectStore, "cannot read object " + hex);
        }
        std::string body = inflate_stream(raw, std::nullopt, "object " + hex);
        auto nul = body.find('\0');
        auto space = body.find(' ');
        if (nul == std::string::npos || space == std::string::npos || space > nul) {
            corrupt("object " + hex + ": bad header");
        }
        auto type = parse_type(std::string_view(body).substr(0, space));
        if (!type) corrupt("object " + hex + ": unknown type");
        std::size_t size = 0;
        try {
            size = std::stoull(body.substr(space + 1, nul - space - 1));
        } catch (const std::exception&) {
            corrupt("object " + hex + ": bad size");
        }
        if (body.size() - nul - 1 != size) corrupt("object " + hex + ": size mismatch");
        return {*type, body.substr(nul + 1)};
    }

    fs::path git_dir_;
    std::vector<std::unique_ptr<Pack>> packs_;
};

struct ParsedCommit {
    std::string tree;
    std::vector<std::string> parents;
    std::int64_t timestamp = 0;
    std::string message;
};

ParsedCommit parse_commit(const GitObject& obj, const std::string& hex) {
    if (obj.type != ObjType::Commit) corrupt("object " + hex + " is not a commit");
    ParsedCommit c;
    const std::string& d = obj.data;
    std::size_t pos = 0;
    bool have_tree = false;
    while (pos < d.size()) {
        auto eol = d.find('\n', pos);
        if (eol == std::string::npos) corrupt("commit " + hex + ": unterminated header");
        std::string_view line(d.data() + pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) break;
        if (line.front() == ' ') continue;  // continuation of a multi-line header
        auto sp = line.find(' ');
        auto key = line.substr(0, sp);
        auto value = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
        if (key == "tree") {
            if (!is_sha_hex(value)) corrupt("commit " + hex + ": bad tree id");
            c.tree = value;
            have_tree = true;
        } else if (key == "parent") {
            if (!is_sha_hex(value)) corrupt("commit " + hex + ": bad parent id");
            std::string p(value);
            if (std::find(c.parents.begin(), c.parents.end(), p) == c.parents.end()) c.parents.push_back(p);
        } else if (key == "committer") {
            // "Name <email> 1700000000 +0100"
            auto gt = value.rfind('>');
            if (gt == std::string_view::npos) corrupt("commit " + hex + ": bad committer line");
            std::istringstream in{std::string(value.substr(gt + 1))};
            if (!(in >> c.timestamp)) corrupt("commit " + hex + ": bad committer timestamp");
        }
    }
    if (!have_tree) corrupt("commit " + hex + ": missing tree");
    c.message = d.substr(std::min(pos, d.size()));
    return c;
}

struct TreeEntry {
    std::string mode;
    std::string name;
    std::string id;
};

std::vector<TreeEntry> parse_tree(const GitObject& obj, const std::string& hex) {
    if (obj.type != ObjType::Tree) corrupt("object " + hex + " is not a tree");
    std::vector<TreeEntry> out;
    const std::string& d = obj.data;
    std::size_t pos = 0;
    while (pos < d.size()) {
        auto sp = d.find(' ', pos);
        auto nul = d.find('\0', pos);
        if (sp == std::string::npos || nul == std::string::npos || sp > nul || nul + 21 > d.size()) {
            corrupt("tree " + hex + ": malformed entry");
        }
        TreeEntry e{d.substr(pos, sp - pos), d.substr(sp + 1, nul - sp - 1),
                    to_hex(reinterpret_cast<const unsigned char*>(d.data() + nul + 1))};
        if (e.name.empty() || e.name.find('/') != std::string::npos) corrupt("tree " + hex + ": bad entry name");
        out.push_back(std::move(e));
        pos = nul + 21;
    }
    return out;
}

fs::path find_git_dir(const fs::path& path) {
    std::error_code ec;
    if (fs::is_directory(path / ".git", ec)) return path / ".git";
    if (fs::is_regular_file(path / ".git", ec)) {
        // gitdir: <path>
        std::string text = read_file(path / ".git");
        const std::string prefix = "gitdir: ";
        if (text.rfind(prefix, 0) == 0) {
            auto target = text.substr(prefix.size());
            while (!target.empty() && (target.back() == '\n' || target.back() == '\r')) target.pop_back();
            fs::path dir(target);
            return dir.is_absolute() ? dir : path / dir;
        }
    }
    if (fs::is_directory(path / "objects", ec)) return path;
    throw Error(ErrorCode::GitObjectStore, "no Git repository at " + path.string());
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
}

std::optional<std::string> resolve_ref(const fs::path& git_dir, const std::string& ref) {
    std::error_code ec;
    for (std::string current = ref, seen; seen.size() < 10; seen += 'x') {
        fs::path loose = git_dir / current;
        if (fs::is_regular_file(loose, ec)) {
            std::string text = trim(read_file(loose));
            if (text.rfind("ref: ", 0) == 0) {
                current = text.substr(5);
                continue;
            }
            if (is_sha_hex(text)) return text;
            return std::nullopt;
        }
        if (fs::is_regular_file(git_dir / "packed-refs", ec)) {
            std::istringstream in(read_file(git_dir / "packed-refs"));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#' || line[0] == '^') continue;
                if (line.size() > 41 && line.compare(41, std::string::npos, current) == 0 &&
                    is_sha_hex(std::string_view(line).substr(0, 40))) {
                    return line.substr(0, 40);
                }
            }
        }
        return std::nullopt;
    }
    return std::nullopt;
}

std::string newest_childless_commit(ObjectStore& store) {
    std::map<std::string, ParsedCommit> commits;
    for (const auto& id : store.all_ids()) {
        GitObject obj = store.read(id);
        if (obj.type == ObjType::Commit) commits.emplace(id, parse_commit(obj, id));
    }
    std::unordered_set<std::string> has_child;
    for (const auto& [id, c] : commits) has_child.insert(c.parents.begin(), c.parents.end());
    std::optional<std::string> best;
    for (const auto& [id, c] : commits) {  // ascending id, so ties keep the smallest
        if (has_child.contains(id)) continue;
        if (!best || c.timestamp > commits.at(*best).timestamp) best = id;
    }
    if (!best) throw Error(ErrorCode::GitDefaultBranch, "repository has no commits");
    return *best;
}

std::string resolve_head(ObjectStore& store) {
    const fs::path& git_dir = store.git_dir();
    std::error_code ec;
    if (!fs::exists(git_dir / "HEAD", ec)) return newest_childless_commit(store);
    std::string head = trim(read_file(git_dir / "HEAD"));
    if (is_sha_hex(head)) return head;
    if (head.rfind("ref: ", 0) == 0) {
        if (auto sha = resolve_ref(git_dir, head.substr(5))) return *sha;
        throw Error(ErrorCode::GitDefaultBranch, "default branch " + head.substr(5) + " does not resolve");
    }
    throw Error(ErrorCode::GitDefaultBranch, "unreadable HEAD in " + git_dir.string());
}

class Importer {
public:
    Importer(ObjectStore& store, const GitImportOptions& options) : store_(store), options_(options) {}

    Corpus run(const std::string& head) {
        std::vector<std::string> stack{head};
        std::unordered_set<std::string> seen;
        while (!stack.empty()) {
            std::string id = std::move(stack.back());
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            ParsedCommit pc = parse_commit(store_.read(id), id);
            Commit c;
            c.id = CommitId(id);
            c.timestamp = pc.timestamp;
            c.message = std::move(pc.message);
            for (const auto& p : pc.parents) {
                c.parents.emplace_back(p);
                if (!seen.contains(p)) stack.push_back(p);
            }
            for (const auto& [path, blob] : flatten(pc.tree)) c.tree.emplace(path, blob);
            out_.commits.emplace(c.id, std::move(c));
        }
        return std::move(out_);
    }

private:
    using Flat = std::vector<std::pair<std::string, BlobId>>;

    const Flat& flatten(const std::string& tree_id) {
        if (auto it = trees_.find(tree_id); it != trees_.end()) return it->second;
        Flat flat;
        for (const auto& e : parse_tree(store_.read(tree_id), tree_id)) {
            if (e.mode == "40000" || e.mode == "040000") {
                for (const auto& [sub, blob] : flatten(e.id)) flat.emplace_back(e.name + "/" + sub, blob);
            } else if (e.mode == "160000") {
                continue;  // submodule
            } else {
                flat.emplace_back(e.name, blob_id(e.id));
            }
        }
        return trees_.emplace(tree_id, std::move(flat)).first->second;
    }

    BlobId blob_id(const std::string& git_id) {
        if (auto it = blobs_.find(git_id); it != blobs_.end()) return it->second;
        GitObject obj = store_.read(git_id);
        if (obj.type != ObjType::Blob) corrupt("object " + git_id + " is not a blob");
        BlobId id = blob_digest(obj.data);
        auto& slot = out_.blobs[id];
        if (options_.keep_content) slot = std::move(obj.data);
        return blobs_.emplace(git_id, id).first->second;
    }

    ObjectStore& store_;
    const GitImportOptions& options_;
    Corpus out_;
    std::unordered_map<std::string, Flat> trees_;
    std::unordered_map<std::string, BlobId> blobs_;
};

} // namespace

Project import_repository(Corpus& corpus, const fs::path& path, const std::string& name,
                          const GitImportOptions& options) {
    if (name.empty()) throw Error(ErrorCode::MalformedRecord, "project name must be nonempty");
    ObjectStore store(find_git_dir(path));
    const std::string head = resolve_head(store);
    Corpus imported = Importer(store, options).run(head);
    Project project{name, CommitId(head)};
    imported.projects.emplace(name, project);
    merge_into(corpus, imported);
    return project;
}

} // namespace vlt
