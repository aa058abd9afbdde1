#include "vlt/index.hpp"

#include "vlt/error.hpp"
#include "vlt/io.hpp"

#include <omp.h>

#include <algorithm>
#include <cstring>

namespace vlt {

std::vector<LineageEdge> diff_against_parents(const Commit& commit, const Corpus& corpus) {
    std::vector<LineageEdge> edges;
    for (const auto& pid : commit.parents) {
        const Commit* parent = corpus.find_commit(pid);
        if (!parent) {
            throw Error(ErrorCode::UnknownCommit,
                        "commit " + commit.id.str() + " names missing parent " + pid.str());
        }
        // Both trees are sorted by path; walk them together.
        auto a = parent->tree.begin();
        auto b = commit.tree.begin();
        while (a != parent->tree.end() && b != commit.tree.end()) {
            if (a->first < b->first) {
                ++a;
            } else if (b->first < a->first) {
                ++b;
            } else {
                if (a->second != b->second) edges.push_back({b->first, a->second, b->second, commit.id});
                ++a;
                ++b;
            }
        }
    }
    return edges;
}

namespace {

void require_valid(const Corpus& corpus) {
    auto violations = validate_corpus(corpus, BlobCheck::Lenient);
    if (!has_errors(violations)) return;
    std::string msg = "cannot index an invalid corpus:";
    for (const auto& v : violations) {
        if (v.severity == Severity::Error) msg += "\n  " + v.message;
    }
    throw Error(ErrorCode::InvalidCorpus, msg);
}

void add_edge(IndexBundle& index, const LineageEdge& e) {
    index.b2ob[e.new_blob].insert(e.old_blob);
    index.ob2b[e.old_blob].insert(e.new_blob);
    index.edge_log.insert(e);
}

void add_commit_content(IndexBundle& index, const Commit& commit, const Corpus& corpus) {
    for (const auto& [path, blob] : commit.tree) index.b2c[blob].insert(commit.id);
    for (const auto& e : diff_against_parents(commit, corpus)) add_edge(index, e);
}

template <typename K, typename V>
void merge_sets(std::map<K, std::set<V>>& into, const std::map<K, std::set<V>>& from) {
    for (const auto& [k, vs] : from) into[k].insert(vs.begin(), vs.end());
}

} // namespace

IndexBundle build_indexes(const Corpus& corpus) {
    require_valid(corpus);
    IndexBundle index;
    for (const auto& id : reachable_commits(corpus)) add_commit_content(index, corpus.commit(id), corpus);
    for (const auto& [name, project] : corpus.projects) {
        index.p2h.emplace(name, project.head);
        for (const auto& id : reachable_from(corpus, project.head)) index.c2p[id].insert(name);
    }
    return index;
}

IndexBundle partial_index(const Corpus& corpus, const Project& project) {
    IndexBundle index;
    index.p2h.emplace(project.name, project.head);
    for (const auto& id : reachable_from(corpus, project.head)) {
        add_commit_content(index, corpus.commit(id), corpus);
        index.c2p[id].insert(project.name);
    }
    return index;
}

void merge_index(IndexBundle& into, const IndexBundle& from) {
    for (const auto& [name, head] : from.p2h) {
        auto [it, inserted] = into.p2h.emplace(name, head);
        if (!inserted && it->second != head) {
            throw Error(ErrorCode::DuplicateId, "conflicting heads for project " + name);
        }
    }
    merge_sets(into.b2ob, from.b2ob);
    merge_sets(into.ob2b, from.ob2b);
    merge_sets(into.b2c, from.b2c);
    merge_sets(into.c2p, from.c2p);
    into.edge_log.insert(from.edge_log.begin(), from.edge_log.end());
}

IndexBundle build_indexes_parallel(const Corpus& corpus, int jobs) {
    require_valid(corpus);
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();

    const std::vector<CommitId> commits = reachable_commits(corpus);
    std::vector<const Project*> projects;
    for (const auto& [name, project] : corpus.projects) projects.push_back(&project);

    std::vector<IndexBundle> partial(static_cast<std::size_t>(threads));
    const auto n_commits = static_cast<std::ptrdiff_t>(commits.size());
    const auto n_projects = static_cast<std::ptrdiff_t>(projects.size());

#pragma omp parallel num_threads(threads)
    {
        IndexBundle& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < n_commits; ++i) {
            add_commit_content(local, corpus.commit(commits[static_cast<std::size_t>(i)]), corpus);
        }
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n_projects; ++i) {
            const Project& p = *projects[static_cast<std::size_t>(i)];
            local.p2h.emplace(p.name, p.head);
            for (const auto& id : reachable_from(corpus, p.head)) local.c2p[id].insert(p.name);
        }
    }

    // Pairwise tree reduction keeps the merge work balanced across threads.
    for (std::size_t stride = 1; stride < partial.size(); stride *= 2) {
        const auto n = static_cast<std::ptrdiff_t>(partial.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; i += static_cast<std::ptrdiff_t>(2 * stride)) {
            auto j = static_cast<std::size_t>(i) + stride;
            if (j < partial.size()) {
                merge_index(partial[static_cast<std::size_t>(i)], partial[j]);
                partial[j] = IndexBundle{};
            }
        }
    }
    return partial.empty() ? IndexBundle{} : std::move(partial.front());
}

const std::set<CommitId>& commits_of_blob(const IndexBundle& index, const BlobId& blob) {
    static const std::set<CommitId> empty;
    auto it = index.b2c.find(blob);
    return it == index.b2c.end() ? empty : it->second;
}

const CommitId& head_of_project(const IndexBundle& index, const std::string& project) {
    auto it = index.p2h.find(project);
    if (it == index.p2h.end()) throw Error(ErrorCode::UnknownProject, "unknown project '" + project + "'");
    return it->second;
}

const std::set<std::string>& projects_of_commit(const IndexBundle& index, const CommitId& commit) {
    static const std::set<std::string> empty;
    auto it = index.c2p.find(commit);
    return it == index.c2p.end() ? empty : it->second;
}

// ---------------------------------------------------------------------------
// Persistence. Layout documented in docs/index-format.md.

namespace {

constexpr char kMagic[5] = {'V', 'L', 'C', 'T', '1'};

constexpr std::uint32_t fourcc(const char (&s)[5]) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

enum class Section : std::uint32_t {
    P2H = fourcc("P2H "),
    C2P = fourcc("C2P "),
    B2C = fourcc("B2C "),
    B2OB = fourcc("B2OB"),
    OB2B = fourcc("OB2B"),
    EDGE = fourcc("EDGE"),
};

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }
    void raw(std::string_view s) { buf_.append(s); }
    std::string& buffer() { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::string str() {
        auto n = u32();
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    // Element counts can never exceed the bytes left to describe them.
    std::uint64_t count(std::size_t min_bytes_each) {
        auto n = u64();
        if (n > remaining() / min_bytes_each) throw Error(ErrorCode::Truncated, "index file truncated");
        return n;
    }
    std::string_view take(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw Error(ErrorCode::Truncated, "index file truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

template <typename K, typename V>
void write_multimap(Writer& w, const std::map<K, std::set<V>>& m) {
    w.u64(m.size());
    for (const auto& [k, vs] : m) {
        if constexpr (std::is_same_v<K, std::string>) w.str(k); else w.str(k.str());
        w.u64(vs.size());
        for (const auto& v : vs) {
            if constexpr (std::is_same_v<V, std::string>) w.str(v); else w.str(v.str());
        }
    }
}

template <typename K, typename V>
void read_multimap(Reader& r, std::map<K, std::set<V>>& m) {
    auto n = r.count(12);
    for (std::uint64_t i = 0; i < n; ++i) {
        K key(r.str());
        auto& set = m[key];
        auto k = r.count(4);
        for (std::uint64_t j = 0; j < k; ++j) set.insert(V(r.str()));
    }
}

void write_section(Writer& out, Section tag, const std::string& payload) {
    out.u32(static_cast<std::uint32_t>(tag));
    out.u64(payload.size());
    out.raw(payload);
}

std::string_view read_section(Reader& r, Section expected) {
    auto tag = r.u32();
    if (tag != static_cast<std::uint32_t>(expected)) {
        throw Error(ErrorCode::CorruptIndex, "unexpected section tag in index file");
    }
    auto len = r.u64();
    if (len > r.remaining()) throw Error(ErrorCode::Truncated, "index file truncated");
    return r.take(static_cast<std::size_t>(len));
}

template <typename Fn>
void parse_section(Reader& r, Section tag, Fn&& fn) {
    Reader body(read_section(r, tag));
    fn(body);
    if (body.remaining() != 0) throw Error(ErrorCode::CorruptIndex, "trailing bytes inside index section");
}

} // namespace

std::string encode_index(const IndexBundle& index) {
    Writer out;
    out.raw(std::string_view(kMagic, sizeof kMagic));
    out.u32(kIndexFormatVersion);

    Writer p2h;
    p2h.u64(index.p2h.size());
    for (const auto& [name, head] : index.p2h) {
        p2h.str(name);
        p2h.str(head.str());
    }
    write_section(out, Section::P2H, p2h.buffer());

    Writer c2p, b2c, b2ob, ob2b;
    write_multimap(c2p, index.c2p);
    write_multimap(b2c, index.b2c);
    write_multimap(b2ob, index.b2ob);
    write_multimap(ob2b, index.ob2b);
    write_section(out, Section::C2P, c2p.buffer());
    write_section(out, Section::B2C, b2c.buffer());
    write_section(out, Section::B2OB, b2ob.buffer());
    write_section(out, Section::OB2B, ob2b.buffer());

    Writer edges;
    edges.u64(index.edge_log.size());
    for (const auto& e : index.edge_log) {
        edges.str(e.path);
        edges.str(e.old_blob.str());
        edges.str(e.new_blob.str());
        edges.str(e.commit.str());
    }
    write_section(out, Section::EDGE, edges.buffer());
    return std::move(out.buffer());
}

IndexBundle decode_index(std::string_view bytes) {
    const std::string_view magic(kMagic, sizeof kMagic);
    if (bytes.size() < magic.size()) {
        if (magic.substr(0, bytes.size()) == bytes) throw Error(ErrorCode::Truncated, "index file truncated");
        throw Error(ErrorCode::WrongMagic, "not an index file (bad magic)");
    }
    if (bytes.substr(0, magic.size()) != magic) throw Error(ErrorCode::WrongMagic, "not an index file (bad magic)");

    Reader r(bytes.substr(magic.size()));
    auto version = r.u32();
    if (version != kIndexFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "index format version " + std::to_string(version) +
                                                    ", expected " + std::to_string(kIndexFormatVersion));
    }

    IndexBundle index;
    parse_section(r, Section::P2H, [&](Reader& s) {
        auto n = s.count(8);
        for (std::uint64_t i = 0; i < n; ++i) {
            auto name = s.str();
            index.p2h.emplace(std::move(name), CommitId(s.str()));
        }
    });
    parse_section(r, Section::C2P, [&](Reader& s) { read_multimap(s, index.c2p); });
    parse_section(r, Section::B2C, [&](Reader& s) { read_multimap(s, index.b2c); });
    parse_section(r, Section::B2OB, [&](Reader& s) { read_multimap(s, index.b2ob); });
    parse_section(r, Section::OB2B, [&](Reader& s) { read_multimap(s, index.ob2b); });
    parse_section(r, Section::EDGE, [&](Reader& s) {
        auto n = s.count(16);
        for (std::uint64_t i = 0; i < n; ++i) {
            LineageEdge e;
            e.path = s.str();
            e.old_blob = BlobId(s.str());
            e.new_blob = BlobId(s.str());
            e.commit = CommitId(s.str());
            index.edge_log.insert(std::move(e));
        }
    });
    if (r.remaining() != 0) throw Error(ErrorCode::CorruptIndex, "trailing bytes after index sections");
    return index;
}

void save_index(const IndexBundle& index, const std::filesystem::path& path) {
    write_file_atomic(path, encode_index(index));
}

IndexBundle load_index(const std::filesystem::path& path) {
    return decode_index(read_file(path));
}

} // namespace vlt
