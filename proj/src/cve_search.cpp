#include "vlt/cve_search.hpp"

#include "vlt/error.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <unordered_map>

namespace vlt {

namespace {

struct MessageMatch {
    std::vector<std::string> ids;
    std::string excerpt;
};

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xc0) == 0x80; }

std::string excerpt_around(const std::string& msg, std::size_t pos, std::size_t len) {
    std::size_t start = 0;
    if (msg.size() > kExcerptLength) {
        std::size_t slack = kExcerptLength > len ? (kExcerptLength - len) / 2 : 0;
        start = pos > slack ? pos - slack : 0;
        start = std::min(start, msg.size() - kExcerptLength);
    }
    std::size_t end = std::min(msg.size(), start + kExcerptLength);
    while (start < end && is_continuation(msg[start])) ++start;
    while (end < msg.size() && end > start && is_continuation(msg[end])) --end;
    std::string out = msg.substr(start, end - start);
    std::replace_if(out.begin(), out.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
    return out;
}

void add_unique(std::vector<std::string>& ids, std::string id) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(std::move(id));
}

std::optional<MessageMatch> match_message(const std::string& msg, const std::regex& pattern,
                                          const std::regex& canonical) {
    std::smatch first;
    if (!std::regex_search(msg, first, pattern)) return std::nullopt;
    MessageMatch m;
    m.excerpt = excerpt_around(msg, static_cast<std::size_t>(first.position(0)),
                               static_cast<std::size_t>(first.length(0)));
    for (auto it = std::sregex_iterator(msg.begin(), msg.end(), canonical); it != std::sregex_iterator(); ++it) {
        add_unique(m.ids, upper(it->str()));
    }
    // A custom pattern may match text with no canonical id in it; report
    // what it matched instead so the hit still says why it fired.
    if (m.ids.empty()) {
        for (auto it = std::sregex_iterator(msg.begin(), msg.end(), pattern); it != std::sregex_iterator(); ++it) {
            if (!it->str().empty()) add_unique(m.ids, upper(it->str()));
        }
        if (m.ids.empty()) m.ids.push_back(upper(first.str()));
    }
    return m;
}

} // namespace

std::vector<CveHit> scan_commit_messages(const Corpus& corpus, const std::optional<std::string>& pattern,
                                         int jobs) {
    const auto flags = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;
    std::regex re, canonical(kCvePattern, flags);
    try {
        re = std::regex(pattern.value_or(kCvePattern), flags);
    } catch (const std::regex_error& e) {
        throw Error(ErrorCode::InvalidPattern, "invalid pattern '" + *pattern + "': " + e.what());
    }

    const std::vector<CommitId> commits = reachable_commits(corpus);
    std::vector<std::optional<MessageMatch>> matches(commits.size());
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto n = static_cast<std::ptrdiff_t>(commits.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        matches[k] = match_message(corpus.commit(commits[k]).message, re, canonical);
    }

    std::unordered_map<CommitId, const MessageMatch*> matched;
    for (std::size_t k = 0; k < commits.size(); ++k) {
        if (matches[k]) matched.emplace(commits[k], &*matches[k]);
    }

    std::vector<CveHit> hits;
    if (matched.empty()) return hits;
    for (const auto& [name, project] : corpus.projects) {
        for (const auto& id : reachable_from(corpus, project.head)) {
            auto it = matched.find(id);
            if (it != matched.end()) hits.push_back({name, id, it->second->ids, it->second->excerpt});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const CveHit& a, const CveHit& b) {
        return std::tie(a.project, a.commit) < std::tie(b.project, b.commit);
    });
    return hits;
}

std::string hits_to_jsonl(const std::vector<CveHit>& hits) {
    std::string out;
    for (const auto& h : hits) {
        nlohmann::json rec{{"project", h.project}, {"commit", h.commit.str()}, {"cve_ids", h.cve_ids},
                           {"excerpt", h.excerpt}};
        out += rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

} // namespace vlt
