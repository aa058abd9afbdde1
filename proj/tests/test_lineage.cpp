#include "support/fixtures.hpp"
#include "support/generator.hpp"
#include "support/oracle.hpp"

#include "vlt/error.hpp"
#include "vlt/lineage.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace vlt;
using vlt::testing::load_fixture;

namespace {

std::set<BlobId> blobs(std::initializer_list<const char*> ids) {
    std::set<BlobId> out;
    for (const char* s : ids) out.emplace(s);
    return out;
}

ErrorCode lineage_error(const IndexBundle& idx, const Corpus& c, const FixSpec& fix) {
    try {
        compute_lineage(idx, c, fix);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected compute_lineage to fail");
    return ErrorCode::Io;
}

} // namespace

TEST_CASE("fix_seeds") {
    Corpus m = load_fixture("fixture_m");
    IndexBundle idx = build_indexes(m);

    CHECK(fix_seeds(idx, m, {CommitId("c3")}) ==
          std::vector<FixSeed>{{"src/f.c", BlobId("a0"), BlobId("a1")}});
    CHECK(fix_seeds(idx, m, {CommitId("c3"), std::set<std::string>{"docs/readme"}}).empty());
    CHECK_THROWS_AS(fix_seeds(idx, m, {CommitId("nope")}), Error);
    CHECK(lineage_error(idx, m, {CommitId("c1")}) == ErrorCode::RootFixCommit);
    CHECK(lineage_error(idx, m, {CommitId("c3"), std::nullopt, "CVE-20-1"}) == ErrorCode::InvalidCveId);
    CHECK(lineage_error(idx, m, {CommitId("c3"), std::set<std::string>{"docs/readme"}}) == ErrorCode::EmptySeeds);
}

TEST_CASE("a two-file fix yields one seed per changed file") {
    Corpus riot = load_fixture("riot_like");
    auto seeds = fix_seeds(build_indexes(riot), riot, {CommitId("riot-00002")});
    REQUIRE(seeds.size() == 2);
    CHECK(seeds[0].path != seeds[1].path);
}

TEST_CASE("a path added by the fix is not a seed") {
    Corpus c;
    for (const char* b : {"o", "n", "t"}) c.blobs.emplace(BlobId(b), std::nullopt);
    c.commits.emplace(CommitId("k1"), Commit{CommitId("k1"), {}, {{"lib.c", BlobId("o")}}, 1, ""});
    c.commits.emplace(CommitId("k2"), Commit{CommitId("k2"), {CommitId("k1")},
                                             {{"lib.c", BlobId("n")}, {"test.c", BlobId("t")}}, 2, ""});
    c.projects.emplace("p", Project{"p", CommitId("k2")});
    IndexBundle idx = build_indexes(c);
    auto seeds = fix_seeds(idx, c, {CommitId("k2")});
    REQUIRE(seeds.size() == 1);
    CHECK(seeds[0].path == "lib.c");
    CHECK(lineage_error(idx, c, {CommitId("k2"), std::set<std::string>{"test.c"}}) == ErrorCode::EmptySeeds);
}

TEST_CASE("closures on fixture M") {
    IndexBundle idx = build_indexes(load_fixture("fixture_m"));
    CHECK(ancestor_closure(idx, blobs({"a0"})) == blobs({"a0", "a00"}));
    CHECK(ancestor_closure(idx, {}).empty());
    CHECK(ancestor_closure(idx, blobs({"a00"})) == blobs({"a00"}));
    CHECK(ancestor_closure(idx, blobs({"never-seen"})) == blobs({"never-seen"}));
    CHECK(descendant_closure(idx, blobs({"a1"})) == blobs({"a1", "a2"}));
    CHECK(descendant_closure(idx, blobs({"h-isolated"})) == blobs({"h-isolated"}));
}

TEST_CASE("closures terminate on a revert cycle") {
    IndexBundle idx = build_indexes(load_fixture("fixture_r"));
    CHECK(descendant_closure(idx, blobs({"a1"})) == blobs({"a1", "a0"}));
    CHECK(ancestor_closure(idx, blobs({"a0"})) == blobs({"a0", "a1"}));
}

TEST_CASE("compute_lineage on fixture M") {
    Corpus m = load_fixture("fixture_m");
    LineageSets ls = compute_lineage(build_indexes(m), m, {CommitId("c3")});
    CHECK(ls.vulnerable == blobs({"a00", "a0"}));
    CHECK(ls.fixed == blobs({"a1", "a2"}));
    CHECK(ls.overlap.empty());
}

TEST_CASE("compute_lineage keeps revert-overlap blobs vulnerable") {
    // The revert a1 -> a0 makes a1 an ancestor of a0 as well as a0 a
    // descendant of a1, so both blobs are in both closures.
    Corpus r = load_fixture("fixture_r");
    LineageSets ls = compute_lineage(build_indexes(r), r, {CommitId("r2")});
    CHECK(ls.overlap == blobs({"a0", "a1"}));
    CHECK(ls.vulnerable == blobs({"a0", "a1"}));
    CHECK(ls.fixed.empty());
}

namespace {

struct RandomGraph {
    IndexBundle index;
    std::vector<vlt::testing::BlobEdge> forward, backward;
    std::vector<BlobId> nodes;
};

RandomGraph random_graph(std::mt19937_64& rng) {
    RandomGraph g;
    int n = std::uniform_int_distribution<int>(1, 100)(rng);
    int m = std::uniform_int_distribution<int>(0, 2 * n)(rng);
    for (int i = 0; i < n; ++i) g.nodes.emplace_back("n" + std::to_string(i));
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int e = 0; e < m; ++e) {
        const BlobId& a = g.nodes[static_cast<std::size_t>(pick(rng))];
        const BlobId& b = g.nodes[static_cast<std::size_t>(pick(rng))];
        if (a == b) continue;
        g.index.ob2b[a].insert(b);
        g.index.b2ob[b].insert(a);
        g.forward.emplace_back(a, b);
        g.backward.emplace_back(b, a);
    }
    return g;
}

std::set<BlobId> random_subset(std::mt19937_64& rng, const std::vector<BlobId>& nodes, double p) {
    std::set<BlobId> s;
    std::bernoulli_distribution keep(p);
    for (const auto& n : nodes) {
        if (keep(rng)) s.insert(n);
    }
    return s;
}

} // namespace

TEST_CASE("property: closures match naive fixpoint, are idempotent and monotone") {
    std::mt19937_64 rng(42);
    for (int round = 0; round < 300; ++round) {
        RandomGraph g = random_graph(rng);
        auto s = random_subset(rng, g.nodes, 0.05);
        auto t = s;
        auto extra = random_subset(rng, g.nodes, 0.05);
        t.insert(extra.begin(), extra.end());

        auto anc = ancestor_closure(g.index, s);
        auto desc = descendant_closure(g.index, s);
        CHECK(anc == vlt::testing::fixpoint_closure(s, g.backward));
        CHECK(desc == vlt::testing::fixpoint_closure(s, g.forward));
        CHECK(ancestor_closure(g.index, anc) == anc);
        CHECK(descendant_closure(g.index, desc) == desc);
        auto anc_t = ancestor_closure(g.index, t);
        CHECK(std::includes(anc_t.begin(), anc_t.end(), anc.begin(), anc.end()));
    }
}

TEST_CASE("property: precedence leaves disjoint sets with the same union") {
    std::mt19937_64 rng(99);
    int checked = 0;
    while (checked < 150) {
        Corpus c = vlt::testing::random_corpus(rng, {.max_projects = 8, .max_commits = 80});
        auto fix = vlt::testing::random_fix(rng, c);
        if (!fix) continue;
        IndexBundle idx = build_indexes(c);
        LineageSets ls;
        try {
            ls = compute_lineage(idx, c, *fix);
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::EmptySeeds);
            continue;
        }
        ++checked;
        std::set<BlobId> inter;
        std::set_intersection(ls.vulnerable.begin(), ls.vulnerable.end(), ls.fixed.begin(), ls.fixed.end(),
                              std::inserter(inter, inter.end()));
        CHECK(inter.empty());

        std::set<BlobId> bad, good;
        for (const auto& s : ls.seeds) {
            bad.insert(s.vulnerable_seed);
            good.insert(s.fixed_seed);
            CHECK(s.vulnerable_seed != s.fixed_seed);
        }
        auto before = ancestor_closure(idx, bad);
        auto after_fix = descendant_closure(idx, good);
        before.insert(after_fix.begin(), after_fix.end());
        std::set<BlobId> now = ls.vulnerable;
        now.insert(ls.fixed.begin(), ls.fixed.end());
        CHECK(now == before);
        CHECK(std::includes(ls.vulnerable.begin(), ls.vulnerable.end(), ls.overlap.begin(), ls.overlap.end()));
    }
}
