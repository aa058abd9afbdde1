#include "support/fixtures.hpp"

#include "vlt/classifier.hpp"
#include "vlt/cli.hpp"
#include "vlt/io.hpp"
#include "vlt/report.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace vlt;
using vlt::testing::fixture_path;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run vlt_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct Pipeline {
    std::filesystem::path dir = vlt::testing::scratch_dir("cli");
    std::string corpus = (dir / "corpus.jsonl").string();
    std::string index = (dir / "m.idx").string();
    std::string report = (dir / "report.json").string();

    Pipeline() {
        REQUIRE(vlt_run({"ingest", "--corpus", fixture_path("fixture_m.jsonl").string(), "--out", corpus}).code == 0);
        REQUIRE(vlt_run({"index", "--corpus", corpus, "--out", index}).code == 0);
    }
    ~Pipeline() { std::filesystem::remove_all(dir); }
};

} // namespace

TEST_CASE("trace then report reproduces fixture M counts") {
    Pipeline p;
    Run trace = vlt_run({"--jobs", "2", "trace", "--index", p.index, "--corpus", p.corpus, "--fix-commit", "c3",
                         "--cve", "CVE-2020-0001", "--out", p.report});
    REQUIRE(trace.code == 0);
    Run table = vlt_run({"report", "--in", p.report, "--format", "table"});
    REQUIRE(table.code == 0);
    CHECK(table.out == render_table(std::vector<SummaryRow>{{"U", "CVE-2020-0001", 2, 1, 2, 1}}));

    Run csv = vlt_run({"report", "--in", p.report, "--format", "csv"});
    CHECK(csv.out == read_file(fixture_path("fixture_m.golden.csv")));
}

TEST_CASE("pipeline output equals direct library calls") {
    Pipeline p;
    REQUIRE(vlt_run({"trace", "--index", p.index, "--corpus", p.corpus, "--fix-commit", "c3", "--paths",
                     "src/f.c,docs/x", "--out", p.report})
                .code == 0);
    Corpus m = vlt::testing::load_fixture("fixture_m");
    FixSpec fix{CommitId("c3"), std::set<std::string>{"src/f.c", "docs/x"}, std::nullopt};
    CHECK(read_file(p.report) == render(classify_all(build_indexes(m), m, fix), Format::Json));

    Run json = vlt_run({"report", "--in", p.report, "--format", "json"});
    CHECK(json.out == read_file(p.report));
}

TEST_CASE("unknown fix commit is a data error and leaves no output") {
    Pipeline p;
    Run r = vlt_run({"trace", "--index", p.index, "--corpus", p.corpus, "--fix-commit", "nonexistent", "--out",
                     p.report});
    CHECK(r.code == cli::kExitData);
    CHECK(r.err.find("nonexistent") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(p.report));
}

TEST_CASE("usage errors exit 1") {
    Pipeline p;
    REQUIRE(vlt_run({"trace", "--index", p.index, "--corpus", p.corpus, "--fix-commit", "c3", "--out", p.report})
                .code == 0);

    Run xml = vlt_run({"report", "--in", p.report, "--format", "xml"});
    CHECK(xml.code == cli::kExitUsage);
    CHECK(xml.err.find("table") != std::string::npos);
    CHECK(xml.err.find("csv") != std::string::npos);
    CHECK(xml.err.find("json") != std::string::npos);

    CHECK(vlt_run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(vlt_run({}).code == cli::kExitUsage);
    CHECK(vlt_run({"index", "--corpus", p.corpus, "--bogus", "--out", p.index}).code == cli::kExitUsage);
    CHECK(vlt_run({"trace", "--index", p.index, "--corpus", p.corpus, "--fix-commit", "c3", "--cve", "CVE-1",
                   "--out", p.report})
              .code == cli::kExitUsage);
    CHECK(vlt_run({"index", "--corpus", (p.dir / "missing.jsonl").string(), "--out", p.index}).code ==
          cli::kExitUsage);
    CHECK(vlt_run({"ingest", "--git", p.dir.string(), "--out", p.corpus}).code == cli::kExitUsage);
    CHECK(vlt_run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("data errors exit 2") {
    Pipeline p;
    write_file_atomic(p.dir / "bad.idx", "XXXXX");
    Run r = vlt_run({"trace", "--index", (p.dir / "bad.idx").string(), "--corpus", p.corpus, "--fix-commit", "c3",
                     "--out", p.report});
    CHECK(r.code == cli::kExitData);
    CHECK(r.err.find("magic") != std::string::npos);

    write_file_atomic(p.dir / "bad.jsonl", "{\"type\":\"nope\"}\n");
    CHECK(vlt_run({"index", "--corpus", (p.dir / "bad.jsonl").string(), "--out", p.index}).code == cli::kExitData);

    // An index built from a different corpus is refused.
    std::string other_idx = (p.dir / "r.idx").string();
    REQUIRE(vlt_run({"index", "--corpus", fixture_path("fixture_r.jsonl").string(), "--out", other_idx}).code == 0);
    CHECK(vlt_run({"trace", "--index", other_idx, "--corpus", p.corpus, "--fix-commit", "c3", "--out", p.report})
              .code == cli::kExitData);

    CHECK(vlt_run({"trace", "--index", p.index, "--corpus", p.corpus, "--fix-commit", "c1", "--out", p.report})
              .code == cli::kExitData);
}

TEST_CASE("scan-cve writes JSONL hits") {
    Pipeline p;
    Run r = vlt_run({"scan-cve", "--index", p.index, "--corpus", p.corpus});
    REQUIRE(r.code == 0);
    auto hit = nlohmann::json::parse(r.out);
    CHECK(hit["project"] == "U");
    CHECK(hit["commit"] == "c3");

    std::string out = (p.dir / "hits.jsonl").string();
    REQUIRE(vlt_run({"scan-cve", "--index", p.index, "--corpus", p.corpus, "--pattern", "vendor", "--out", out})
                .code == 0);
    std::string text = read_file(out);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);  // d1, e1, e2, g1

    CHECK(vlt_run({"scan-cve", "--index", p.index, "--corpus", p.corpus, "--pattern", "(("}).code == cli::kExitData);
}

TEST_CASE("report --lists writes the three project lists") {
    Pipeline p;
    REQUIRE(vlt_run({"trace", "--index", p.index, "--corpus", p.corpus, "--fix-commit", "c3", "--fixed-only",
                     "--out", p.report})
                .code == 0);
    auto lists = p.dir / "lists";
    REQUIRE(vlt_run({"report", "--in", p.report, "--format", "csv", "--lists", lists.string()}).code == 0);
    CHECK(read_file(lists / "vulnerable.txt") == "P1\n");
    CHECK(read_file(lists / "safe.txt") == "P2\nU\n");
    CHECK(read_file(lists / "unknown.txt") == "P3\n");
    CHECK(read_file(lists / "fixed_only.txt").empty());
}

TEST_CASE("VLT_JOBS is honoured as a fallback") {
    Pipeline p;
    setenv("VLT_JOBS", "3", 1);
    CHECK(vlt_run({"-v", "index", "--corpus", p.corpus, "--out", p.index}).code == 0);
    setenv("VLT_JOBS", "garbage", 1);
    CHECK(vlt_run({"index", "--corpus", p.corpus, "--out", p.index}).code == 0);
    unsetenv("VLT_JOBS");
}
