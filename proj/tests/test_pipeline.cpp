#include "doctest.h"

#include "rankforge/errors.hpp"
#include "rankforge/pipeline.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace rankforge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / ("rankforge-test-" + std::to_string(::getpid()) + "-" + name))
    {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig small_config()
{
    RunConfig c;
    c.search.base.h = 6;
    c.search.base.b2 = 0;
    c.search.base.threshold = 5;
    c.search.base.b4_min = -600;
    c.partition_size = 16;
    c.x_bound = 2000;
    c.m = 2;
    c.verify_min_count = 13;
    return c;
}

std::vector<Json> read_all(const fs::path& p)
{
    std::vector<Json> out;
    read_jsonl(p, [&](const Json& j) { out.push_back(j); });
    return out;
}

} // namespace

TEST_CASE("config text round trip")
{
    RunConfig c = small_config();
    c.method = SearchMethod::Pair;
    c.search.U = 8;
    c.search.L = 12;
    c.search.base.classes = ClassSet::favorable();
    c.search.base.b4_min = -100;
    c.search.base.allow_negative_b6 = true;
    auto back = RunConfig::parse_key_values(c.to_key_values());
    CHECK(back.to_key_values() == c.to_key_values());
    CHECK(back.hash() == c.hash());
    CHECK(back.hash().size() == 16);

    auto d = c;
    d.search.base.h = 7;
    CHECK(d.hash() != c.hash());

    CHECK_THROWS_AS(RunConfig::parse_key_values("h=6\nbogus=1\n"), ParseError);
    CHECK_THROWS_AS(RunConfig::parse_key_values("h=six\n"), ParseError);
    auto commented = RunConfig::parse_key_values("# comment\nh=9\n\nb2=1\n");
    CHECK(commented.search.base.h == 9);
    CHECK(commented.search.base.b2 == 1);

    RunConfig bad = small_config();
    bad.search.base.b2 = 2;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("serialization round trips")
{
    CandidateCurve cand{TwoTorsionModel(0, -158, 1369), 23, {{IntegralPoint{0, 37}}}};
    auto j = to_json(cand);
    CHECK(j.at("two_b4") == -316);
    auto back = candidate_from_json(j);
    CHECK(back.model == cand.model);
    CHECK(back.count == 23);
    CHECK(back.witnesses == cand.witnesses);

    Int huge("18031737725935636520843");
    CHECK(int_to_json(huge).is_string());
    CHECK(int_to_json(Int(-5)).is_number());
    CHECK(int_from_json(int_to_json(huge)) == huge);

    auto d = make_dossier(WeierstrassCurve::parse("[0,0,1,-79,342]"));
    d.integral_x = 39;
    d.rank = 5;
    auto dj = to_json(d);
    CHECK(dj.at("conductor").is_string());
    auto dd = dossier_from_json(dj);
    CHECK(dd.curve == d.curve);
    CHECK(dd.conductor == d.conductor);
    CHECK(dd.integral_x == 39);
    CHECK(dd.rank == 5);

    TempDir t("jsonl");
    fs::create_directories(t.path);
    std::ofstream(t.path / "bad.jsonl") << "{\"a\":1}\n\n{oops\n";
    CHECK_THROWS_AS(read_all(t.path / "bad.jsonl"), ParseError);
}

TEST_CASE("completed run matches the direct search")
{
    TempDir t("full");
    RunConfig c = small_config();
    RunControl ctl;
    ctl.verify = false;
    auto s = run_pipeline(c, t.path, ctl);
    CHECK(s.search_complete);
    auto want = run_direct(c.search.base);
    auto got = read_candidates(t.path);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].model == want[i].model);
        CHECK(got[i].count == want[i].count);
    }
    CHECK(s.candidates == want.size());
}

TEST_CASE("interrupted runs resume to identical output")
{
    TempDir a("straight"), b("interrupted");
    RunConfig c = small_config();
    auto full = run_pipeline(c, a.path);
    REQUIRE(full.complete);
    CHECK(full.dossiers > 0);

    RunControl stop;
    stop.stop_after_slices = 40;
    auto part = run_pipeline(c, b.path, stop);
    CHECK_FALSE(part.complete);
    CHECK_FALSE(part.search_complete);
    CHECK(part.partitions_done < part.partitions);

    // Resuming with a different config is refused.
    RunConfig other = c;
    other.search.base.h = 7;
    CHECK_THROWS_AS(run_pipeline(other, b.path), ConfigMismatch);

    // Several more interruptions, then completion from the stored config.
    for (int i = 0; i < 3; ++i) run_pipeline(c, b.path, stop);
    auto done = resume(b.path);
    CHECK(done.complete);
    CHECK(slurp(a.path / "candidates.jsonl") == slurp(b.path / "candidates.jsonl"));
    CHECK(slurp(a.path / "dossiers.jsonl") == slurp(b.path / "dossiers.jsonl"));
    CHECK(done.dossiers == full.dossiers);

    // Completed runs are a no-op.
    const auto before = fs::last_write_time(b.path / "dossiers.jsonl");
    auto again = run_pipeline(c, b.path);
    CHECK(again.complete);
    CHECK(fs::last_write_time(b.path / "dossiers.jsonl") == before);

    // Every log line is a JSON object with level and stage.
    for (const auto& j : read_all(b.path / "log.jsonl")) {
        CHECK(j.contains("level"));
        CHECK(j.contains("stage"));
    }
}

TEST_CASE("verification of candidate streams")
{
    TempDir t("verify");
    fs::create_directories(t.path);
    RunLog log(t.path / "log.jsonl", false);
    std::size_t failures = 0;
    CHECK(verify_candidates({}, 1000, 2, "test", log, &failures).empty());
    CHECK(failures == 0);

    // b6 = 0 with b4 = 0 is singular; it is logged and counted.
    std::vector<CandidateCurve> cands{{TwoTorsionModel(0, 0, 0), 3, {}}, {TwoTorsionModel(0, -158, 1369), 23, {}},
                                      {TwoTorsionModel(0, -158, 1369), 23, {}}};
    auto ds = verify_candidates(cands, 1000, 2, "test", log, &failures);
    REQUIRE(ds.size() == 1);
    CHECK(failures == 1);
    CHECK(ds[0].conductor == 19047851);
    CHECK(ds[0].rank == 5);
    CHECK(ds[0].provenance == "test");

    bool saw_skip = false;
    for (const auto& j : read_all(t.path / "log.jsonl"))
        if (j.at("level") != "info") saw_skip = true;
    CHECK(saw_skip);

    failures = 0;
    CHECK(verify_candidates(cands, 1000, 2, "test", log, &failures, 100).empty());
    CHECK(failures == 0);
}
