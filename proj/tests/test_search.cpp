#include "doctest.h"

#include "rankforge/errors.hpp"
#include "rankforge/search_direct.hpp"
#include "rankforge/search_pair.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <tuple>

using namespace rankforge;
using namespace rankforge::oracle;

TEST_CASE("quadruple decomposition")
{
    Quadruple q = quadruple_decompose(7, 6, 3, 2);
    CHECK(q == Quadruple{4, 1, 1, 8});
    q = quadruple_decompose(0, 37, 3, 23);
    CHECK(q == Quadruple{1, -14, 3, 20});
    CHECK(w_value(0, -158, 3, 3) == -280);
    CHECK(w_value(0, 0, 0, 0) == 0);
    CHECK_THROWS_AS(quadruple_decompose(2, 1, 2, 5), DegeneratePair);
}

TEST_CASE("W equals su on every pair of the rank-6 record model")
{
    const std::int64_t b2 = 5, b4 = -5164, b6 = 194880, h = 40;
    auto pts = box_points(b2, b4, b6, h);
    REQUIRE(pts.size() >= 10);
    std::size_t pairs = 0;
    for (const auto& p : pts)
        for (const auto& q : pts) {
            if (p.x >= q.x) continue;
            for (int sign : {1, -1}) {
                const std::int64_t x1 = to_int64(p.x), y1 = to_int64(p.y), x2 = to_int64(q.x), y2 = sign * to_int64(q.y);
                Quadruple d = quadruple_decompose(x1, y1, x2, y2);
                CHECK(w_value(b2, b4, x1 + x2, x2 - x1) == d.s * d.u);
                ++pairs;
            }
        }
    CHECK(pairs > 0);
}

TEST_CASE("parity schedules")
{
    auto odd = parity_schedule(1, 1);
    CHECK(odd.kind == ScheduleKind::OddB2);
    CHECK(odd.pair_allowed(3, 5, 10));
    CHECK_FALSE(odd.pair_allowed(2, 5, 10));
    CHECK_FALSE(odd.pair_allowed(5, 3, 10));
    CHECK(odd.z_allowed(3, 15));
    CHECK_FALSE(odd.z_allowed(2, 15));

    auto four = parity_schedule(4, 1);
    CHECK(four.kind == ScheduleKind::EvenB2OddB6);
    CHECK(four.z_allowed(2, 4));
    CHECK_FALSE(four.z_allowed(4, 4));
    CHECK_FALSE(four.z_allowed(3, 4));

    auto zero = parity_schedule(0, 0);
    CHECK(zero.kind == ScheduleKind::ZeroB2EvenB6);
    CHECK(zero.z_allowed(3, 5));
    CHECK_FALSE(zero.z_allowed(2, 5));
    CHECK(zero.split_allowed(2, 6, 1, 1));
    CHECK_FALSE(zero.split_allowed(4, 6, 1, 1));

    CHECK(parity_schedule(-4, 0).kind == ScheduleKind::Generic);
    CHECK(parity_schedule(0, 1).kind == ScheduleKind::EvenB2OddB6);
}

TEST_CASE("divisor splits")
{
    DivisorTable table(1000);
    std::vector<std::int64_t> divs;
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    divisor_splits(
        -280, table, [](std::int64_t s, std::int64_t u) { return s % 2 == 0 && u % 2 == 0; }, divs, out);
    CHECK(std::find(out.begin(), out.end(), std::pair<std::int64_t, std::int64_t>{-14, 20}) != out.end());
    for (auto [s, u] : out) CHECK(s * u == -280);

    CHECK(divisor_splits(1) == std::vector<std::pair<std::int64_t, std::int64_t>>{{-1, -1}, {1, 1}});

    divisor_splits(
        12, table, [](std::int64_t s, std::int64_t u) { return s % 2 != 0 && u % 4 == 0; }, divs, out);
    std::sort(out.begin(), out.end());
    CHECK(out == std::vector<std::pair<std::int64_t, std::int64_t>>{{-3, -4}, {-1, -12}, {1, 12}, {3, 4}});

    // Exhaustive check of the full split list against trial division.
    for (std::int64_t W : {-360, -97, 1, 2, 64, 720, 999}) {
        auto got = divisor_splits(W);
        std::vector<std::pair<std::int64_t, std::int64_t>> want;
        for (std::int64_t s = -std::abs(W); s <= std::abs(W); ++s)
            if (s != 0 && W % s == 0) want.push_back({s, W / s});
        CHECK(got == want);
    }
}

TEST_CASE("record model reachable in its b4 slice at h = 12")
{
    SearchConfig cfg;
    cfg.h = 12;
    cfg.b2 = 0;
    cfg.classes = ClassSet::parse("0,2,1");
    cfg.threshold = 10;
    // Brute-force box count of (0, -158, 1369).
    unsigned count = 0;
    for (std::int64_t x = -144; x <= 144; ++x)
        for (std::int64_t y = 0; y <= 2 * 12 * 12 * 12; ++y)
            if (y * y == 4 * x * x * x - 316 * x + 1369) ++count;
    CHECK(count >= 10);
    auto slice = as_map(search_direct_slice(cfg, -158));
    REQUIRE(slice.count({0, -158, 1369}));
    CHECK(slice[{0, -158, 1369}] == count);
}

TEST_CASE("unreachable threshold gives an empty stream")
{
    SearchConfig cfg;
    cfg.h = 2;
    cfg.threshold = 1000000;
    CHECK(run_direct(cfg).empty());
    PairSearchConfig pc;
    pc.base = cfg;
    CHECK(run_pair(pc).empty());
}

TEST_CASE("direct search equals the naive oracle at h = 6")
{
    // b2 = 1 at threshold 3 yields about 1.7 million candidates; the other
    // b2 values use threshold 5 to keep the run short.
    for (std::int64_t b2 : {-4, -3, 0, 1, 4, 5}) {
        CAPTURE(b2);
        SearchConfig cfg;
        cfg.h = 6;
        cfg.b2 = b2;
        cfg.threshold = b2 == 1 ? 3 : 5;
        auto got = run_direct(cfg);
        CHECK(as_map(got) == naive_direct(cfg));
        CHECK(as_map(run_direct_serial(cfg, cfg.b4_lo(), cfg.b4_hi())) == as_map(got));
        std::size_t bad_witnesses = 0;
        for (std::size_t i = 0; i < got.size(); i += 97) {
            const auto& c = got[i];
            auto pts = box_points(to_int64(c.model.b2), to_int64(c.model.b4), to_int64(c.model.b6), 6);
            if (pts != c.witnesses) ++bad_witnesses;
        }
        CHECK(bad_witnesses == 0);
    }
    // Restricted class and signed ranges.
    SearchConfig cfg;
    cfg.h = 5;
    cfg.b2 = 1;
    cfg.threshold = 4;
    cfg.allow_positive_b4 = true;
    cfg.allow_negative_b6 = true;
    cfg.classes = ClassSet::favorable();
    CHECK(as_map(run_direct(cfg)) == naive_direct(cfg));
}

TEST_CASE("pair search against the compliant-pair oracle at h = 6")
{
    for (std::int64_t b2 : {-4, -3, 0, 1, 4, 5}) {
        CAPTURE(b2);
        PairSearchConfig cfg;
        cfg.base.h = 6;
        cfg.base.b2 = b2;
        cfg.base.threshold = 5;
        cfg.U = 1;
        cfg.L = 10;
        cfg.phase1_threshold = 1;
        const auto direct = naive_direct(cfg.base);
        const auto& boxes = cached_boxes(cfg.base);
        PairStats stats;
        const auto pair = as_map(run_pair(cfg, &stats));
        std::size_t oracle_size = 0, identity_failures = 0;
        for (const auto& [k, n] : direct) {
            if (!has_compliant_pair(k, boxes.at(k), cfg, identity_failures)) continue;
            ++oracle_size;
            CHECK(pair.count(k));
        }
        for (const auto& [k, n] : pair) {
            REQUIRE(direct.count(k));
            CHECK(direct.at(k) == n);
        }
        CHECK(oracle_size > 0);
        CHECK(identity_failures == 0);
        CHECK(stats.b4_slices > 0);

        // Default phase-1 threshold stays within the direct set.
        cfg.phase1_threshold = 10;
        for (const auto& [k, n] : as_map(run_pair(cfg))) CHECK(direct.count(k));

        // Serial and parallel drivers agree.
        cfg.phase1_threshold = 1;
        PairSearchContext ctx(cfg);
        CHECK(as_map(run_pair_serial(ctx, cfg.base.b4_lo(), cfg.base.b4_hi())) == pair);
    }
}

TEST_CASE("phase-2 class verification")
{
    PairSearchConfig cfg;
    cfg.base.h = 12;
    cfg.base.b2 = 0;
    cfg.base.threshold = 10;
    const unsigned L = cfg.effective_L();
    SqrtTable roots(std::uint64_t{1} << (L + 3), cfg.base.y_bound());
    auto found = as_map(verify_class(1369 % (std::uint64_t{1} << (L + 3)), -158, cfg, roots));
    REQUIRE(found.count({0, -158, 1369}));
    CHECK(found[{0, -158, 1369}] == box_points(0, -158, 1369, 12).size());
    // A class whose residues are not squares modulo 8 yields nothing.
    CHECK(verify_class(3, -158, cfg, roots).empty());
}

TEST_CASE("config validation")
{
    SearchConfig cfg;
    cfg.h = 1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.h = 6;
    cfg.b2 = 2;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    PairSearchConfig pc;
    pc.base.h = 6;
    pc.L = 4; // 2^7 <= 2 * 6^3
    CHECK_THROWS_AS(pc.validate(), DomainError);
    CHECK(default_L(30) >= 19);
}
