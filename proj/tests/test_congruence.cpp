#include "doctest.h"

#include "rankforge/congruence.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/search_pair.hpp"

#include <map>
#include <set>

using namespace rankforge;

TEST_CASE("parity table examples")
{
    CHECK(table1_allowed(0, 0, 0) == ParityRule::YEven);
    CHECK(table1_allowed(1, 0, 1) == ParityRule::Reject);
    CHECK(table1_allowed(1, 1, 1) == ParityRule::YDiffersFromX);
}

TEST_CASE("parity table against all coefficient parities")
{
    // (x, y) parities reachable on y = 2Y + a1 X + a3, grouped by b-invariant parities.
    std::map<std::array<int, 3>, std::set<std::pair<int, int>>> reach;
    for (int a1 = 0; a1 < 2; ++a1)
        for (int a3 = 0; a3 < 2; ++a3)
            for (int a4 = 0; a4 < 2; ++a4) {
                const int b2 = a1 & 1, b4 = (2 * a4 + a1 * a3) & 1, b6 = (a3 * a3) & 1;
                for (int x = 0; x < 2; ++x) reach[{b2, b4, b6}].insert({x, (a1 * x + a3) & 1});
            }
    for (int b2 = 0; b2 < 2; ++b2)
        for (int b4 = 0; b4 < 2; ++b4)
            for (int b6 = 0; b6 < 2; ++b6) {
                ParityRule rule = table1_allowed(b2, b4, b6);
                auto it = reach.find({b2, b4, b6});
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y) {
                        bool want = it != reach.end() && it->second.count({x, y});
                        CHECK(parity_rule_accepts(rule, x, y) == want);
                    }
            }
}

TEST_CASE("congruence filter matches realizable residues mod 8")
{
    std::set<std::array<int, 3>> realizable;
    for (int a1 = 0; a1 < 8; ++a1)
        for (int a2 = 0; a2 < 8; ++a2)
            for (int a3 = 0; a3 < 8; ++a3)
                for (int a4 = 0; a4 < 8; ++a4)
                    for (int a6 = 0; a6 < 8; ++a6)
                        realizable.insert({(a1 * a1 + 4 * a2) % 8, (2 * a4 + a1 * a3) % 8, (a3 * a3 + 4 * a6) % 8});
    for (int b2 : {-4, -3, 0, 1, 4, 5})
        for (int b4 = -8; b4 < 8; ++b4)
            for (int b6 = -8; b6 < 8; ++b6) {
                const std::array<int, 3> key{(b2 + 8) % 8, (b4 + 8) % 8, (b6 + 8) % 8};
                CHECK(passes_congruence_filters(b2, b4, b6, ClassSet{}) == (realizable.count(key) > 0));
            }
}

TEST_CASE("favorable classes")
{
    CHECK(mod8_favorable(0, -158, 1369));
    CHECK_FALSE(mod8_favorable(1, 2, 4));
    CHECK(mod8_favorable(5, 0, 0));
    CHECK(ClassSet::favorable().triples.size() == 7);
    for (const auto& t : ClassSet::favorable().triples) CHECK(passes_congruence_filters(t[0], t[1], t[2], ClassSet{}));
}

TEST_CASE("class set parsing")
{
    CHECK(ClassSet::parse("all").all);
    auto c = ClassSet::parse("0,2,1");
    CHECK_FALSE(c.all);
    CHECK(c.contains(0, -158, 1369));
    CHECK_FALSE(c.contains(0, -158, 1368));
    CHECK(ClassSet::parse(c.to_string()).triples == c.triples);
    CHECK(ClassSet::parse("1,1,1;5,0,0").triples.size() == 2);
    CHECK_THROWS_AS(ClassSet::parse("1,1"), ParseError);
    CHECK_THROWS_AS(ClassSet::parse("1,1,1,1"), ParseError);
}

TEST_CASE("allowed b6 residues")
{
    unsigned mask = allowed_b6_residues(0, -158, ClassSet::parse("0,2,1"));
    CHECK(mask == (1u << 1));
    CHECK(allowed_b6_residues(1, 0, ClassSet{}) != 0);
    for (int b4 = 0; b4 < 8; ++b4) {
        unsigned m = allowed_b6_residues(0, b4, ClassSet{});
        for (int r = 0; r < 8; ++r) CHECK(((m >> r) & 1u) == passes_congruence_filters(0, b4, r, ClassSet{}));
    }
}

TEST_CASE("square roots modulo powers of two")
{
    SqrtTable t8(8, 7);
    CHECK(t8.roots(1) == std::vector<std::uint64_t>{1, 3, 5, 7});
    SqrtTable t16(16, 15);
    CHECK(t16.roots(4) == std::vector<std::uint64_t>{2, 6, 10, 14});
    CHECK(t16.roots(3).empty());
    // Against exhaustive squaring modulo 2^10.
    SqrtTable t(1024, 1023);
    for (std::uint64_t r = 0; r < 1024; ++r) {
        std::vector<std::uint64_t> want;
        for (std::uint64_t y = 0; y < 1024; ++y)
            if (y * y % 1024 == r) want.push_back(y);
        CHECK(t.roots(r) == want);
    }
    // Root limit truncates.
    SqrtTable small(1024, 100);
    for (auto y : small.roots(1)) CHECK(y <= 100);
}
