#include "doctest.h"

#include "rankforge/errors.hpp"
#include "rankforge/heights.hpp"
#include "rankforge/points.hpp"

#include <random>
#include <set>

using namespace rankforge;

namespace {

WeierstrassCurve C(const char* s) { return WeierstrassCurve::parse(s); }

std::set<Int> xs(const std::vector<IntegralPoint>& pts)
{
    std::set<Int> out;
    for (const auto& p : pts) out.insert(p.x);
    return out;
}

// Independent of the library's cubic: test y^2 + a1xy + a3y = x^3 + ... for some integer y.
bool x_has_point(const WeierstrassCurve& c, const Int& x)
{
    Int d = (c.a1() * x + c.a3()) * (c.a1() * x + c.a3()) + 4 * (x * x * x + c.a2() * x * x + c.a4() * x + c.a6());
    return d >= 0 && is_square(d);
}

std::vector<RationalPoint> generators_of(const WeierstrassCurve& c, std::int64_t X)
{
    std::vector<RationalPoint> pts;
    for (const auto& p : sieve_search(c, X)) pts.emplace_back(Rat(p.x), Rat(p.y));
    return select_basis(c, pts).basis;
}

} // namespace

TEST_CASE("integral points of 37a")
{
    auto c = C("[0,0,1,-1,0]");
    auto pts = sieve_search(c, 1000);
    CHECK(xs(pts) == std::set<Int>{-1, 0, 1, 2, 6});
    for (const auto& p : pts) {
        CHECK(is_on_curve(c, RationalPoint(Rat(p.x), Rat(p.y))));
        CHECK(2 * p.y + c.a1() * p.x + c.a3() >= 0);
    }
}

TEST_CASE("sieve variants agree with the per-x oracle")
{
    std::mt19937_64 rng(3);
    std::vector<WeierstrassCurve> curves{C("[0,0,1,-79,342]"), C("[1,1,0,-2582,48720]"), C("[0,0,1,-277,4566]"),
                                         C("[1,-1,0,-79,289]"), C("[0,0,0,0,1]")};
    for (int i = 0; i < 20; ++i) {
        auto r = [&](long lo, long hi) { return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1)); };
        Coefficients a{r(0, 1), r(-1, 1), r(0, 1), r(-3000, 3000), r(-100000, 100000)};
        if (full_invariants(a).delta != 0) curves.emplace_back(a);
    }
    for (const auto& c : curves) {
        CAPTURE(c.to_string());
        const std::int64_t X = 20000;
        std::set<Int> want;
        for (std::int64_t x = -X; x <= X; ++x)
            if (x_has_point(c, x)) want.insert(x);
        auto naive = sieve_search_naive(c, X);
        SieveStats s1, s2;
        auto serial = sieve_search_serial(c, X, &s1);
        auto parallel = sieve_search_parallel(c, X, &s2);
        CHECK(xs(naive) == want);
        CHECK(serial == naive);
        CHECK(parallel == naive);
        CHECK(s1.exact_checks == s2.exact_checks);
        CHECK(s1.exact_checks >= want.size());
    }
}

TEST_CASE("sieve rejects most x on a record curve")
{
    SieveStats st;
    sieve_search_serial(C("[0,0,1,-79,342]"), 10000000, &st);
    CHECK(st.rejection_rate() > 0.95);
}

TEST_CASE("sieve residues are exactly the locally square x")
{
    auto c = C("[0,0,1,-79,342]");
    auto res = sieve_residues(c);
    std::set<std::uint32_t> have(res.begin(), res.end());
    // Every x with an integral point survives the filter.
    for (const auto& p : sieve_search_naive(c, 5000))
        CHECK(have.count(static_cast<std::uint32_t>(mod_ui(p.x, kSieveModulus))));
    // Recompute from 4x^3 + b2 x^2 + 2 b4 x + b6 modulo each factor of the modulus.
    auto b = b_invariants(c);
    std::vector<std::uint32_t> want;
    for (std::uint32_t x = 0; x < kSieveModulus; ++x) {
        const Int v = 4 * Int(x) * x * x + b.b2 * x * x + 2 * b.b4 * x + b.b6;
        bool ok = true;
        for (unsigned m : {64u, 63u, 65u, 11u}) {
            const long r = mod_ui(v, m);
            bool sq = false;
            for (unsigned y = 0; y < m && !sq; ++y) sq = (y * y) % m == static_cast<unsigned>(r);
            ok = ok && sq;
        }
        if (ok) want.push_back(x);
    }
    CHECK(res == want);
}

TEST_CASE("combination counts")
{
    CHECK(combination_count(11, 3) == 988663371ULL);
    CHECK(combination_count(5, 3) == 8403);
    CHECK(combination_count(3, 0) == 0);
    auto c = C("[0,0,1,-1,0]");
    CHECK(combo_search(c, {RationalPoint(0, 0)}, 0).empty());
}

TEST_CASE("combinations cover the sieve on the rank-5 record")
{
    auto c = C("[0,0,1,-79,342]");
    auto gens = generators_of(c, 10000);
    REQUIRE(gens.size() == 5);
    ComboStats st;
    auto combos = combo_search(c, gens, 3, std::nullopt, &st);
    CHECK(st.combinations == combination_count(5, 3));
    const auto cx = xs(combos);
    for (const auto& x : xs(sieve_search(c, 1000000))) CHECK(cx.count(x));
    for (const auto& p : combos) CHECK(is_on_curve(c, RationalPoint(Rat(p.x), Rat(p.y))));

    // Pruned enumeration keeps every point below its x bound.
    auto pruned = combo_search(c, gens, 3, Int(1000000));
    std::set<Int> small;
    for (const auto& x : cx)
        if (abs(x) <= 1000000) small.insert(x);
    std::set<Int> pruned_small;
    for (const auto& x : xs(pruned))
        if (abs(x) <= 1000000) pruned_small.insert(x);
    CHECK(pruned_small == small);
}

TEST_CASE("modular combinations agree with exact ones")
{
    auto c = C("[0,0,1,-79,342]");
    auto gens = generators_of(c, 10000);
    REQUIRE(gens.size() == 5);
    const Int x_max = 1000000000;
    std::set<Int> want;
    for (const auto& x : xs(combo_search(c, gens, 2)))
        if (abs(x) <= x_max) want.insert(x);
    ComboStats st;
    auto got = combo_search_modular(c, gens, 2, x_max, {}, &st);
    CHECK(xs(got) == want);
    for (const auto& p : got) CHECK(is_on_curve(c, RationalPoint(Rat(p.x), Rat(p.y))));
    CHECK_THROWS_AS(combo_search_modular(c, gens, 2, x_max, {1000003}), InsufficientModuli);
}

TEST_CASE("inventory of the rank-5 record at a small bound")
{
    auto c = C("[0,0,1,-79,342]");
    auto inv = inventory(c, 100000, 2);
    CHECK(inv.generators.size() == 5);
    CHECK(inv.I() >= inv.from_sieve);
    CHECK(inv.from_sieve == sieve_search(c, 100000).size());
    std::set<Int> seen;
    for (const auto& p : inv.points) {
        CHECK(x_has_point(c, p.x));
        CHECK(seen.insert(p.x).second);
    }
}

TEST_CASE("canonical representative")
{
    auto c = C("[1,0,0,-22,219]");
    for (const auto& p : sieve_search_naive(c, 2000)) {
        IntegralPoint neg{p.x, -p.y - c.a1() * p.x - c.a3()};
        CHECK(canonical_representative(c, neg) == p);
        CHECK(canonical_representative(c, p) == p);
    }
}
