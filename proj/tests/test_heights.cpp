#include "doctest.h"

#include "rankforge/errors.hpp"
#include "rankforge/heights.hpp"
#include "rankforge/points.hpp"

#include <cmath>

using namespace rankforge;

namespace {

WeierstrassCurve C(const char* s) { return WeierstrassCurve::parse(s); }

double log_abs(const Int& n)
{
    long e = 0;
    const double m = mpz_get_d_2exp(&e, n.get_mpz_t());
    return std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0);
}

// log max(|num x|, |den x|) of 2^n P, divided by 4^n; written out here
// so the check does not depend on height_by_doubling.
double doubling_limit(const WeierstrassCurve& c, RationalPoint p, unsigned n)
{
    for (unsigned i = 0; i < n; ++i) p = point_add(c, p, p);
    if (p.infinity) return 0.0;
    const Int num = abs(p.x.get_num()), den = p.x.get_den();
    return log_abs(num > den ? num : den) / std::pow(4.0, n);
}

std::vector<RationalPoint> sieve_points(const WeierstrassCurve& c, std::int64_t X)
{
    std::vector<RationalPoint> out;
    for (const auto& p : sieve_search(c, X)) out.emplace_back(Rat(p.x), Rat(p.y));
    return out;
}

} // namespace

TEST_CASE("37a reference height")
{
    auto c = C("[0,0,1,-1,0]");
    RationalPoint P(0, 0);
    const double h = static_cast<double>(canonical_height(c, P));
    CHECK(h == doctest::Approx(0.0511114082).epsilon(1e-8));
    CHECK(std::fabs(h - doubling_limit(c, P, 8)) < 2e-4);
    CHECK(canonical_height(c, RationalPoint()) == 0);
    const long double eps = 1e-8L;
    CHECK(std::fabs(canonical_height(c, point_mul(c, 2, P)) - 4 * canonical_height(c, P)) < 4 * eps);
}

TEST_CASE("heights against the doubling limit")
{
    for (const char* s : {"[0,1,1,-2,0]", "[0,0,1,-79,342]", "[1,1,0,-2582,48720]", "[0,0,1,-7,6]", "[1,-1,0,-79,289]"}) {
        auto c = C(s);
        CAPTURE(s);
        auto pts = sieve_points(c, 200);
        REQUIRE(!pts.empty());
        const RationalPoint P = pts.back();
        const double h = static_cast<double>(canonical_height(c, P));
        CHECK(std::fabs(h - doubling_limit(c, P, 7)) < 5e-3);
        // A non-integral point exercises the non-archimedean terms.
        auto Q = point_add(c, P, point_mul(c, 3, P));
        CHECK(static_cast<double>(canonical_height(c, Q)) == doctest::Approx(16 * h).epsilon(1e-7));
    }
}

TEST_CASE("height at primes where the point meets the singular locus")
{
    // On [1,1,0,-2582,48720] (|Delta|/N = 6) compare sums of two points.
    auto c = C("[1,1,0,-2582,48720]");
    auto pts = sieve_points(c, 2000);
    REQUIRE(pts.size() >= 4);
    for (std::size_t i = 0; i + 1 < 4; ++i) {
        auto S = point_add(c, pts[i], pts[i + 1]);
        if (S.infinity) continue;
        const double h = static_cast<double>(canonical_height(c, S));
        CHECK(std::fabs(h - doubling_limit(c, S, 6)) < 2e-2);
    }
}

TEST_CASE("non-minimal model rejected")
{
    CHECK_THROWS_AS(HeightContext(C("[0,0,8,-16,0]")), DomainError);
}

TEST_CASE("gram matrices")
{
    auto tors = C("[0,0,0,0,1]");
    auto g = gram(tors, {RationalPoint(2, 3)});
    CHECK(g.rows() == 1);
    CHECK(std::fabs(g(0, 0)) < 1e-8);

    auto c = C("[0,1,1,-2,0]");
    RationalPoint P(0, 0), Q(-1, 1);
    g = gram(c, {P, point_negate(c, P)});
    CHECK(std::fabs(g.determinant()) < 1e-8);

    g = gram(c, {P, Q});
    CHECK(g.determinant() > 0);
    CHECK(g.determinant() == doctest::Approx(0.152460177943144).epsilon(1e-7));
    // Independent evaluation via the doubling limit and the polarization identity.
    const double hP = doubling_limit(c, P, 7), hQ = doubling_limit(c, Q, 7);
    const double hPQ = doubling_limit(c, point_add(c, P, Q), 7);
    const double pq = 0.5 * (hPQ - hP - hQ);
    CHECK(std::fabs((hP * hQ - pq * pq) - g.determinant()) < 2e-3);
    CHECK(min_eigenvalue(g) > 0);
}

TEST_CASE("basis selection")
{
    auto c = C("[0,1,1,-2,0]");
    RationalPoint P(0, 0), Q(-1, 1);
    auto sel = select_basis(c, {P, point_mul(c, 2, P), Q});
    REQUIRE(sel.basis.size() == 2);
    CHECK(((sel.basis[0] == P && sel.basis[1] == Q) || (sel.basis[0] == Q && sel.basis[1] == P)));
    REQUIRE(sel.coordinates.size() == 3);

    auto tors = C("[0,0,0,0,1]");
    auto none = select_basis(tors, {RationalPoint(2, 3), RationalPoint(-1, 0), RationalPoint(0, 1)});
    CHECK(none.basis.empty());
    CHECK(rank_lower_bound(tors, {RationalPoint(2, 3)}).rank == 0);

    // 2P and 3P generate <P> but no single one of them does.
    CHECK_THROWS_AS(select_basis(c, {point_mul(c, 2, P), point_mul(c, 3, P)}), GenerationFailure);
    auto loose = select_basis(c, {point_mul(c, 2, P), point_mul(c, 3, P)}, BasisOptions{1e-8L, 1e-6, 20, false});
    CHECK(loose.basis.size() == 1);
}

TEST_CASE("rank lower bounds")
{
    auto c37 = C("[0,0,1,-1,0]");
    RationalPoint P(0, 0);
    CHECK(rank_lower_bound(c37, {P, point_negate(c37, P)}).rank == 1);

    auto c = C("[0,0,1,-79,342]");
    auto ra = rank_lower_bound(c, sieve_points(c, 10000));
    CHECK(ra.rank == 5);
    CHECK(ra.regulator > 1e-6);
    CHECK(ra.min_eigenvalue > 0);
    CHECK(ra.gram.rows() == 5);
}
