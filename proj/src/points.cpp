#include "rankforge/points.hpp"

#include "rankforge/errors.hpp"
#include "rankforge/factor.hpp"
#include "rankforge/heights.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

namespace rankforge {

namespace {

struct Cubic {
    Int b2, b4, b6;
    Int eval(const Int& x) const { return ((4 * x + b2) * x + 2 * b4) * x + b6; }
};

Cubic cubic_of(const WeierstrassCurve& c)
{
    BInvariants b = b_invariants(c);
    return {b.b2, b.b4, b.b6};
}

// y from x when D(x) = s^2: y = (s - a1 x - a3) / 2.
IntegralPoint point_from_root(const WeierstrassCurve& c, const Int& x, const Int& s)
{
    Int y = s - c.a1() * x - c.a3();
    y /= 2;
    return {x, y};
}

// Leftmost real root of D, floored with a safety margin, as long double.
long double leftmost_root(const Cubic& d)
{
    const long double b2 = d.b2.get_d(), b4 = d.b4.get_d(), b6 = d.b6.get_d();
    auto f = [&](long double x) { return ((4 * x + b2) * x + 2 * b4) * x + b6; };
    const long double cauchy = 1 + std::max({std::fabs(b2) / 4, std::fabs(b4) / 2, std::fabs(b6) / 4});
    long double lo = -cauchy, hi = cauchy;
    // D' = 12x^2 + 2 b2 x + 2 b4
    const long double disc = 4 * b2 * b2 - 96 * b4;
    if (disc > 0) {
        const long double c1 = (-2 * b2 - std::sqrt(disc)) / 24, c2 = (-2 * b2 + std::sqrt(disc)) / 24;
        if (f(c1) >= 0)
            hi = c1;
        else
            lo = c2;
    }
    for (int i = 0; i < 200; ++i) {
        long double mid = (lo + hi) / 2;
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return lo;
}

// Second-stage residue tests; record curves pass the fixed moduli unusually often.
constexpr std::array<unsigned, 10> kSecondary{17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

struct Filter {
    std::vector<std::uint32_t> residues;
    std::array<std::vector<char>, kSecondary.size()> secondary;
    std::int64_t x_lo = 0;
    bool fast = false; // __int128 evaluation is exact
    __int128 b2 = 0, b4 = 0, b6 = 0;
};

Filter make_filter(const WeierstrassCurve& curve, std::int64_t X)
{
    if (X < 1) throw DomainError("x bound must be at least 1");
    Filter f;
    Cubic d = cubic_of(curve);
    f.residues = sieve_residues(curve);
    for (std::size_t k = 0; k < kSecondary.size(); ++k) {
        const long m = kSecondary[k];
        std::vector<char> sq(static_cast<std::size_t>(m), 0);
        for (long i = 0; i < m; ++i) sq[static_cast<std::size_t>(i * i % m)] = 1;
        const long b2 = mod_ui(d.b2, m), b4 = mod_ui(d.b4, m), b6 = mod_ui(d.b6, m);
        f.secondary[k].resize(static_cast<std::size_t>(m));
        for (long x = 0; x < m; ++x)
            f.secondary[k][static_cast<std::size_t>(x)] = sq[static_cast<std::size_t>((((4 * x + b2) % m * x + 2 * b4) % m * x + b6) % m)];
    }
    long double r1 = leftmost_root(d);
    long double start = std::floor(r1) - 2 - std::fabs(r1) * 1e-12L;
    f.x_lo = start < static_cast<long double>(-X) ? -X : static_cast<std::int64_t>(start);
    f.fast = X <= (std::int64_t{1} << 40) && fits_int64(d.b2) && fits_int64(d.b4) && fits_int64(d.b6) &&
             std::abs(to_int64(d.b4)) < (std::int64_t{1} << 50);
    if (f.fast) {
        f.b2 = to_int64(d.b2);
        f.b4 = to_int64(d.b4);
        f.b6 = to_int64(d.b6);
    }
    return f;
}

void check_x(const WeierstrassCurve& curve, const Filter& f, std::int64_t x, std::vector<IntegralPoint>& out)
{
    if (f.fast) {
        const __int128 X = x;
        const __int128 v = ((4 * X + f.b2) * X + 2 * f.b4) * X + f.b6;
        __int128 s;
        if (is_square_i128(v, s)) out.push_back(point_from_root(curve, from_int64(x), from_int128(s)));
        return;
    }
    Int xi = from_int64(x);
    Int v = ((4 * xi + curve.a1() * curve.a1() + 4 * curve.a2()) * xi +
             2 * (curve.a1() * curve.a3() + 2 * curve.a4())) * xi + curve.a3() * curve.a3() + 4 * curve.a6();
    Int s;
    if (is_square(v, s)) out.push_back(point_from_root(curve, xi, s));
}

// Scan residue blocks [blk_lo, blk_hi) of width kSieveModulus.
void scan_blocks(const WeierstrassCurve& curve, const Filter& f, std::int64_t X, std::int64_t blk_lo,
                 std::int64_t blk_hi, std::vector<IntegralPoint>& out, std::uint64_t& checks)
{
    const auto M = static_cast<std::int64_t>(kSieveModulus);
    for (std::int64_t b = blk_lo; b < blk_hi; ++b) {
        const std::int64_t base = b * M;
        for (std::uint32_t r : f.residues) {
            const std::int64_t x = base + r;
            if (x < f.x_lo) continue;
            if (x > X) break;
            bool pass = true;
            for (std::size_t k = 0; pass && k < kSecondary.size(); ++k)
                pass = f.secondary[k][static_cast<std::size_t>(pos_mod(x, kSecondary[k]))];
            if (!pass) continue;
            ++checks;
            check_x(curve, f, x, out);
        }
    }
}

void finish(std::vector<IntegralPoint>& pts)
{
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
}

} // namespace

IntegralPoint canonical_representative(const WeierstrassCurve& curve, const IntegralPoint& p)
{
    Int t = 2 * p.y + curve.a1() * p.x + curve.a3();
    if (t >= 0) return p;
    return {p.x, -p.y - curve.a1() * p.x - curve.a3()};
}

std::vector<std::uint32_t> sieve_residues(const WeierstrassCurve& curve)
{
    Cubic d = cubic_of(curve);
    constexpr std::array<unsigned, 4> mods{64, 63, 65, 11};
    std::array<std::vector<char>, 4> ok;
    for (std::size_t k = 0; k < mods.size(); ++k) {
        const unsigned m = mods[k];
        std::vector<char> sq(m, 0);
        for (unsigned i = 0; i < m; ++i) sq[(i * i) % m] = 1;
        const long b2 = mod_ui(d.b2, m), b4 = mod_ui(d.b4, m), b6 = mod_ui(d.b6, m);
        ok[k].assign(m, 0);
        for (long x = 0; x < static_cast<long>(m); ++x) {
            long v = (((4 * x + b2) % m * x + 2 * b4) % m * x + b6) % m;
            ok[k][static_cast<std::size_t>(x)] = sq[static_cast<std::size_t>(v)];
        }
    }
    std::vector<std::uint32_t> out;
    for (std::uint32_t x = 0; x < kSieveModulus; ++x)
        if (ok[0][x % 64] && ok[1][x % 63] && ok[2][x % 65] && ok[3][x % 11]) out.push_back(x);
    return out;
}

std::vector<IntegralPoint> sieve_search_naive(const WeierstrassCurve& curve, std::int64_t X)
{
    if (X < 1) throw DomainError("x bound must be at least 1");
    Cubic d = cubic_of(curve);
    std::vector<IntegralPoint> out;
    for (std::int64_t x = -X; x <= X; ++x) {
        Int xi = from_int64(x), s;
        if (is_square(d.eval(xi), s)) out.push_back(point_from_root(curve, xi, s));
    }
    return out;
}

std::vector<IntegralPoint> sieve_search_serial(const WeierstrassCurve& curve, std::int64_t X, SieveStats* stats)
{
    Filter f = make_filter(curve, X);
    const auto M = static_cast<std::int64_t>(kSieveModulus);
    std::vector<IntegralPoint> out;
    std::uint64_t checks = 0;
    scan_blocks(curve, f, X, floor_div(f.x_lo, M), floor_div(X, M) + 1, out, checks);
    finish(out);
    if (stats) {
        stats->scanned += static_cast<std::uint64_t>(X - f.x_lo + 1);
        stats->exact_checks += checks;
    }
    return out;
}

std::vector<IntegralPoint> sieve_search_parallel(const WeierstrassCurve& curve, std::int64_t X, SieveStats* stats)
{
    Filter f = make_filter(curve, X);
    const auto M = static_cast<std::int64_t>(kSieveModulus);
    const std::int64_t lo = floor_div(f.x_lo, M), hi = floor_div(X, M) + 1;
    std::vector<IntegralPoint> out;
    std::uint64_t checks = 0;
#pragma omp parallel
    {
        std::vector<IntegralPoint> local;
        std::uint64_t local_checks = 0;
#pragma omp for schedule(dynamic, 8) nowait
        for (std::int64_t b = lo; b < hi; ++b) scan_blocks(curve, f, X, b, b + 1, local, local_checks);
#pragma omp critical
        {
            out.insert(out.end(), local.begin(), local.end());
            checks += local_checks;
        }
    }
    finish(out);
    if (stats) {
        stats->scanned += static_cast<std::uint64_t>(X - f.x_lo + 1);
        stats->exact_checks += checks;
    }
    return out;
}

std::uint64_t combination_count(unsigned r, unsigned m)
{
    std::uint64_t total = 1;
    for (unsigned i = 0; i < r; ++i) total *= 2 * static_cast<std::uint64_t>(m) + 1;
    return (total - 1) / 2;
}

namespace {

// Enumerates coefficient vectors (n_{r-1}, ..., n_0) with |n_i| <= m, first
// nonzero entry positive, optionally inside the ellipsoid n^T G n <= bound.
// Visit(depth, index, coefficient) is called on entering each node and may
// return false to skip the subtree; leaf(n) is called for nonzero vectors.
class LatticeWalker {
public:
    LatticeWalker(unsigned r, unsigned m, const GramMatrix* g, double bound) : r_(r), m_(static_cast<long>(m)), bound_(bound)
    {
        if (g) {
            // q(n) = sum_i d_i (n_i + sum_{j>i} mu_ij n_j)^2 from an LDL^T of the reversed matrix.
            q_.assign(r, std::vector<double>(r, 0.0));
            Eigen::MatrixXd a = *g;
            for (unsigned i = 0; i < r; ++i) {
                for (unsigned j = i; j < r; ++j) {
                    double v = a(i, j);
                    for (unsigned k = 0; k < i; ++k) v -= q_[k][i] * q_[k][j] * q_[k][k];
                    if (j == i)
                        q_[i][i] = v;
                    else
                        q_[i][j] = v / q_[i][i];
                }
            }
            for (unsigned i = 0; i < r; ++i)
                if (!(q_[i][i] > 0)) throw PrecisionFailure("generator Gram matrix is not positive definite");
            pruned_ = true;
        }
    }

    template <class Enter, class Leaf>
    void walk_top(long top, Enter&& enter, Leaf&& leaf) const
    {
        std::vector<long> n(r_, 0);
        std::vector<double> partial(r_ + 1, 0.0);
        const unsigned i = r_ - 1;
        if (!admit(i, top, n, partial)) return;
        n[i] = top;
        if (!enter(i, top)) return;
        if (i == 0) {
            if (top != 0) leaf(n);
            return;
        }
        recurse(i - 1, top != 0, n, partial, enter, leaf);
    }

    long top_values() const { return m_ + 1; } // 0..m for the first coordinate

private:
    bool admit(unsigned i, long v, std::vector<long>& n, std::vector<double>& partial) const
    {
        if (!pruned_) return true;
        double c = v;
        for (unsigned j = i + 1; j < r_; ++j) c += q_[i][j] * static_cast<double>(n[j]);
        double p = partial[i + 1] + q_[i][i] * c * c;
        if (p > bound_) return false;
        partial[i] = p;
        return true;
    }

    template <class Enter, class Leaf>
    void recurse(unsigned i, bool seen_nonzero, std::vector<long>& n, std::vector<double>& partial, Enter& enter,
                 Leaf& leaf) const
    {
        for (long v = seen_nonzero ? -m_ : 0; v <= m_; ++v) {
            if (!admit(i, v, n, partial)) continue;
            n[i] = v;
            if (!enter(i, v)) continue;
            const bool nz = seen_nonzero || v != 0;
            if (i == 0) {
                if (nz) leaf(n);
            } else {
                recurse(i - 1, nz, n, partial, enter, leaf);
            }
        }
        n[i] = 0;
    }

    unsigned r_;
    long m_;
    double bound_;
    bool pruned_ = false;
    std::vector<std::vector<double>> q_;
};

// Multiples -m..m of each generator; index [i][k + m].
std::vector<std::vector<RationalPoint>> multiples(const WeierstrassCurve& curve, const std::vector<RationalPoint>& g,
                                                  long m)
{
    std::vector<std::vector<RationalPoint>> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        out[i].resize(static_cast<std::size_t>(2 * m + 1));
        out[i][static_cast<std::size_t>(m)] = RationalPoint::identity();
        for (long k = 1; k <= m; ++k) {
            RationalPoint p = detail::add_unchecked(curve, out[i][static_cast<std::size_t>(m + k - 1)], g[i]);
            out[i][static_cast<std::size_t>(m + k)] = p;
            out[i][static_cast<std::size_t>(m - k)] = point_negate(curve, p);
        }
    }
    return out;
}

bool integral_candidate(const RationalPoint& p)
{
    return !p.infinity && p.x.get_den() == 1 && p.y.get_den() == 1;
}

// Upper bound for the canonical height of an integral point with |x| <= x_bound:
// non-archimedean terms are nonpositive, so the archimedean height bounds it.
double integral_height_bound(const HeightContext& ctx, const Int& x_bound)
{
    BInvariants b = b_invariants(ctx.curve());
    const long double r1 = leftmost_root({b.b2, b.b4, b.b6});
    const long double top = x_bound.get_d();
    long double best = 0;
    auto probe = [&](long double x) {
        Rat q(static_cast<double>(x));
        if (x < r1) return;
        const long double v = ((4 * x + b.b2.get_d()) * x + 2 * b.b4.get_d()) * x + b.b6.get_d();
        if (v < 0) return;
        best = std::max(best, ctx.archimedean(q));
    };
    const long double span = std::max<long double>(16, std::fabs(r1) * 2);
    for (int i = 0; i <= 400; ++i) probe(r1 + span * i / 400);
    for (int i = 0; i <= 400; ++i) probe(std::exp(std::log(span) + (std::log(std::max(top, span)) - std::log(span)) * i / 400));
    for (int i = 0; i <= 400; ++i) probe(-std::exp(std::log(std::fabs(r1) + 1) * i / 400));
    best = std::max(best, static_cast<long double>(std::log(std::max(top, 1.0L))));
    return static_cast<double>(best) + 1.0;
}

void merge_point(const WeierstrassCurve& curve, const RationalPoint& p, std::vector<IntegralPoint>& out)
{
    out.push_back(canonical_representative(curve, {p.x.get_num(), p.y.get_num()}));
}

} // namespace

std::vector<IntegralPoint> combo_search(const WeierstrassCurve& curve, const std::vector<RationalPoint>& gens,
                                        unsigned m, std::optional<Int> x_bound, ComboStats* stats)
{
    std::vector<IntegralPoint> out;
    const auto r = static_cast<unsigned>(gens.size());
    if (r == 0 || m == 0) return out;
    for (const auto& g : gens)
        if (!is_on_curve(curve, g)) throw PointNotOnCurve("generator " + g.to_string() + " not on curve");

    GramMatrix g;
    double bound = 0;
    if (x_bound) {
        HeightContext ctx(curve);
        g = gram(ctx, gens);
        bound = integral_height_bound(ctx, *x_bound);
    }
    LatticeWalker walker(r, m, x_bound ? &g : nullptr, bound);
    const auto mult = multiples(curve, gens, static_cast<long>(m));
    const long mm = static_cast<long>(m);
    std::uint64_t evaluated = 0;

#pragma omp parallel
    {
        std::vector<IntegralPoint> local;
        std::uint64_t local_eval = 0;
        std::vector<RationalPoint> sums(r + 1);
#pragma omp for schedule(dynamic, 1) nowait
        for (long top = 0; top < walker.top_values(); ++top) {
            sums[r] = RationalPoint::identity();
            auto enter = [&](unsigned i, long v) {
                const RationalPoint& k = mult[i][static_cast<std::size_t>(v + mm)];
                sums[i] = v == 0 ? sums[i + 1] : detail::add_unchecked(curve, sums[i + 1], k);
                return true;
            };
            auto leaf = [&](const std::vector<long>&) {
                ++local_eval;
                const RationalPoint& p = sums[0];
                if (!integral_candidate(p)) return;
                if (x_bound && abs(p.x.get_num()) > *x_bound) return;
                merge_point(curve, p, local);
            };
            walker.walk_top(top, enter, leaf);
        }
#pragma omp critical
        {
            out.insert(out.end(), local.begin(), local.end());
            evaluated += local_eval;
        }
    }
    finish(out);
    if (stats) {
        stats->combinations += combination_count(r, m);
        stats->evaluated += evaluated;
    }
    return out;
}

namespace {

struct ModPoint {
    bool inf = true;
    std::uint64_t x = 0, y = 0;
};

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t p)
{
    std::int64_t t = 0, nt = 1, r = static_cast<std::int64_t>(p), nr = static_cast<std::int64_t>(a);
    while (nr != 0) {
        std::int64_t q = r / nr;
        std::tie(t, nt) = std::make_pair(nt, t - q * nt);
        std::tie(r, nr) = std::make_pair(nr, r - q * nr);
    }
    return static_cast<std::uint64_t>(t < 0 ? t + static_cast<std::int64_t>(p) : t);
}

struct ModCurve {
    std::uint64_t p, a1, a2, a3, a4, a6;

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return (a + b) % p; }
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return (a + p - b) % p; }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return mulmod(a, b, p); }
    std::uint64_t negm(std::uint64_t a) const { return a ? p - a : 0; }

    ModPoint sum(const ModPoint& P, const ModPoint& Q) const
    {
        if (P.inf) return Q;
        if (Q.inf) return P;
        std::uint64_t lam, nu;
        if (P.x == Q.x) {
            // P = -Q when y1 + y2 + a1 x + a3 = 0.
            if (add(add(P.y, Q.y), add(mul(a1, Q.x), a3)) == 0) return {};
            std::uint64_t num = add(add(mul(3, mul(P.x, P.x)), mul(2, mul(a2, P.x))), sub(a4, mul(a1, P.y)));
            std::uint64_t den = add(add(mul(2, P.y), mul(a1, P.x)), a3);
            lam = mul(num, invmod(den, p));
        } else {
            lam = mul(sub(Q.y, P.y), invmod(sub(Q.x, P.x), p));
        }
        nu = sub(P.y, mul(lam, P.x));
        std::uint64_t x3 = sub(sub(sub(add(mul(lam, lam), mul(a1, lam)), a2), P.x), Q.x);
        std::uint64_t y3 = sub(sub(negm(mul(add(lam, a1), x3)), nu), a3);
        return {false, x3, y3};
    }

    ModPoint neg(const ModPoint& P) const
    {
        if (P.inf) return P;
        return {false, P.x, sub(sub(negm(P.y), mul(a1, P.x)), a3)};
    }
};

std::uint64_t reduce(const Rat& q, std::uint64_t p)
{
    std::uint64_t n = static_cast<std::uint64_t>(mod_ui(q.get_num(), p));
    std::uint64_t d = static_cast<std::uint64_t>(mod_ui(q.get_den(), p));
    return mulmod(n, invmod(d, p), p);
}

bool good_prime(const Int& disc, const std::vector<RationalPoint>& gens, std::uint64_t p)
{
    if (p < 5) return false;
    if (mod_ui(disc, p) == 0) return false;
    for (const auto& g : gens)
        if (mod_ui(g.x.get_den(), p) == 0) return false;
    return true;
}

RationalPoint exact_combination(const WeierstrassCurve& curve, const std::vector<RationalPoint>& gens,
                                const std::vector<long>& n)
{
    RationalPoint acc = RationalPoint::identity();
    for (std::size_t i = 0; i < gens.size(); ++i)
        if (n[i] != 0) acc = detail::add_unchecked(curve, acc, point_mul(curve, n[i], gens[i]));
    return acc;
}

} // namespace

std::vector<IntegralPoint> combo_search_modular(const WeierstrassCurve& curve, const std::vector<RationalPoint>& gens,
                                                unsigned m, const Int& x_max, std::vector<std::uint64_t> primes,
                                                ComboStats* stats)
{
    std::vector<IntegralPoint> out;
    const auto r = static_cast<unsigned>(gens.size());
    const Int disc = curve.discriminant();
    const Int need = 2 * x_max;
    if (primes.empty()) {
        Int prod = 1;
        for (std::uint64_t p = (std::uint64_t{1} << 31) - 1; prod <= need && p > 5; p -= 2)
            if (is_probable_prime(Int(static_cast<unsigned long>(p))) && good_prime(disc, gens, p)) {
                primes.push_back(p);
                prod *= static_cast<unsigned long>(p);
            }
    } else {
        for (auto p : primes) {
            if (p >= (std::uint64_t{1} << 31) || !is_probable_prime(Int(static_cast<unsigned long>(p))))
                throw DomainError("modulus " + std::to_string(p) + " is not a prime below 2^31");
            if (!good_prime(disc, gens, p))
                throw DomainError("prime " + std::to_string(p) + " has bad reduction or divides a generator");
        }
    }
    Int P = 1;
    for (auto p : primes) P *= static_cast<unsigned long>(p);
    if (P <= need) throw InsufficientModuli("product of moduli " + to_string(P) + " does not exceed 2*X_max");
    if (r == 0 || m == 0) return out;

    const std::size_t k = primes.size();
    std::vector<ModCurve> curves;
    std::vector<Int> crt(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::uint64_t p = primes[j];
        auto red = [&](const Int& a) { return static_cast<std::uint64_t>(mod_ui(a, p)); };
        curves.push_back({p, red(curve.a1()), red(curve.a2()), red(curve.a3()), red(curve.a4()), red(curve.a6())});
        Int Pj = P / static_cast<unsigned long>(p);
        crt[j] = Pj * inv_mod(Pj, Int(static_cast<unsigned long>(p)));
    }
    // Multiples of generators in each reduction: [j][i][v + m].
    const long mm = static_cast<long>(m);
    std::vector<std::vector<std::vector<ModPoint>>> mult(k, std::vector<std::vector<ModPoint>>(r));
    for (std::size_t j = 0; j < k; ++j)
        for (unsigned i = 0; i < r; ++i) {
            auto& row = mult[j][i];
            row.assign(static_cast<std::size_t>(2 * mm + 1), ModPoint{});
            ModPoint g{false, reduce(gens[i].x, primes[j]), reduce(gens[i].y, primes[j])};
            for (long v = 1; v <= mm; ++v) {
                row[static_cast<std::size_t>(mm + v)] = curves[j].sum(row[static_cast<std::size_t>(mm + v - 1)], g);
                row[static_cast<std::size_t>(mm - v)] = curves[j].neg(row[static_cast<std::size_t>(mm + v)]);
            }
        }
    const Int half = P / 2;
    const Cubic d = cubic_of(curve);

    LatticeWalker walker(r, m, nullptr, 0.0);
    std::uint64_t rechecks = 0, evaluated = 0;
#pragma omp parallel
    {
        std::vector<IntegralPoint> local;
        std::uint64_t local_rechecks = 0, local_eval = 0;
        std::vector<std::vector<ModPoint>> sums(k, std::vector<ModPoint>(r + 1));
        Int x;
#pragma omp for schedule(dynamic, 1) nowait
        for (long top = 0; top < walker.top_values(); ++top) {
            auto enter = [&](unsigned i, long v) {
                for (std::size_t j = 0; j < k; ++j)
                    sums[j][i] = v == 0 ? sums[j][i + 1]
                                        : curves[j].sum(sums[j][i + 1], mult[j][i][static_cast<std::size_t>(v + mm)]);
                return true;
            };
            auto leaf = [&](const std::vector<long>& n) {
                ++local_eval;
                bool at_infinity = false;
                for (std::size_t j = 0; j < k; ++j) at_infinity |= sums[j][0].inf;
                if (at_infinity) {
                    // Reduction hit O: the combination is non-integral or torsion; confirm exactly.
                    ++local_rechecks;
                    RationalPoint q = exact_combination(curve, gens, n);
                    if (integral_candidate(q) && abs(q.x.get_num()) <= x_max) merge_point(curve, q, local);
                    return;
                }
                x = 0;
                for (std::size_t j = 0; j < k; ++j) x += crt[j] * static_cast<unsigned long>(sums[j][0].x);
                x %= P;
                if (x > half) x -= P;
                if (abs(x) > x_max) return;
                Int s;
                if (!is_square(d.eval(x), s)) return;
                ++local_rechecks;
                RationalPoint q = exact_combination(curve, gens, n);
                if (integral_candidate(q) && q.x == x) merge_point(curve, q, local);
            };
            for (std::size_t j = 0; j < k; ++j) sums[j][r] = ModPoint{};
            walker.walk_top(top, enter, leaf);
        }
#pragma omp critical
        {
            out.insert(out.end(), local.begin(), local.end());
            rechecks += local_rechecks;
            evaluated += local_eval;
        }
    }
    finish(out);
    if (stats) {
        stats->combinations += combination_count(r, m);
        stats->evaluated += evaluated;
        stats->exact_rechecks += rechecks;
    }
    return out;
}

std::vector<RationalPoint> PointInventory::rational_points() const
{
    std::vector<RationalPoint> out;
    out.reserve(points.size());
    for (const auto& p : points) out.emplace_back(Rat(p.x), Rat(p.y));
    return out;
}

PointInventory inventory(const WeierstrassCurve& curve, std::int64_t X, unsigned m, const InventoryOptions& options)
{
    PointInventory inv(curve);
    inv.x_bound = X;
    inv.m = m;
    std::map<Int, IntegralPoint> by_x;
    for (const auto& p : sieve_search(curve, X)) by_x.emplace(p.x, canonical_representative(curve, p));
    inv.from_sieve = by_x.size();

    for (unsigned round = 0; round < options.rounds && !by_x.empty(); ++round) {
        std::vector<RationalPoint> pts;
        for (const auto& [x, p] : by_x) pts.emplace_back(Rat(p.x), Rat(p.y));
        BasisSelection sel;
        try {
            sel = select_basis(curve, pts);
        } catch (const GenerationFailure&) {
            BasisOptions loose;
            loose.require_generation = false;
            sel = select_basis(curve, pts, loose);
        }
        inv.generators = sel.basis;
        if (sel.basis.empty() || m == 0) break;
        std::vector<IntegralPoint> found;
        if (combination_count(static_cast<unsigned>(sel.basis.size()), m) <= options.max_exact_combinations)
            found = combo_search(curve, sel.basis, m);
        else
            found = combo_search(curve, sel.basis, m, ipow(Int(10), 40));
        std::size_t before = by_x.size();
        for (const auto& p : found) by_x.emplace(p.x, p);
        if (by_x.size() == before) break;
    }
    for (auto& [x, p] : by_x) inv.points.push_back(p);
    inv.from_combinations = inv.points.size() - inv.from_sieve;
    return inv;
}

} // namespace rankforge
