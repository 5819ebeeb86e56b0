#include "rankforge/heights.hpp"

#include "rankforge/errors.hpp"
#include "rankforge/factor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rankforge {

namespace {

long double to_ld(const Int& n)
{
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
    return std::ldexp(static_cast<long double>(mant), static_cast<int>(exp));
}

long double to_ld(const Rat& q) { return to_ld(q.get_num()) / to_ld(q.get_den()); }

long double log_abs(const Int& n)
{
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
    return std::log(std::fabs(static_cast<long double>(mant))) + static_cast<long double>(exp) * std::log(2.0L);
}

constexpr unsigned kInfiniteValuation = 1u << 30;

// Valuation of a rational known to be p-integral.
unsigned pval(const Rat& q, const Int& p)
{
    if (q == 0) return kInfiniteValuation;
    return valuation(q.get_num(), p);
}

} // namespace

HeightContext::HeightContext(const WeierstrassCurve& curve) : curve_(curve), inv_(full_invariants(curve))
{
    if (!(minimal_model(inv_.c4, inv_.c6) == curve))
        throw DomainError("canonical heights need the global minimal model; got " + curve.to_string());
    b2_ = to_ld(inv_.b2);
    b4_ = to_ld(inv_.b4);
    b6_ = to_ld(inv_.b6);
    b8_ = to_ld(inv_.b8);
    b2p_ = b2_ - 12;
    b4p_ = b4_ - b2_ + 6;
    b6p_ = b6_ - 2 * b4_ + b2_ - 4;
    b8p_ = b8_ - 3 * b6_ + 3 * b4_ - b2_ + 3;
}

long double HeightContext::archimedean(const Rat& xq, long double eps) const
{
    if (!(eps > 0)) throw DomainError("height precision must be positive");
    // Terms are bounded by 4^-n times a modest logarithm; stop well below eps.
    unsigned terms = 8;
    while (std::pow(4.0L, -static_cast<long double>(terms)) * 200.0L > eps && terms < 64) ++terms;
    if (terms >= 64 || eps < 1e-16L) throw PrecisionFailure("archimedean height cannot reach requested precision");

    const long double x = to_ld(xq);
    long double t;
    bool beta;
    if (std::fabs(x) < 0.5L) {
        t = 1 / (x + 1);
        beta = false;
    } else {
        t = 1 / x;
        beta = true;
    }
    long double mu = -std::log(std::fabs(t));
    long double f = 1;
    for (unsigned n = 0; n < terms; ++n) {
        f /= 4;
        long double w, z, zw;
        const long double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        if (beta) {
            w = b6_ * t4 + 2 * b4_ * t3 + b2_ * t2 + 4 * t;
            z = 1 - b4_ * t2 - 2 * b6_ * t3 - b8_ * t4;
            zw = z + w;
        } else {
            w = b6p_ * t4 + 2 * b4p_ * t3 + b2p_ * t2 + 4 * t;
            z = 1 - b4p_ * t2 - 2 * b6p_ * t3 - b8p_ * t4;
            zw = z - w;
        }
        if (std::fabs(w) <= 2 * std::fabs(z)) {
            mu += f * std::log(std::fabs(z));
            t = w / z;
        } else {
            mu += f * std::log(std::fabs(zw));
            t = w / zw;
            beta = !beta;
        }
        if (!std::isfinite(mu) || !std::isfinite(t)) throw PrecisionFailure("archimedean height series diverged");
    }
    return mu;
}

long double HeightContext::non_archimedean(const RationalPoint& pt) const
{
    const Int& den = pt.x.get_den();
    long double total = log_abs(den); // log of the x-denominator
    const Int &a1 = curve_.a1(), &a2 = curve_.a2(), &a3 = curve_.a3(), &a4 = curve_.a4();
    const Rat &x = pt.x, &y = pt.y;
    Rat A = 3 * x * x + 2 * a2 * x + a4 - a1 * y;
    Rat B = 2 * y + a1 * x + a3;

    // Primes of bad reduction where P reduces to the singular point divide
    // both numerators and the discriminant.
    Int g = gcd(inv_.delta, A.get_num());
    g = gcd(g, B.get_num());
    for (Int c = gcd(g, den); c > 1; c = gcd(g, den)) g /= c;
    g = abs(g);
    if (g <= 1) return total;

    Factorization f;
    try {
        f = factor(g);
    } catch (const IncompleteFactorization&) {
        throw PrecisionFailure("cannot factor local height support " + to_string(g));
    }
    Rat C = 3 * x * x * x * x + inv_.b2 * x * x * x + 3 * inv_.b4 * x * x + 3 * inv_.b6 * x + inv_.b8;
    const bool c4_zero = inv_.c4 == 0;
    for (const auto& pp : f.factors) {
        const Int& p = pp.p;
        const long double N = valuation(inv_.delta, p);
        const unsigned va = pval(A, p), vb = pval(B, p);
        if (va == 0 || vb == 0) continue;
        long double lam;
        if (!c4_zero && valuation(inv_.c4, p) == 0) {
            long double M = std::min<long double>(vb, N / 2);
            lam = M * (M - N) / N;
        } else {
            unsigned vc = pval(C, p);
            if (vb < kInfiniteValuation && vc >= 3 * static_cast<unsigned long>(vb))
                lam = -2.0L * vb / 3;
            else
                lam = -static_cast<long double>(vc) / 4;
        }
        total += lam * log_abs(p);
    }
    return total;
}

long double HeightContext::height(const RationalPoint& p, long double eps) const
{
    if (p.infinity) return 0;
    if (!is_on_curve(curve_, p)) throw PointNotOnCurve("point " + p.to_string() + " not on " + curve_.to_string());
    long double h = archimedean(p.x, eps) + non_archimedean(p);
    return h < 0 && h > -10 * eps ? 0 : h;
}

long double canonical_height(const WeierstrassCurve& curve, const RationalPoint& p, long double eps)
{
    return HeightContext(curve).height(p, eps);
}

long double height_by_doubling(const WeierstrassCurve& curve, const RationalPoint& p, unsigned n)
{
    RationalPoint q = p;
    for (unsigned i = 0; i < n; ++i) {
        q = detail::add_unchecked(curve, q, q);
        if (q.infinity) return 0;
    }
    long double naive = std::max(log_abs(q.x.get_num() == 0 ? Int(1) : Int(abs(q.x.get_num()))),
                                 log_abs(q.x.get_den()));
    return naive / std::pow(4.0L, static_cast<long double>(n));
}

GramMatrix gram(const HeightContext& ctx, const std::vector<RationalPoint>& pts, long double eps)
{
    const std::size_t n = pts.size();
    std::vector<long double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = ctx.height(pts[i], eps);
    GramMatrix g(n, n);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < n; ++i) {
        g(i, i) = static_cast<double>(h[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            RationalPoint s = detail::add_unchecked(ctx.curve(), pts[i], pts[j]);
            long double v = (ctx.height(s, eps) - h[i] - h[j]) / 2;
            g(i, j) = g(j, i) = static_cast<double>(v);
        }
    }
    return g;
}

GramMatrix gram(const WeierstrassCurve& curve, const std::vector<RationalPoint>& pts, long double eps)
{
    return gram(HeightContext(curve), pts, eps);
}

double min_eigenvalue(const GramMatrix& g)
{
    if (g.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<GramMatrix> es(g, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

// Exact check that q - sum n_i b_i is torsion.
bool decomposition_holds(const WeierstrassCurve& curve, const std::vector<RationalPoint>& basis,
                         const std::vector<long>& n, const RationalPoint& q)
{
    RationalPoint acc = q;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (n[i] == 0) continue;
        acc = detail::add_unchecked(curve, acc, point_mul(curve, -n[i], basis[i]));
    }
    return acc.infinity || torsion_order(curve, acc) != 0;
}

struct Coords {
    bool integral = true;
    std::vector<long> n;
    Eigen::VectorXd c;
};

Coords coordinates_in(const GramMatrix& gb, const Eigen::VectorXd& v)
{
    Coords out;
    out.c = gb.ldlt().solve(v);
    out.n.resize(out.c.size());
    for (Eigen::Index i = 0; i < out.c.size(); ++i) {
        double r = std::round(out.c(i));
        out.n[i] = static_cast<long>(r);
        if (std::fabs(out.c(i) - r) > 1e-3) out.integral = false;
    }
    return out;
}

// Smallest d <= 1000 making every entry of d*c near-integral, or 0.
long common_denominator(const Eigen::VectorXd& c)
{
    for (long d = 1; d <= 1000; ++d) {
        bool ok = true;
        for (Eigen::Index i = 0; i < c.size() && ok; ++i)
            ok = std::fabs(d * c(i) - std::round(d * c(i))) < 1e-3 * d;
        if (ok) return d;
    }
    return 0;
}

long integer_det(std::vector<std::vector<long>> m)
{
    // Bareiss fraction-free elimination.
    const std::size_t n = m.size();
    if (n == 0) return 1;
    long sign = 1;
    __int128 prev = 1;
    std::vector<std::vector<__int128>> a(n, std::vector<__int128>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j];
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t s = k + 1;
            while (s < n && a[s][k] == 0) ++s;
            if (s == n) return 0;
            std::swap(a[s], a[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * static_cast<long>(a[n - 1][n - 1]);
}

} // namespace

BasisSelection select_basis(const WeierstrassCurve& curve, const std::vector<RationalPoint>& points,
                            const BasisOptions& opt)
{
    HeightContext ctx(curve);
    BasisSelection out;
    const std::size_t n = points.size();
    out.coordinates.assign(n, {});

    std::vector<std::size_t> free_idx;
    std::vector<long double> hts(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (points[i].infinity || torsion_order(curve, points[i]) != 0) continue;
        hts[i] = ctx.height(points[i], opt.eps);
        free_idx.push_back(i);
    }
    std::stable_sort(free_idx.begin(), free_idx.end(), [&](std::size_t a, std::size_t b) { return hts[a] < hts[b]; });

    // Greedy independent set by height; accept when the Schur complement
    // (det ratio) clears the tolerance.
    std::vector<RationalPoint> basis;
    GramMatrix gb(0, 0);
    auto pairings = [&](const RationalPoint& q, long double hq) {
        Eigen::VectorXd v(basis.size());
        for (std::size_t k = 0; k < basis.size(); ++k) {
            RationalPoint s = detail::add_unchecked(curve, q, basis[k]);
            v(k) = static_cast<double>((ctx.height(s, opt.eps) - hq - gb(k, k)) / 2);
        }
        return v;
    };
    auto rebuild = [&]() { gb = gram(ctx, basis, opt.eps); };

    for (std::size_t idx : free_idx) {
        Eigen::VectorXd v = pairings(points[idx], hts[idx]);
        double schur = static_cast<double>(hts[idx]);
        if (!basis.empty()) schur -= v.dot(gb.ldlt().solve(v));
        if (schur > opt.det_tolerance) {
            basis.push_back(points[idx]);
            rebuild();
        }
    }

    // Generation: every point must have integer coordinates in the basis.
    if (!basis.empty()) {
        bool changed = true;
        for (int pass = 0; changed && pass < 50; ++pass) {
            changed = false;
            for (std::size_t idx : free_idx) {
                Eigen::VectorXd v = pairings(points[idx], hts[idx]);
                Coords c = coordinates_in(gb, v);
                if (c.integral && decomposition_holds(curve, basis, c.n, points[idx])) continue;
                if (!opt.require_generation) continue;
                long d = common_denominator(c.c);
                std::size_t swap_at = basis.size();
                if (d > 1) {
                    // Replacing b_i by q spans basis + q exactly when |c_i| = 1/d.
                    for (std::size_t k = 0; k < basis.size(); ++k)
                        if (std::fabs(std::fabs(c.c(k)) * d - 1.0) < 1e-3) {
                            swap_at = k;
                            break;
                        }
                }
                if (swap_at == basis.size())
                    throw GenerationFailure("point " + points[idx].to_string() +
                                            " is not generated by the selected independent set");
                basis[swap_at] = points[idx];
                rebuild();
                changed = true;
            }
        }
    }

    // Coordinates of every non-torsion point in the generating basis.
    std::vector<std::vector<long>> coords(n, std::vector<long>(basis.size(), 0));
    for (std::size_t idx : free_idx) {
        if (basis.empty()) break;
        Coords c = coordinates_in(gb, pairings(points[idx], hts[idx]));
        coords[idx] = c.n;
    }

    const std::size_t r = basis.size();
    if (r > 0) {
        auto transformed = [&](const std::vector<std::size_t>& subset) {
            GramMatrix cm(r, r);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j) cm(i, j) = static_cast<double>(coords[subset[i]][j]);
            return GramMatrix(cm * gb * cm.transpose());
        };
        auto unimodular = [&](const std::vector<std::size_t>& subset) {
            std::vector<std::vector<long>> m;
            for (std::size_t i : subset) m.push_back(coords[i]);
            long d = integer_det(m);
            return d == 1 || d == -1;
        };

        std::vector<std::size_t> best;
        double best_eig = min_eigenvalue(gb);
        if (free_idx.size() <= opt.exhaustive_limit) {
            // Every r-subset of the points, kept when it is a Z-basis.
            std::vector<bool> pick(free_idx.size(), false);
            std::fill(pick.begin(), pick.begin() + static_cast<long>(r), true);
            do {
                std::vector<std::size_t> subset;
                for (std::size_t i = 0; i < free_idx.size(); ++i)
                    if (pick[i]) subset.push_back(free_idx[i]);
                if (!unimodular(subset)) continue;
                double e = min_eigenvalue(transformed(subset));
                if (e > best_eig + 1e-12) {
                    best_eig = e;
                    best = subset;
                }
            } while (std::prev_permutation(pick.begin(), pick.end()));
        } else {
            // Local swaps: b_i -> q keeps a Z-basis iff q's i-th coordinate is +-1.
            std::vector<std::size_t> cur;
            for (const auto& b : basis) {
                for (std::size_t idx : free_idx)
                    if (points[idx] == b) {
                        cur.push_back(idx);
                        break;
                    }
            }
            // Express current basis members in themselves (identity) via coords.
            double cur_eig = best_eig;
            for (int iter = 0; iter < 200; ++iter) {
                double step_best = cur_eig;
                std::vector<std::size_t> step_subset;
                for (std::size_t k = 0; k < r; ++k) {
                    for (std::size_t idx : free_idx) {
                        if (std::find(cur.begin(), cur.end(), idx) != cur.end()) continue;
                        std::vector<std::size_t> trial = cur;
                        trial[k] = idx;
                        if (!unimodular(trial)) continue;
                        double e = min_eigenvalue(transformed(trial));
                        if (e > step_best + 1e-12) {
                            step_best = e;
                            step_subset = trial;
                        }
                    }
                }
                if (step_subset.empty()) break;
                cur = step_subset;
                cur_eig = step_best;
            }
            if (cur_eig > best_eig + 1e-12) {
                best = cur;
                best_eig = cur_eig;
            }
        }

        if (!best.empty()) {
            std::vector<RationalPoint> nb;
            for (std::size_t i : best) nb.push_back(points[i]);
            basis = nb;
            gb = gram(ctx, basis, opt.eps);
            for (std::size_t idx : free_idx) coords[idx] = coordinates_in(gb, pairings(points[idx], hts[idx])).n;
        }
    }

    out.basis = basis;
    out.gram = gb;
    out.min_eigenvalue = min_eigenvalue(gb);
    out.determinant = r ? gb.determinant() : 1.0;
    out.coordinates = coords;
    return out;
}

RankAssessment rank_lower_bound(const WeierstrassCurve& curve, const std::vector<RationalPoint>& points,
                                const BasisOptions& options)
{
    BasisSelection sel = select_basis(curve, points, options);
    RankAssessment out;
    out.rank = static_cast<int>(sel.basis.size());
    out.basis = sel.basis;
    out.gram = sel.gram;
    out.min_eigenvalue = sel.min_eigenvalue;
    out.regulator = out.rank ? sel.determinant : 1.0;
    if (out.rank > 0 && !(out.regulator > options.det_tolerance))
        throw PrecisionFailure("selected basis has determinant below tolerance");
    return out;
}

} // namespace rankforge
