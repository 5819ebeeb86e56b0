#pragma once

#include "rankforge/curve.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rankforge {

/// Canonical height normalized as lim log H(x(2^n P)) / 4^n, computed as the
/// archimedean local height (Silverman's series) plus non-archimedean
/// corrections at primes where P meets the singular locus. The model must be
/// globally minimal.
class HeightContext {
public:
    explicit HeightContext(const WeierstrassCurve& curve);

    const WeierstrassCurve& curve() const { return curve_; }
    long double height(const RationalPoint& p, long double eps = 1e-8L) const;
    long double archimedean(const Rat& x, long double eps = 1e-8L) const;
    long double non_archimedean(const RationalPoint& p) const;

private:
    WeierstrassCurve curve_;
    Invariants inv_;
    long double b2_, b4_, b6_, b8_;
    long double b2p_, b4p_, b6p_, b8p_; // invariants after x -> x + 1
};

long double canonical_height(const WeierstrassCurve& curve, const RationalPoint& p, long double eps = 1e-8L);

/// Reference value lim log H(x(2^n P)) / 4^n at a fixed n; slow, for cross-checks.
long double height_by_doubling(const WeierstrassCurve& curve, const RationalPoint& p, unsigned n);

using GramMatrix = Eigen::MatrixXd;

GramMatrix gram(const WeierstrassCurve& curve, const std::vector<RationalPoint>& points, long double eps = 1e-8L);
GramMatrix gram(const HeightContext& ctx, const std::vector<RationalPoint>& points, long double eps = 1e-8L);

double min_eigenvalue(const GramMatrix& g);

struct BasisSelection {
    std::vector<RationalPoint> basis;
    GramMatrix gram;
    double min_eigenvalue = 0.0;
    double determinant = 0.0;
    /// Integer coordinates of every input point in the basis (torsion rows are zero).
    std::vector<std::vector<long>> coordinates;
};

struct BasisOptions {
    long double eps = 1e-8L;
    double det_tolerance = 1e-6;
    std::size_t exhaustive_limit = 20; // exhaustive subset search at or below this many points
    bool require_generation = true;
};

/// Maximal independent subset that generates every input point (modulo
/// torsion), chosen to maximize the minimal Gram eigenvalue.
/// Throws GenerationFailure naming a point that the chosen set cannot reach.
BasisSelection select_basis(const WeierstrassCurve& curve, const std::vector<RationalPoint>& points,
                            const BasisOptions& options = {});

struct RankAssessment {
    int rank = 0;
    std::vector<RationalPoint> basis;
    GramMatrix gram;
    double min_eigenvalue = 0.0;
    double regulator = 0.0;
};

RankAssessment rank_lower_bound(const WeierstrassCurve& curve, const std::vector<RationalPoint>& points,
                                const BasisOptions& options = {});

} // namespace rankforge
