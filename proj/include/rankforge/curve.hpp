#pragma once

#include "rankforge/arith.hpp"

#include <array>
#include <string>
#include <string_view>

namespace rankforge {

struct BInvariants {
    Int b2, b4, b6, b8;
};

struct Invariants {
    Int b2, b4, b6, b8;
    Int c4, c6;
    Int delta;
    Rat j;
};

using Coefficients = std::array<Int, 5>;

/// Invariants straight from the five coefficients; throws SingularCurve when
/// the discriminant vanishes.
BInvariants b_invariants(const Coefficients& a);
Invariants full_invariants(const Coefficients& a);

/// Integral Weierstrass model Y^2 + a1 XY + a3 Y = X^3 + a2 X^2 + a4 X + a6.
/// Construction rejects singular coefficient sets.
class WeierstrassCurve {
public:
    WeierstrassCurve(Int a1, Int a2, Int a3, Int a4, Int a6);
    explicit WeierstrassCurve(const Coefficients& a);

    /// Accepts "[a1,a2,a3,a4,a6]" with optional whitespace.
    static WeierstrassCurve parse(std::string_view text);

    const Int& a1() const { return a_[0]; }
    const Int& a2() const { return a_[1]; }
    const Int& a3() const { return a_[2]; }
    const Int& a4() const { return a_[3]; }
    const Int& a6() const { return a_[4]; }
    const Coefficients& coefficients() const { return a_; }

    const Int& discriminant() const { return delta_; }

    /// a1, a3 in {0,1} and |a2| <= 1.
    bool is_reduced_form() const;

    std::string to_string() const;

    friend bool operator==(const WeierstrassCurve& l, const WeierstrassCurve& r) { return l.a_ == r.a_; }
    friend bool operator<(const WeierstrassCurve& l, const WeierstrassCurve& r) { return l.a_ < r.a_; }

private:
    Coefficients a_;
    Int delta_;
};

BInvariants b_invariants(const WeierstrassCurve& curve);
Invariants full_invariants(const WeierstrassCurve& curve);

/// y^2 = 4x^3 + b2 x^2 + 2 b4 x + b6. Serialized as "(b2, 2b4, b6)".
struct TwoTorsionModel {
    Int b2, b4, b6;

    /// 4 * discriminant; integral for any triple even when b8 is fractional.
    Int discriminant_times_4() const;
    bool is_singular() const { return discriminant_times_4() == 0; }
    Int c4() const;
    Int c6() const;
    /// Right-hand side 4x^3 + b2 x^2 + 2 b4 x + b6.
    Int rhs(const Int& x) const;

    std::string to_string() const;
    static TwoTorsionModel parse(std::string_view text);

    friend bool operator==(const TwoTorsionModel&, const TwoTorsionModel&) = default;
};

TwoTorsionModel two_torsion_model(const WeierstrassCurve& curve);

/// Global minimal model (reduced a1, a2, a3) of the curve with invariants c4, c6.
/// Throws InvalidInvariants when no integral model has exactly these invariants
/// (Kraus's conditions), SingularCurve when c4^3 == c6^2.
WeierstrassCurve minimal_model(const Int& c4, const Int& c6);

/// Global minimal model of the curve defined by a 2-torsion equation.
WeierstrassCurve curve_from_b(const TwoTorsionModel& model);

/// True if (c4, c6) satisfy Kraus's conditions for an integral model.
bool kraus_conditions(const Int& c4, const Int& c6);

/// Rational point on a stated model; `infinity` marks the identity.
struct RationalPoint {
    bool infinity = true;
    Rat x, y;

    RationalPoint() = default;
    RationalPoint(Rat x_, Rat y_) : infinity(false), x(std::move(x_)), y(std::move(y_)) {}
    static RationalPoint identity() { return {}; }

    bool is_integral() const;
    std::string to_string() const;

    friend bool operator==(const RationalPoint& l, const RationalPoint& r)
    {
        if (l.infinity || r.infinity) return l.infinity == r.infinity;
        return l.x == r.x && l.y == r.y;
    }
};

bool is_on_curve(const WeierstrassCurve& curve, const RationalPoint& p);
RationalPoint point_negate(const WeierstrassCurve& curve, const RationalPoint& p);
/// Group law; throws PointNotOnCurve for inputs off the curve.
RationalPoint point_add(const WeierstrassCurve& curve, const RationalPoint& p, const RationalPoint& q);
RationalPoint point_mul(const WeierstrassCurve& curve, long n, const RationalPoint& p);

namespace detail {
// Unchecked group law for hot loops whose inputs are known to be on the curve.
RationalPoint add_unchecked(const WeierstrassCurve& curve, const RationalPoint& p, const RationalPoint& q);
}

/// Order of p when it divides one of the torsion orders possible over Q
/// (1..10, 12); 0 when p has infinite order.
int torsion_order(const WeierstrassCurve& curve, const RationalPoint& p);

/// (X, Y) on the Weierstrass model <-> (X, 2Y + a1 X + a3) on its 2-torsion model.
/// These are inverse bijections on integral points.
struct IntegralPoint {
    Int x, y;
    friend bool operator==(const IntegralPoint&, const IntegralPoint&) = default;
    friend auto operator<=>(const IntegralPoint& l, const IntegralPoint& r)
    {
        if (auto c = cmp(l.x, r.x); c != 0) return c <=> 0;
        return cmp(l.y, r.y) <=> 0;
    }
};
IntegralPoint to_two_torsion(const WeierstrassCurve& curve, const IntegralPoint& p);
IntegralPoint from_two_torsion(const WeierstrassCurve& curve, const IntegralPoint& q);

/// Point (x, y) on a 2-torsion model carried to the global minimal model of
/// the same curve. Returns a rational point in general; integral when the
/// model is a scaled version of the minimal one.
RationalPoint two_torsion_point_to_minimal(const TwoTorsionModel& model, const WeierstrassCurve& minimal,
                                           const Rat& x, const Rat& y);

} // namespace rankforge
