#include "rankforge/curve.hpp"
#include "rankforge/errors.hpp"

#include <sstream>
#include <vector>

namespace rankforge {

namespace {

std::vector<std::string> split_tuple(std::string_view text, char open, char close)
{
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.size() < 2 || s.front() != open || s.back() != close)
        throw ParseError("expected " + std::string(1, open) + "...]" + " got '" + std::string(text) + "'");
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(s[i]);
        }
    }
    parts.push_back(cur);
    return parts;
}

Int delta_from_b(const Int& b2, const Int& b4, const Int& b6, const Int& b8)
{
    return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
}

} // namespace

BInvariants b_invariants(const Coefficients& a)
{
    const auto& [a1, a2, a3, a4, a6] = a;
    BInvariants b;
    b.b2 = a1 * a1 + 4 * a2;
    b.b4 = a1 * a3 + 2 * a4;
    b.b6 = a3 * a3 + 4 * a6;
    b.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    return b;
}

Invariants full_invariants(const Coefficients& a)
{
    BInvariants b = b_invariants(a);
    Invariants inv;
    inv.b2 = b.b2;
    inv.b4 = b.b4;
    inv.b6 = b.b6;
    inv.b8 = b.b8;
    inv.c4 = b.b2 * b.b2 - 24 * b.b4;
    inv.c6 = -b.b2 * b.b2 * b.b2 + 36 * b.b2 * b.b4 - 216 * b.b6;
    inv.delta = delta_from_b(b.b2, b.b4, b.b6, b.b8);
    if (inv.delta == 0) throw SingularCurve();
    if (inv.c4 * inv.c4 * inv.c4 - inv.c6 * inv.c6 != 1728 * inv.delta)
        throw Error("internal: c4^3 - c6^2 != 1728 delta");
    inv.j = Rat(inv.c4 * inv.c4 * inv.c4, inv.delta);
    inv.j.canonicalize();
    return inv;
}

WeierstrassCurve::WeierstrassCurve(Int a1, Int a2, Int a3, Int a4, Int a6)
    : WeierstrassCurve(Coefficients{std::move(a1), std::move(a2), std::move(a3), std::move(a4), std::move(a6)})
{
}

WeierstrassCurve::WeierstrassCurve(const Coefficients& a) : a_(a)
{
    BInvariants b = b_invariants(a_);
    delta_ = delta_from_b(b.b2, b.b4, b.b6, b.b8);
    if (delta_ == 0) throw SingularCurve();
}

WeierstrassCurve WeierstrassCurve::parse(std::string_view text)
{
    auto parts = split_tuple(text, '[', ']');
    if (parts.size() != 5) throw ParseError("curve needs five coefficients: '" + std::string(text) + "'");
    Coefficients a;
    for (int i = 0; i < 5; ++i) a[i] = parse_int(parts[i]);
    return WeierstrassCurve(a);
}

bool WeierstrassCurve::is_reduced_form() const
{
    auto bit = [](const Int& v) { return v == 0 || v == 1; };
    return bit(a1()) && bit(a3()) && abs(a2()) <= 1;
}

std::string WeierstrassCurve::to_string() const
{
    std::ostringstream os;
    os << '[' << a1() << ',' << a2() << ',' << a3() << ',' << a4() << ',' << a6() << ']';
    return os.str();
}

BInvariants b_invariants(const WeierstrassCurve& curve)
{
    return b_invariants(curve.coefficients());
}

Invariants full_invariants(const WeierstrassCurve& curve)
{
    return full_invariants(curve.coefficients());
}

Int TwoTorsionModel::discriminant_times_4() const
{
    // 4*b8 = b2*b6 - b4^2 substituted into the b-form of the discriminant.
    return -b2 * b2 * (b2 * b6 - b4 * b4) - 32 * b4 * b4 * b4 - 108 * b6 * b6 + 36 * b2 * b4 * b6;
}

Int TwoTorsionModel::c4() const
{
    return b2 * b2 - 24 * b4;
}

Int TwoTorsionModel::c6() const
{
    return -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
}

Int TwoTorsionModel::rhs(const Int& x) const
{
    return ((4 * x + b2) * x + 2 * b4) * x + b6;
}

std::string TwoTorsionModel::to_string() const
{
    std::ostringstream os;
    os << '(' << b2 << ", " << Int(2 * b4) << ", " << b6 << ')';
    return os.str();
}

TwoTorsionModel TwoTorsionModel::parse(std::string_view text)
{
    auto parts = split_tuple(text, '(', ')');
    if (parts.size() != 3) throw ParseError("2-torsion model needs (b2, 2b4, b6): '" + std::string(text) + "'");
    TwoTorsionModel m;
    m.b2 = parse_int(parts[0]);
    Int two_b4 = parse_int(parts[1]);
    if (mpz_odd_p(two_b4.get_mpz_t())) throw ParseError("middle entry 2b4 must be even");
    m.b4 = two_b4 / 2;
    m.b6 = parse_int(parts[2]);
    return m;
}

TwoTorsionModel two_torsion_model(const WeierstrassCurve& curve)
{
    BInvariants b = b_invariants(curve);
    return {b.b2, b.b4, b.b6};
}

WeierstrassCurve curve_from_b(const TwoTorsionModel& model)
{
    if (model.is_singular()) throw SingularCurve();
    Int c4 = model.c4(), c6 = model.c6();
    if (!kraus_conditions(c4, c6)) {
        // Not the completed square of an integral model; the short model
        // y^2 = x^3 - 27c4 x - 54c6 always is, with invariants 6^4 c4, 6^6 c6.
        c4 *= 1296;
        c6 *= 46656;
    }
    return minimal_model(c4, c6);
}

bool RationalPoint::is_integral() const
{
    return !infinity && x.get_den() == 1 && y.get_den() == 1;
}

std::string RationalPoint::to_string() const
{
    if (infinity) return "O";
    return "(" + rankforge::to_string(x) + "," + rankforge::to_string(y) + ")";
}

bool is_on_curve(const WeierstrassCurve& c, const RationalPoint& p)
{
    if (p.infinity) return true;
    const Rat &x = p.x, &y = p.y;
    Rat lhs = y * y + c.a1() * x * y + c.a3() * y;
    Rat rhs = ((x + c.a2()) * x + c.a4()) * x + c.a6();
    return lhs == rhs;
}

RationalPoint point_negate(const WeierstrassCurve& c, const RationalPoint& p)
{
    if (p.infinity) return p;
    return {p.x, Rat(-p.y - c.a1() * p.x - c.a3())};
}

namespace detail {

RationalPoint add_unchecked(const WeierstrassCurve& c, const RationalPoint& p, const RationalPoint& q)
{
    if (p.infinity) return q;
    if (q.infinity) return p;
    Rat lambda;
    if (p.x == q.x) {
        Rat denom = 2 * p.y + c.a1() * p.x + c.a3();
        if (p.y != q.y || denom == 0) return RationalPoint::identity();
        lambda = (3 * p.x * p.x + 2 * c.a2() * p.x + c.a4() - c.a1() * p.y) / denom;
    } else {
        lambda = (q.y - p.y) / (q.x - p.x);
    }
    Rat nu = p.y - lambda * p.x;
    Rat x3 = lambda * lambda + c.a1() * lambda - c.a2() - p.x - q.x;
    Rat y3 = -(lambda + c.a1()) * x3 - nu - c.a3();
    return {std::move(x3), std::move(y3)};
}

} // namespace detail

RationalPoint point_add(const WeierstrassCurve& c, const RationalPoint& p, const RationalPoint& q)
{
    if (!is_on_curve(c, p)) throw PointNotOnCurve("point " + p.to_string() + " not on " + c.to_string());
    if (!is_on_curve(c, q)) throw PointNotOnCurve("point " + q.to_string() + " not on " + c.to_string());
    return detail::add_unchecked(c, p, q);
}

RationalPoint point_mul(const WeierstrassCurve& c, long n, const RationalPoint& p)
{
    if (!is_on_curve(c, p)) throw PointNotOnCurve("point " + p.to_string() + " not on " + c.to_string());
    RationalPoint base = n < 0 ? point_negate(c, p) : p;
    unsigned long k = n < 0 ? static_cast<unsigned long>(-(n + 1)) + 1 : static_cast<unsigned long>(n);
    RationalPoint acc;
    while (k) {
        if (k & 1) acc = detail::add_unchecked(c, acc, base);
        k >>= 1;
        if (k) base = detail::add_unchecked(c, base, base);
    }
    return acc;
}

int torsion_order(const WeierstrassCurve& c, const RationalPoint& p)
{
    if (!is_on_curve(c, p)) throw PointNotOnCurve("point " + p.to_string() + " not on " + c.to_string());
    RationalPoint acc = p;
    for (int n = 1; n <= 12; ++n) {
        if (acc.infinity) return n == 11 ? 0 : n;
        // Torsion points on an integral model have 4x integral.
        if (!mpz_divisible_p(Int(4).get_mpz_t(), acc.x.get_den_mpz_t())) return 0;
        acc = detail::add_unchecked(c, acc, p);
    }
    return 0;
}

IntegralPoint to_two_torsion(const WeierstrassCurve& c, const IntegralPoint& p)
{
    return {p.x, 2 * p.y + c.a1() * p.x + c.a3()};
}

IntegralPoint from_two_torsion(const WeierstrassCurve& c, const IntegralPoint& q)
{
    Int num = q.y - c.a1() * q.x - c.a3();
    if (mpz_odd_p(num.get_mpz_t())) throw PointNotOnCurve("2-torsion point does not lift to an integral point");
    return {q.x, num / 2};
}

namespace {

Rat exact_root(const Rat& q, unsigned long k)
{
    Int n = q.get_num(), d = q.get_den();
    bool neg = n < 0;
    if (neg) {
        if (k % 2 == 0) throw DomainError("even root of negative rational");
        n = -n;
    }
    Int rn, rd;
    if (mpz_root(rn.get_mpz_t(), n.get_mpz_t(), k) == 0 || mpz_root(rd.get_mpz_t(), d.get_mpz_t(), k) == 0)
        throw DomainError("rational is not a perfect power");
    Rat r(neg ? Int(-rn) : rn, rd);
    r.canonicalize();
    return r;
}

} // namespace

RationalPoint two_torsion_point_to_minimal(const TwoTorsionModel& model, const WeierstrassCurve& minimal,
                                           const Rat& x, const Rat& y)
{
    Invariants mi = full_invariants(minimal);
    Int c4 = model.c4(), c6 = model.c6();
    // c4 = u^4 c4', c6 = u^6 c6'; recover u^2 and then u > 0.
    Rat u2;
    if (c4 != 0 && c6 != 0) {
        if (mi.c4 == 0 || mi.c6 == 0) throw InvalidInvariants("models are not isomorphic");
        u2 = Rat(c6 * mi.c4, mi.c6 * c4);
    } else if (c4 == 0) {
        if (mi.c4 != 0) throw InvalidInvariants("models are not isomorphic");
        u2 = exact_root(Rat(c6, mi.c6), 3);
    } else {
        if (mi.c6 != 0) throw InvalidInvariants("models are not isomorphic");
        u2 = exact_root(Rat(c4, mi.c4), 2);
    }
    u2.canonicalize();
    if (u2 <= 0) throw InvalidInvariants("models are quadratic twists, not isomorphic");
    Rat u = exact_root(u2, 2);
    if (u2 * u2 * mi.c4 != Rat(c4) || u2 * u2 * u2 * mi.c6 != Rat(c6))
        throw InvalidInvariants("models are not isomorphic");
    Rat xs = (36 * x + 3 * model.b2) / u2;
    Rat ys = 108 * y / (u2 * u);
    Rat X = (xs - 3 * mi.b2) / 36;
    Rat Y = (ys / 108 - minimal.a1() * X - minimal.a3()) / 2;
    RationalPoint p(X, Y);
    if (!is_on_curve(minimal, p)) throw PointNotOnCurve("transported point is not on the minimal model");
    return p;
}

} // namespace rankforge
