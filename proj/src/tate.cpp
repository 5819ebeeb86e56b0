#include "rankforge/tate.hpp"

#include "rankforge/errors.hpp"

namespace rankforge {

namespace {

struct Model {
    Int a1, a2, a3, a4, a6;

    // (x, y) -> (x + r, y + s x + t)
    void rst(const Int& r, const Int& s, const Int& t)
    {
        Int n1 = a1 + 2 * s;
        Int n2 = a2 - s * a1 + 3 * r - s * s;
        Int n3 = a3 + r * a1 + 2 * t;
        Int n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        Int n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        a1 = n1; a2 = n2; a3 = n3; a4 = n4; a6 = n6;
    }

    void divide_by(const Int& u)
    {
        Int u2 = u * u, u3 = u2 * u;
        a1 /= u;
        a2 /= u2;
        a3 /= u3;
        a4 /= u2 * u2;
        a6 /= u3 * u3;
    }
};

unsigned val(const Int& n, const Int& p) { return n == 0 ? 1000000u : valuation(n, p); }
bool pdiv(const Int& n, const Int& p) { return mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t()) != 0; }
Int pred(const Int& n, const Int& p) { return mod(n, p); }
Int exact_div(const Int& a, const Int& b)
{
    if (!mpz_divisible_p(a.get_mpz_t(), b.get_mpz_t())) throw Error("internal: Tate step lost integrality");
    return a / b;
}

} // namespace

std::string KodairaSymbol::to_string() const
{
    switch (type) {
    case Kodaira::I0: return "I0";
    case Kodaira::In: return "I" + std::to_string(n);
    case Kodaira::II: return "II";
    case Kodaira::III: return "III";
    case Kodaira::IV: return "IV";
    case Kodaira::I0Star: return "I0*";
    case Kodaira::InStar: return "I" + std::to_string(n) + "*";
    case Kodaira::IVStar: return "IV*";
    case Kodaira::IIIStar: return "III*";
    case Kodaira::IIStar: return "II*";
    }
    return "?";
}

LocalData tate_local(const WeierstrassCurve& curve, const Int& p)
{
    LocalData out;
    out.p = p;
    Model m{curve.a1(), curve.a2(), curve.a3(), curve.a4(), curve.a6()};
    const Int half = (p + 1) / 2; // inverse of 2 mod odd p
    const Int p2 = p * p;

    for (;;) {
        Coefficients a{m.a1, m.a2, m.a3, m.a4, m.a6};
        Invariants inv = full_invariants(a);
        unsigned vd = valuation(inv.delta, p);
        out.discriminant_valuation = vd;
        if (vd == 0) {
            out.conductor_exponent = 0;
            out.kodaira = {Kodaira::I0, 0};
            return out;
        }

        // Move the singular point to (0, 0).
        Int r, t;
        if (p == 2) {
            if (pdiv(inv.b2, p)) {
                r = pred(m.a4, p);
                t = pred(r * (1 + m.a2 + m.a4) + m.a6, p);
            } else {
                r = pred(m.a3, p);
                t = pred(r + m.a4, p);
            }
        } else if (p == 3) {
            r = pdiv(inv.b2, p) ? pred(-inv.b6, p) : pred(-inv.b2 * inv.b4, p);
            t = pred(m.a1 * r + m.a3, p);
        } else {
            if (pdiv(inv.c4, p))
                r = -inv_mod(Int(12), p) * inv.b2;
            else
                r = -inv_mod(Int(12 * inv.c4), p) * (inv.c6 + inv.b2 * inv.c4);
            t = -half * (m.a1 * r + m.a3);
            r = pred(r, p);
            t = pred(t, p);
        }
        m.rst(r, 0, t);

        if (!pdiv(inv.c4, p)) {
            out.kodaira = {Kodaira::In, vd};
            out.conductor_exponent = 1;
            return out;
        }
        Int b6 = m.a3 * m.a3 + 4 * m.a6;
        Int b8 = m.a1 * m.a1 * m.a6 + 4 * m.a2 * m.a6 - m.a1 * m.a3 * m.a4 + m.a2 * m.a3 * m.a3 - m.a4 * m.a4;
        if (val(m.a6, p) < 2) {
            out.kodaira = {Kodaira::II, 0};
            out.conductor_exponent = vd;
            return out;
        }
        if (val(b8, p) < 3) {
            out.kodaira = {Kodaira::III, 0};
            out.conductor_exponent = vd - 1;
            return out;
        }
        if (val(b6, p) < 3) {
            out.kodaira = {Kodaira::IV, 0};
            out.conductor_exponent = vd - 2;
            return out;
        }

        // p | a1, a2; p^2 | a3, a4; p^3 | a6.
        Int s;
        if (p == 2) {
            s = pred(m.a2, p);
            t = 2 * pred(exact_div(m.a6, 4), p);
        } else {
            s = -m.a1 * half;
            t = -m.a3 * half;
        }
        m.rst(0, s, t);

        Int b = exact_div(m.a2, p);
        Int c = exact_div(m.a4, p2);
        Int d = exact_div(m.a6, p2 * p);
        Int w = 27 * d * d - b * b * c * c + 4 * b * b * b * d - 18 * b * c * d + 4 * c * c * c;
        Int x = 3 * c - b * b;
        int sw = pdiv(w, p) ? (pdiv(x, p) ? 3 : 2) : 1;

        if (sw == 1) {
            out.kodaira = {Kodaira::I0Star, 0};
            out.conductor_exponent = vd - 4;
            return out;
        }
        if (sw == 2) {
            // Double root: move it to 0, then peel off I_n* levels.
            Int rr;
            if (p == 2)
                rr = c;
            else if (p == 3)
                rr = c * b;
            else
                rr = (b * c - 9 * d) * inv_mod(Int(2 * x), p);
            m.rst(p * pred(rr, p), 0, 0);
            unsigned ix = 3, iy = 3;
            Int mx = p2, my = p2;
            for (;;) {
                Int a2t = exact_div(m.a2, p);
                Int a3t = exact_div(m.a3, my);
                Int a4t = exact_div(m.a4, p * mx);
                Int a6t = exact_div(m.a6, mx * my);
                if (!pdiv(a3t * a3t + 4 * a6t, p)) break;
                Int tt = p == 2 ? my * pred(a6t, p) : my * pred(-a3t * half, p);
                m.rst(0, 0, tt);
                my *= p;
                ++iy;
                a2t = exact_div(m.a2, p);
                a3t = exact_div(m.a3, my);
                a4t = exact_div(m.a4, p * mx);
                a6t = exact_div(m.a6, mx * my);
                if (!pdiv(a4t * a4t - 4 * a6t * a2t, p)) break;
                Int r2 = p == 2 ? mx * pred(a6t * a2t, p) : mx * pred(-a4t * inv_mod(Int(2 * a2t), p), p);
                m.rst(r2, 0, 0);
                mx *= p;
                ++ix;
            }
            out.kodaira = {Kodaira::InStar, ix + iy - 5};
            out.conductor_exponent = vd - ix - iy + 1;
            return out;
        }

        // Triple root: move it to 0.
        Int rr;
        if (p == 2)
            rr = b;
        else if (p == 3)
            rr = -d;
        else
            rr = -b * inv_mod(Int(3), p);
        m.rst(p * pred(rr, p), 0, 0);
        Int x3 = exact_div(m.a3, p2);
        Int x6 = exact_div(m.a6, p2 * p2);
        if (!pdiv(x3 * x3 + 4 * x6, p)) {
            out.kodaira = {Kodaira::IVStar, 0};
            out.conductor_exponent = vd - 6;
            return out;
        }
        Int tt = p == 2 ? x6 : x3 * half;
        m.rst(0, 0, -p2 * pred(tt, p));
        if (val(m.a4, p) < 4) {
            out.kodaira = {Kodaira::IIIStar, 0};
            out.conductor_exponent = vd - 7;
            return out;
        }
        if (val(m.a6, p) < 6) {
            out.kodaira = {Kodaira::IIStar, 0};
            out.conductor_exponent = vd - 8;
            return out;
        }
        // Not minimal at p.
        m.divide_by(p);
        out.input_was_minimal = false;
    }
}

ConductorData conductor(const WeierstrassCurve& curve, FactorBudget budget)
{
    Invariants inv = full_invariants(curve);
    WeierstrassCurve minimal = minimal_model(inv.c4, inv.c6);
    ConductorData out;
    out.minimal_discriminant = minimal.discriminant();
    Int ad = abs(out.minimal_discriminant);
    Factorization f = factor(ad, budget);
    out.conductor = 1;
    for (const auto& pp : f.factors) {
        LocalData ld = tate_local(minimal, pp.p);
        out.conductor *= ipow(pp.p, ld.conductor_exponent);
        out.locals.push_back(std::move(ld));
    }
    out.delta_over_n = ad / out.conductor;
    return out;
}

} // namespace rankforge
