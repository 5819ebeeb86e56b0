// Laska-Kraus-Connell reduction of (c4, c6) to a global minimal model.

#include "rankforge/curve.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/factor.hpp"

namespace rankforge {

namespace {

bool discriminant_integral(const Int& c4, const Int& c6)
{
    Int num = c4 * c4 * c4 - c6 * c6;
    return num != 0 && mpz_divisible_ui_p(num.get_mpz_t(), 1728);
}

// Largest d with p^(4d) | c4 and p^(6d) | c6 (zero entries impose no limit).
unsigned scaling_exponent(const Int& c4, const Int& c6, const Int& p)
{
    unsigned d = ~0u;
    if (c4 != 0) d = std::min(d, valuation(c4, p) / 4);
    if (c6 != 0) d = std::min(d, valuation(c6, p) / 6);
    return d;
}

} // namespace

bool kraus_conditions(const Int& c4, const Int& c6)
{
    if (!discriminant_integral(c4, c6)) return false;
    // At 3: v3(c6) != 2.
    if (c6 != 0 && valuation(c6, 3ul) == 2) return false;
    // At 2: c6 = -1 (mod 4), or v2(c4) >= 4 and c6 = 0, 8 (mod 32).
    if (mod_ui(c6, 4) == 3) return true;
    bool c4_ok = c4 == 0 || valuation(c4, 2ul) >= 4;
    long r = mod_ui(c6, 32);
    return c4_ok && (r == 0 || r == 8);
}

WeierstrassCurve minimal_model(const Int& c4_in, const Int& c6_in)
{
    if (c4_in * c4_in * c4_in == c6_in * c6_in) throw SingularCurve();
    if (!kraus_conditions(c4_in, c6_in))
        throw InvalidInvariants("no integral model with c4=" + to_string(c4_in) + ", c6=" + to_string(c6_in));

    Int g = c4_in == 0 ? abs(c6_in) : (c6_in == 0 ? abs(c4_in) : Int(gcd(c4_in, c6_in)));
    Int c4 = c4_in, c6 = c6_in;
    if (g > 1) {
        Factorization f = factor(g);
        for (const auto& pp : f.factors) {
            unsigned d = scaling_exponent(c4, c6, pp.p);
            if (d == 0) continue;
            if (pp.p == 2 || pp.p == 3) {
                // Kraus conditions at 2 and 3 can fail after scaling; back off.
                while (d > 0) {
                    Int q4 = c4 / ipow(pp.p, 4 * d), q6 = c6 / ipow(pp.p, 6 * d);
                    if (kraus_conditions(q4, q6)) break;
                    --d;
                }
            }
            if (d == 0) continue;
            c4 /= ipow(pp.p, 4 * d);
            c6 /= ipow(pp.p, 6 * d);
        }
    }

    // Reduced coefficients from minimal invariants.
    Int b2 = mod(-c6, Int(12));
    if (b2 > 6) b2 -= 12;
    Int t4 = b2 * b2 - c4;
    if (!mpz_divisible_ui_p(t4.get_mpz_t(), 24)) throw InvalidInvariants("b4 not integral");
    Int b4 = t4 / 24;
    Int t6 = -b2 * b2 * b2 + 36 * b2 * b4 - c6;
    if (!mpz_divisible_ui_p(t6.get_mpz_t(), 216)) throw InvalidInvariants("b6 not integral");
    Int b6 = t6 / 216;
    Int a1 = mod(b2, Int(2));
    Int a2 = (b2 - a1) / 4;
    Int a3 = mod(b6, Int(2));
    Int t_a4 = b4 - a1 * a3;
    Int t_a6 = b6 - a3;
    if (mod(b2 - a1, Int(4)) != 0 || mod(t_a4, Int(2)) != 0 || mod(t_a6, Int(4)) != 0)
        throw InvalidInvariants("reduced coefficients not integral");
    WeierstrassCurve curve(a1, a2, a3, t_a4 / 2, t_a6 / 4);
    Invariants check = full_invariants(curve);
    if (check.c4 != c4 || check.c6 != c6) throw Error("internal: minimal model invariants mismatch");
    return curve;
}

} // namespace rankforge
