#include "rankforge/arith.hpp"
#include "rankforge/errors.hpp"

#include <cmath>

namespace rankforge {

unsigned valuation(const Int& n, const Int& p)
{
    if (n == 0) throw DomainError("valuation of zero");
    Int m = n;
    return static_cast<unsigned>(mpz_remove(m.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t()));
}

unsigned valuation(const Int& n, unsigned long p)
{
    return valuation(n, Int(p));
}

Int mod(const Int& a, const Int& m)
{
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

long mod_ui(const Int& a, unsigned long m)
{
    return static_cast<long>(mpz_fdiv_ui(a.get_mpz_t(), m));
}

Int inv_mod(const Int& a, const Int& m)
{
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw DomainError("no modular inverse of " + to_string(a) + " mod " + to_string(m));
    return r;
}

Int isqrt(const Int& n)
{
    if (n < 0) throw DomainError("isqrt of negative number");
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

bool is_square(const Int& n)
{
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

bool is_square(const Int& n, Int& root)
{
    if (n < 0) return false;
    Int rem;
    mpz_sqrtrem(root.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t());
    return rem == 0;
}

Int ipow(const Int& base, unsigned long e)
{
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

std::string to_string(const Int& n)
{
    return n.get_str(10);
}

std::string to_string(const Rat& q)
{
    return q.get_str(10);
}

Int parse_int(std::string_view text)
{
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    s = s.substr(i);
    if (!s.empty() && s[0] == '+') s = s.substr(1);
    Int r;
    if (s.empty() || r.set_str(s, 10) != 0) throw ParseError("not an integer: '" + std::string(text) + "'");
    return r;
}

Rat parse_rat(std::string_view text)
{
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rat(parse_int(text));
    Rat q(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
    if (q.get_den() == 0) throw ParseError("zero denominator");
    q.canonicalize();
    return q;
}

bool fits_int64(const Int& n)
{
    static const Int lo = from_int64(std::numeric_limits<std::int64_t>::min());
    static const Int hi = from_int64(std::numeric_limits<std::int64_t>::max());
    return n >= lo && n <= hi;
}

std::int64_t to_int64(const Int& n)
{
    if (!fits_int64(n)) throw DomainError("integer exceeds 64 bits: " + to_string(n));
    // mpz_get_si is exact for values that fit a signed long (LP64).
    return static_cast<std::int64_t>(mpz_get_si(n.get_mpz_t()));
}

Int from_int64(std::int64_t v)
{
    Int r;
    mpz_set_si(r.get_mpz_t(), static_cast<long>(v));
    return r;
}

Int from_int128(__int128 v)
{
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    Int hi, lo;
    mpz_set_ui(hi.get_mpz_t(), static_cast<unsigned long>(u >> 64));
    mpz_set_ui(lo.get_mpz_t(), static_cast<unsigned long>(u & 0xFFFFFFFFFFFFFFFFull));
    Int r = (hi << 64) + lo;
    return neg ? Int(-r) : r;
}

bool is_square_i128(__int128 v, __int128& root)
{
    if (v < 0) return false;
    auto s = static_cast<__int128>(std::sqrt(static_cast<long double>(v)));
    while (s > 0 && s * s > v) --s;
    while ((s + 1) * (s + 1) <= v) ++s;
    root = s;
    return s * s == v;
}

} // namespace rankforge
