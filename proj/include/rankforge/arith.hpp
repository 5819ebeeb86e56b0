#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace rankforge {

using Int = mpz_class;
using Rat = mpq_class;

// p-adic valuation; n must be nonzero.
unsigned valuation(const Int& n, const Int& p);
unsigned valuation(const Int& n, unsigned long p);

// Least nonnegative residue.
Int mod(const Int& a, const Int& m);
long mod_ui(const Int& a, unsigned long m);
Int inv_mod(const Int& a, const Int& m);

Int isqrt(const Int& n);
bool is_square(const Int& n);
bool is_square(const Int& n, Int& root);

Int ipow(const Int& base, unsigned long e);

std::string to_string(const Int& n);
std::string to_string(const Rat& q);
Int parse_int(std::string_view text);
Rat parse_rat(std::string_view text);

bool fits_int64(const Int& n);
std::int64_t to_int64(const Int& n);
Int from_int64(std::int64_t v);
Int from_int128(__int128 v);

// Exact integer square root test for 128-bit values (negative -> false).
bool is_square_i128(__int128 v, __int128& root);

inline __int128 abs_i128(__int128 v) { return v < 0 ? -v : v; }

// Floor division / nonnegative modulus for signed 64-bit.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
inline std::int64_t pos_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

} // namespace rankforge
