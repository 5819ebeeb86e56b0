#pragma once

#include "rankforge/curve.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rankforge {

/// Integral points are stored once per x: the representative with
/// 2y + a1 x + a3 >= 0 (y >= 0 when a1 = a3 = 0).
IntegralPoint canonical_representative(const WeierstrassCurve& curve, const IntegralPoint& p);

struct SieveStats {
    std::uint64_t scanned = 0;      // x values in range
    std::uint64_t exact_checks = 0; // x values surviving the residue filter
    double rejection_rate() const { return scanned ? 1.0 - double(exact_checks) / double(scanned) : 0.0; }
};

/// Combined modulus of the residue filter: 64 * 63 * 65 * 11.
inline constexpr std::uint64_t kSieveModulus = 2882880;

/// Residues x mod kSieveModulus for which 4x^3 + b2 x^2 + 2 b4 x + b6 is a
/// square modulo each of 64, 63, 65, 11.
std::vector<std::uint32_t> sieve_residues(const WeierstrassCurve& curve);

/// Exact per-x square test; reference for the sieve.
std::vector<IntegralPoint> sieve_search_naive(const WeierstrassCurve& curve, std::int64_t X);
std::vector<IntegralPoint> sieve_search_serial(const WeierstrassCurve& curve, std::int64_t X, SieveStats* stats = nullptr);
std::vector<IntegralPoint> sieve_search_parallel(const WeierstrassCurve& curve, std::int64_t X,
                                                 SieveStats* stats = nullptr);
inline std::vector<IntegralPoint> sieve_search(const WeierstrassCurve& curve, std::int64_t X)
{
    return sieve_search_parallel(curve, X);
}

/// ((2m+1)^r - 1) / 2.
std::uint64_t combination_count(unsigned r, unsigned m);

struct ComboStats {
    std::uint64_t combinations = 0; // nonzero coefficient vectors up to sign
    std::uint64_t evaluated = 0;    // combinations whose point was actually formed
    std::uint64_t exact_rechecks = 0;
};

/// Integral points sum n_i P_i with |n_i| <= m, one per sign class. With an
/// x bound, branches whose height forces |x| > x_bound are pruned.
std::vector<IntegralPoint> combo_search(const WeierstrassCurve& curve, const std::vector<RationalPoint>& generators,
                                        unsigned m, std::optional<Int> x_bound = std::nullopt,
                                        ComboStats* stats = nullptr);

/// Same combinations restricted to |x| <= x_max, evaluated in E(F_p) for
/// several primes of good reduction and lifted by CRT; every survivor is
/// checked exactly. An empty prime list selects primes just below 2^31.
/// Throws InsufficientModuli when the product of primes is <= 2 x_max.
std::vector<IntegralPoint> combo_search_modular(const WeierstrassCurve& curve,
                                                const std::vector<RationalPoint>& generators, unsigned m,
                                                const Int& x_max, std::vector<std::uint64_t> primes = {},
                                                ComboStats* stats = nullptr);

struct PointInventory {
    explicit PointInventory(WeierstrassCurve c) : curve(std::move(c)) {}
    WeierstrassCurve curve;
    std::vector<IntegralPoint> points; // sorted, one per x
    std::int64_t x_bound = 0;
    unsigned m = 0;
    std::size_t from_sieve = 0;
    std::size_t from_combinations = 0; // x values found only by combinations
    std::vector<RationalPoint> generators;
    std::size_t I() const { return points.size(); }
    std::vector<RationalPoint> rational_points() const;
};

struct InventoryOptions {
    unsigned rounds = 2;                     // basis / combination refinement rounds
    std::uint64_t max_exact_combinations = 20000000;
};

/// Sieve to |x| <= X, choose generators among the points found, then add
/// every integral combination with coefficients bounded by m.
PointInventory inventory(const WeierstrassCurve& curve, std::int64_t X, unsigned m, const InventoryOptions& options = {});

} // namespace rankforge
