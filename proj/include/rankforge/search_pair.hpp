#pragma once

#include "rankforge/search_direct.hpp"

#include <cstdint>
#include <vector>

namespace rankforge {

/// x2 - x1 = r t, y2 - y1 = r s, y2 + y1 = t u.
struct Quadruple {
    std::int64_t r = 0, s = 0, t = 0, u = 0;
    friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

/// Canonical quadruple of a pair: points ordered so x1 < x2, r = gcd(y2-y1, x2-x1) > 0.
/// Note r <= t is not implied (the (7,3,6,2) example gives r = 4, t = 1).
/// Throws DegeneratePair when x1 == x2.
Quadruple quadruple_decompose(std::int64_t x1, std::int64_t y1, std::int64_t x2, std::int64_t y2);

/// W = 2 b4 + b2 z + 3 z^2 + l^2.
std::int64_t w_value(std::int64_t b2, std::int64_t b4, std::int64_t z, std::int64_t l);

enum class ScheduleKind {
    OddB2,        // r, t odd, r <= t
    EvenB2OddB6,  // r = 2 mod 4, t free (t >= r when t = 2 mod 4), restricted splits
    ZeroB2EvenB6, // r, t odd, r <= t, s = u = 2 mod 4
    Generic,      // b2 = +-4 with even b6: only r <= t and rs = tu mod 2
};

struct ParitySchedule {
    ScheduleKind kind = ScheduleKind::Generic;
    std::int64_t b2 = 0;
    int b6_parity = 0;

    bool pair_allowed(std::int64_t r, std::int64_t t, std::int64_t h) const;
    bool z_allowed(std::int64_t z, std::int64_t l) const;
    bool split_allowed(std::int64_t s, std::int64_t u, std::int64_t r, std::int64_t t) const;
    /// Full compliance test for a quadruple found on a curve.
    bool accepts(const Quadruple& q, std::int64_t z, std::int64_t h) const;
};

ParitySchedule parity_schedule(std::int64_t b2, int b6_parity);

/// Ordered splits (s, u) with s u = W satisfying the predicate, using a
/// least-prime-factor table when |W| is within its range.
class DivisorTable {
public:
    explicit DivisorTable(std::uint64_t limit);
    std::uint64_t limit() const { return lpf_.size() - 1; }
    /// Positive divisors of n (1 <= n <= limit), unsorted.
    void divisors(std::uint64_t n, std::vector<std::int64_t>& out) const;

private:
    std::vector<std::uint32_t> lpf_;
};

template <class Pred>
void divisor_splits(std::int64_t W, const DivisorTable& table, Pred&& keep, std::vector<std::int64_t>& divs,
                    std::vector<std::pair<std::int64_t, std::int64_t>>& out)
{
    out.clear();
    if (W == 0) return;
    table.divisors(static_cast<std::uint64_t>(W < 0 ? -W : W), divs);
    for (std::int64_t d : divs) {
        for (std::int64_t s : {d, -d}) {
            std::int64_t u = W / s;
            if (keep(s, u)) out.emplace_back(s, u);
        }
    }
}

/// Convenience overload; the predicate defaults to "any split".
std::vector<std::pair<std::int64_t, std::int64_t>> divisor_splits(std::int64_t W,
                                                                  const ParitySchedule* schedule = nullptr,
                                                                  std::int64_t r = 1, std::int64_t t = 1);

/// Square roots modulo a power of two, stored as a CSR list per residue.
/// Only roots <= root_limit are kept (all roots when root_limit >= modulus).
class SqrtTable {
public:
    SqrtTable(std::uint64_t modulus, std::uint64_t root_limit);
    std::uint64_t modulus() const { return modulus_; }
    const std::uint32_t* begin(std::uint64_t residue) const { return roots_.data() + start_[residue]; }
    const std::uint32_t* end(std::uint64_t residue) const { return roots_.data() + start_[residue + 1]; }
    std::vector<std::uint64_t> roots(std::uint64_t residue) const;

private:
    std::uint64_t modulus_;
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> roots_;
};

SqrtTable sqrt_table(unsigned L_plus_3);

struct PairSearchConfig {
    SearchConfig base;
    std::int64_t U = 1;
    unsigned L = 0;                   // 0 selects the default
    unsigned phase1_threshold = 10;   // counter hits needed to verify a class
    std::int64_t w_bound() const { return 2 * base.h * base.h * base.h * base.h / U; }
    unsigned effective_L() const;
    void validate() const;
};

/// floor(log2(h^4)), raised until 2^(L+3) > 2h^3.
unsigned default_L(std::int64_t h);

struct PairStats {
    std::uint64_t b4_slices = 0;
    std::uint64_t quadruples = 0;     // retained (b4, r, t, z, s, u) with admissible b6
    std::uint64_t classes_verified = 0;
    std::uint64_t candidates = 0;

    double classes_per_b4() const { return b4_slices ? double(classes_verified) / double(b4_slices) : 0.0; }
    PairStats& operator+=(const PairStats& o);
};

/// Phase 2: exact counts of box points in one b6 class mod 2^(L+3).
std::vector<CandidateCurve> verify_class(std::uint64_t b6_class, std::int64_t b4, const PairSearchConfig& config,
                                         const SqrtTable& roots);

/// Phase 1 counts per (b6 >> 3) mod 2^L for one b4 slice, before thresholding.
std::vector<std::uint16_t> phase1_counters(const PairSearchConfig& config, std::int64_t b4,
                                           const DivisorTable& divisors, PairStats* stats = nullptr);

struct PairSearchContext {
    explicit PairSearchContext(const PairSearchConfig& config);
    PairSearchConfig config;
    DivisorTable divisors;
    SqrtTable roots;
};

std::vector<CandidateCurve> search_pair_slice(const PairSearchContext& ctx, std::int64_t b4, PairStats* stats = nullptr);

std::vector<CandidateCurve> run_pair_serial(const PairSearchContext& ctx, std::int64_t b4_lo, std::int64_t b4_hi,
                                            PairStats* stats = nullptr);
std::vector<CandidateCurve> run_pair_parallel(const PairSearchContext& ctx, std::int64_t b4_lo, std::int64_t b4_hi,
                                              PairStats* stats = nullptr);

inline std::vector<CandidateCurve> run_pair(const PairSearchConfig& config, PairStats* stats = nullptr)
{
    PairSearchContext ctx(config);
    return run_pair_parallel(ctx, config.base.b4_lo(), config.base.b4_hi(), stats);
}

} // namespace rankforge
