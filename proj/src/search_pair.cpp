#include "rankforge/search_pair.hpp"

#include "rankforge/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>

namespace rankforge {

namespace {

std::int64_t cubic_part(std::int64_t b2, std::int64_t b4, std::int64_t x)
{
    return 4 * x * x * x + b2 * x * x + 2 * b4 * x;
}

bool odd(std::int64_t v) { return (v & 1) != 0; }
std::int64_t m4(std::int64_t v) { return pos_mod(v, 4); }

struct WorkerState {
    std::vector<std::int64_t> divs;
    std::vector<std::pair<std::int64_t, std::int64_t>> splits;
};

std::vector<ParitySchedule> slice_schedules(std::int64_t b2, unsigned mask)
{
    std::vector<ParitySchedule> out;
    const unsigned even = 0x55, odd_mask = 0xAA;
    if (mask & even) out.push_back(parity_schedule(b2, 0));
    if (mask & odd_mask) out.push_back(parity_schedule(b2, 1));
    return out;
}

void count_slice(const PairSearchConfig& cfg, std::int64_t b4, const DivisorTable& table,
                 std::vector<std::uint16_t>& counters, PairStats& stats, WorkerState& ws)
{
    const SearchConfig& base = cfg.base;
    const std::int64_t h = base.h, X = base.x_bound(), wb = cfg.w_bound();
    const unsigned L = cfg.effective_L();
    const std::uint64_t idx_mask = (std::uint64_t{1} << L) - 1;
    const unsigned mask = allowed_b6_residues(base.b2, b4, base.classes);
    // Any b6 with a box point lies within these bounds.
    const __int128 b6_hi = 12 * __int128(h * h * h) * (h * h * h) + 5 * __int128(h * h) * (h * h);
    const __int128 b6_lo = base.allow_negative_b6 ? -b6_hi : 0;

    for (const ParitySchedule& sch : slice_schedules(base.b2, mask)) {
        for (std::int64_t r = 1; r <= h; ++r) {
            for (std::int64_t t = 1; t <= h; ++t) {
                if (!sch.pair_allowed(r, t, h)) continue;
                const std::int64_t l = r * t;
                for (std::int64_t x2 = -X; x2 <= X; ++x2) {
                    const std::int64_t z = 2 * x2 - l;
                    if (!sch.z_allowed(z, l)) continue;
                    const std::int64_t W = w_value(base.b2, b4, z, l);
                    if (W == 0 || W > wb || W < -wb) continue;
                    divisor_splits(
                        W, table, [&](std::int64_t s, std::int64_t u) { return sch.split_allowed(s, u, r, t); },
                        ws.divs, ws.splits);
                    const std::int64_t f = cubic_part(base.b2, b4, x2);
                    for (auto [s, u] : ws.splits) {
                        const __int128 y2 = (__int128(r) * s + __int128(t) * u) / 2;
                        const __int128 b6w = y2 * y2 - f;
                        if (b6w < b6_lo || b6w > b6_hi) continue;
                        const auto b6 = static_cast<std::int64_t>(b6w);
                        const unsigned res = static_cast<unsigned>(b6 & 7);
                        if (!((mask >> res) & 1u) || int(res & 1u) != sch.b6_parity) continue;
                        auto& c = counters[static_cast<std::uint64_t>(b6 >> 3) & idx_mask];
                        if (c != 0xFFFF) ++c;
                        ++stats.quadruples;
                    }
                }
            }
        }
    }
}

std::vector<CandidateCurve> slice_impl(const PairSearchContext& ctx, std::int64_t b4, PairStats& stats,
                                       std::vector<std::uint16_t>& counters, WorkerState& ws)
{
    const PairSearchConfig& cfg = ctx.config;
    const unsigned L = cfg.effective_L();
    counters.assign(std::size_t{1} << L, 0);
    ++stats.b4_slices;
    std::vector<CandidateCurve> out;
    const unsigned mask = allowed_b6_residues(cfg.base.b2, b4, cfg.base.classes);
    if (mask == 0) return out;
    count_slice(cfg, b4, ctx.divisors, counters, stats, ws);
    for (std::uint64_t i = 0; i < counters.size(); ++i) {
        if (counters[i] < cfg.phase1_threshold) continue;
        for (unsigned rho = 0; rho < 8; ++rho) {
            if (!((mask >> rho) & 1u)) continue;
            ++stats.classes_verified;
            auto found = verify_class(8 * i + rho, b4, cfg, ctx.roots);
            stats.candidates += found.size();
            out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
        }
    }
    return out;
}

} // namespace

Quadruple quadruple_decompose(std::int64_t x1, std::int64_t y1, std::int64_t x2, std::int64_t y2)
{
    if (x1 == x2) throw DegeneratePair();
    if (x1 > x2) {
        std::swap(x1, x2);
        std::swap(y1, y2);
    }
    Quadruple q;
    q.r = std::gcd(y2 - y1, x2 - x1);
    q.t = (x2 - x1) / q.r;
    q.s = (y2 - y1) / q.r;
    if ((y2 + y1) % q.t != 0) throw Error("internal: quadruple not integral");
    q.u = (y2 + y1) / q.t;
    return q;
}

std::int64_t w_value(std::int64_t b2, std::int64_t b4, std::int64_t z, std::int64_t l)
{
    return 2 * b4 + b2 * z + 3 * z * z + l * l;
}

ParitySchedule parity_schedule(std::int64_t b2, int b6_parity)
{
    ParitySchedule s;
    s.b2 = b2;
    s.b6_parity = b6_parity & 1;
    if (odd(b2))
        s.kind = ScheduleKind::OddB2;
    else if (s.b6_parity == 1)
        s.kind = ScheduleKind::EvenB2OddB6;
    else if (b2 == 0)
        s.kind = ScheduleKind::ZeroB2EvenB6;
    else
        s.kind = ScheduleKind::Generic;
    return s;
}

bool ParitySchedule::pair_allowed(std::int64_t r, std::int64_t t, std::int64_t h) const
{
    if (r < 1 || t < 1 || r > h || t > h) return false;
    switch (kind) {
    case ScheduleKind::OddB2:
    case ScheduleKind::ZeroB2EvenB6: return odd(r) && odd(t) && r <= t;
    case ScheduleKind::EvenB2OddB6: return m4(r) == 2 && (m4(t) != 2 || t >= r);
    case ScheduleKind::Generic: return r <= t;
    }
    return false;
}

bool ParitySchedule::z_allowed(std::int64_t z, std::int64_t l) const
{
    switch (kind) {
    case ScheduleKind::OddB2:
    case ScheduleKind::ZeroB2EvenB6: return odd(z) && odd(l);
    case ScheduleKind::EvenB2OddB6:
        if (odd(z) || odd(l)) return false;
        return b2 == 0 ? m4(z) == m4(l) : m4(z) != m4(l);
    case ScheduleKind::Generic: return true;
    }
    return false;
}

bool ParitySchedule::split_allowed(std::int64_t s, std::int64_t u, std::int64_t r, std::int64_t t) const
{
    if (odd(r * s) != odd(t * u)) return false;
    switch (kind) {
    case ScheduleKind::OddB2:
    case ScheduleKind::Generic: return true;
    case ScheduleKind::ZeroB2EvenB6: return m4(s) == 2 && m4(u) == 2;
    case ScheduleKind::EvenB2OddB6:
        if (odd(s) && m4(u) == 0) return true;
        if (odd(t) && !odd(s) && !odd(u)) return true;
        return m4(t) == 2 && m4(s) == 0 && odd(u);
    }
    return false;
}

bool ParitySchedule::accepts(const Quadruple& q, std::int64_t z, std::int64_t h) const
{
    return pair_allowed(q.r, q.t, h) && z_allowed(z, q.r * q.t) && split_allowed(q.s, q.u, q.r, q.t);
}

DivisorTable::DivisorTable(std::uint64_t limit) : lpf_(limit + 1, 0)
{
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (lpf_[i] != 0) continue;
        for (std::uint64_t j = i; j <= limit; j += i)
            if (lpf_[j] == 0) lpf_[j] = static_cast<std::uint32_t>(i);
    }
}

void DivisorTable::divisors(std::uint64_t n, std::vector<std::int64_t>& out) const
{
    out.assign(1, 1);
    auto extend = [&](std::uint64_t p, unsigned e) {
        std::size_t base = out.size();
        std::int64_t pk = 1;
        for (unsigned k = 0; k < e; ++k) {
            pk *= static_cast<std::int64_t>(p);
            for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
        }
    };
    if (n <= limit()) {
        while (n > 1) {
            std::uint64_t p = lpf_[n];
            unsigned e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            extend(p, e);
        }
        return;
    }
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) extend(p, e);
    }
    if (n > 1) extend(n, 1);
}

std::vector<std::pair<std::int64_t, std::int64_t>> divisor_splits(std::int64_t W, const ParitySchedule* schedule,
                                                                  std::int64_t r, std::int64_t t)
{
    std::uint64_t a = static_cast<std::uint64_t>(W < 0 ? -W : W);
    DivisorTable table(std::min<std::uint64_t>(a, 1u << 20));
    std::vector<std::int64_t> divs;
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    divisor_splits(
        W, table,
        [&](std::int64_t s, std::int64_t u) { return schedule == nullptr || schedule->split_allowed(s, u, r, t); },
        divs, out);
    std::sort(out.begin(), out.end());
    return out;
}

SqrtTable::SqrtTable(std::uint64_t modulus, std::uint64_t root_limit) : modulus_(modulus), start_(modulus + 1, 0)
{
    if (modulus == 0 || modulus > (std::uint64_t{1} << 32)) throw DomainError("square-root table modulus out of range");
    const std::uint64_t top = std::min(root_limit, modulus - 1);
    for (std::uint64_t y = 0; y <= top; ++y) ++start_[(y * y) % modulus + 1];
    for (std::uint64_t i = 1; i <= modulus; ++i) start_[i] += start_[i - 1];
    roots_.resize(start_[modulus]);
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::uint64_t y = 0; y <= top; ++y) roots_[fill[(y * y) % modulus]++] = static_cast<std::uint32_t>(y);
}

std::vector<std::uint64_t> SqrtTable::roots(std::uint64_t residue) const
{
    return std::vector<std::uint64_t>(begin(residue % modulus_), end(residue % modulus_));
}

SqrtTable sqrt_table(unsigned L_plus_3)
{
    if (L_plus_3 < 3 || L_plus_3 > 32) throw DomainError("square-root table exponent out of range");
    std::uint64_t m = std::uint64_t{1} << L_plus_3;
    return SqrtTable(m, m - 1);
}

unsigned default_L(std::int64_t h)
{
    const std::uint64_t h4 = static_cast<std::uint64_t>(h) * h * h * h;
    unsigned L = 3;
    while ((std::uint64_t{1} << (L + 1)) <= h4) ++L;
    while ((std::uint64_t{1} << (L + 3)) <= static_cast<std::uint64_t>(2 * h * h * h)) ++L;
    return L;
}

unsigned PairSearchConfig::effective_L() const { return L == 0 ? default_L(base.h) : L; }

void PairSearchConfig::validate() const
{
    base.validate();
    if (U < 1) throw DomainError("U must be positive");
    unsigned l = effective_L();
    if (l < 3 || l > 29) throw DomainError("L must lie in [3, 29]");
    if ((std::uint64_t{1} << (l + 3)) <= static_cast<std::uint64_t>(base.y_bound()))
        throw DomainError("2^(L+3) must exceed 2h^3");
    if (phase1_threshold == 0) throw DomainError("phase-1 threshold must be positive");
}

PairStats& PairStats::operator+=(const PairStats& o)
{
    b4_slices += o.b4_slices;
    quadruples += o.quadruples;
    classes_verified += o.classes_verified;
    candidates += o.candidates;
    return *this;
}

std::vector<CandidateCurve> verify_class(std::uint64_t b6_class, std::int64_t b4, const PairSearchConfig& config,
                                         const SqrtTable& roots)
{
    const SearchConfig& base = config.base;
    const std::int64_t X = base.x_bound(), Y = base.y_bound();
    const auto M = static_cast<std::int64_t>(roots.modulus());
    struct Hit {
        std::int64_t b6, x, y;
        bool operator<(const Hit& o) const { return b6 != o.b6 ? b6 < o.b6 : x < o.x; }
    };
    std::vector<Hit> hits;
    const std::int64_t c = pos_mod(static_cast<std::int64_t>(b6_class), M);
    for (std::int64_t x = -X; x <= X; ++x) {
        const std::int64_t f = cubic_part(base.b2, b4, x);
        const auto res = static_cast<std::uint64_t>(pos_mod(pos_mod(f, M) + c, M));
        for (const std::uint32_t* p = roots.begin(res); p != roots.end(res); ++p) {
            const std::int64_t y = *p;
            if (y > Y) continue;
            const std::int64_t b6 = y * y - f;
            if (b6 < 0 && !base.allow_negative_b6) continue;
            hits.push_back({b6, x, y});
        }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<CandidateCurve> out;
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t j = i;
        while (j < hits.size() && hits[j].b6 == hits[i].b6) ++j;
        const std::int64_t b6 = hits[i].b6;
        if (j - i >= base.threshold && passes_congruence_filters(base.b2, b4, b6, base.classes)) {
            TwoTorsionModel model{from_int64(base.b2), from_int64(b4), from_int64(b6)};
            if (!model.is_singular()) {
                CandidateCurve cand;
                cand.model = model;
                for (std::size_t k = i; k < j; ++k)
                    cand.witnesses.push_back({from_int64(hits[k].x), from_int64(hits[k].y)});
                cand.count = static_cast<unsigned>(j - i);
                out.push_back(std::move(cand));
            }
        }
        i = j;
    }
    return out;
}

std::vector<std::uint16_t> phase1_counters(const PairSearchConfig& config, std::int64_t b4,
                                           const DivisorTable& divisors, PairStats* stats)
{
    std::vector<std::uint16_t> counters(std::size_t{1} << config.effective_L(), 0);
    PairStats local;
    WorkerState ws;
    if (allowed_b6_residues(config.base.b2, b4, config.base.classes) != 0)
        count_slice(config, b4, divisors, counters, local, ws);
    if (stats) *stats += local;
    return counters;
}

PairSearchContext::PairSearchContext(const PairSearchConfig& cfg)
    : config(cfg),
      divisors((cfg.validate(), static_cast<std::uint64_t>(std::max<std::int64_t>(cfg.w_bound(), 1)))),
      roots(std::uint64_t{1} << (cfg.effective_L() + 3), static_cast<std::uint64_t>(cfg.base.y_bound()))
{
}

std::vector<CandidateCurve> search_pair_slice(const PairSearchContext& ctx, std::int64_t b4, PairStats* stats)
{
    PairStats local;
    std::vector<std::uint16_t> counters;
    WorkerState ws;
    auto out = slice_impl(ctx, b4, local, counters, ws);
    if (stats) *stats += local;
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CandidateCurve> run_pair_serial(const PairSearchContext& ctx, std::int64_t b4_lo, std::int64_t b4_hi,
                                            PairStats* stats)
{
    const SearchConfig& base = ctx.config.base;
    PairStats local;
    std::vector<std::uint16_t> counters;
    WorkerState ws;
    std::vector<CandidateCurve> out;
    for (std::int64_t b4 = std::max(b4_lo, base.b4_lo()); b4 <= std::min(b4_hi, base.b4_hi()); ++b4) {
        if (allowed_b6_residues(base.b2, b4, base.classes) == 0) continue;
        auto part = slice_impl(ctx, b4, local, counters, ws);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    if (stats) *stats += local;
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CandidateCurve> run_pair_parallel(const PairSearchContext& ctx, std::int64_t b4_lo, std::int64_t b4_hi,
                                              PairStats* stats)
{
    const SearchConfig& base = ctx.config.base;
    std::vector<std::int64_t> slices;
    for (std::int64_t b4 = std::max(b4_lo, base.b4_lo()); b4 <= std::min(b4_hi, base.b4_hi()); ++b4)
        if (allowed_b6_residues(base.b2, b4, base.classes) != 0) slices.push_back(b4);
    std::vector<std::vector<CandidateCurve>> parts(slices.size());
    PairStats total;
#pragma omp parallel
    {
        PairStats local;
        std::vector<std::uint16_t> counters;
        WorkerState ws;
#pragma omp for schedule(dynamic, 1)
        for (std::size_t i = 0; i < slices.size(); ++i) parts[i] = slice_impl(ctx, slices[i], local, counters, ws);
#pragma omp critical(rankforge_pair_stats)
        total += local;
    }
    if (stats) *stats += total;
    std::vector<CandidateCurve> out;
    for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace rankforge
