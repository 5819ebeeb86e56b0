#include "rankforge/search_direct.hpp"

#include "rankforge/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace rankforge {

namespace {

// Exact floor(sqrt(v)) for 0 <= v < 2^62.
std::int64_t isqrt64(std::int64_t v)
{
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

std::int64_t cubic_part(std::int64_t b2, std::int64_t b4, std::int64_t x)
{
    return 4 * x * x * x + b2 * x * x + 2 * b4 * x;
}

// LSD radix sort on 11-bit digits; only as many passes as `max_key` needs.
void radix_sort(std::vector<std::uint64_t>& keys, std::vector<std::uint64_t>& tmp, std::uint64_t max_key)
{
    constexpr unsigned bits = 11;
    constexpr std::size_t buckets = std::size_t{1} << bits;
    tmp.resize(keys.size());
    std::vector<std::size_t> count(buckets);
    for (unsigned shift = 0; shift < 64 && (max_key >> shift) != 0; shift += bits) {
        std::fill(count.begin(), count.end(), 0);
        for (auto k : keys) ++count[(k >> shift) & (buckets - 1)];
        std::size_t sum = 0;
        for (auto& c : count) {
            std::size_t n = c;
            c = sum;
            sum += n;
        }
        for (auto k : keys) tmp[count[(k >> shift) & (buckets - 1)]++] = k;
        keys.swap(tmp);
    }
}

struct Scratch {
    std::vector<std::uint64_t> keys, tmp;
};

std::vector<CandidateCurve> slice_kernel(const SearchConfig& cfg, std::int64_t b4, Scratch& s)
{
    std::vector<CandidateCurve> out;
    const unsigned mask = allowed_b6_residues(cfg.b2, b4, cfg.classes);
    if (mask == 0) return out;
    const std::int64_t X = cfg.x_bound(), Y = cfg.y_bound();

    // Bound on the cubic part; shifts keys nonnegative when b6 < 0 is allowed.
    const std::int64_t fmax = 4 * X * X * X + std::abs(cfg.b2) * X * X + 2 * std::abs(b4) * X;
    const std::int64_t offset = cfg.allow_negative_b6 ? fmax : 0;

    s.keys.clear();
    std::uint64_t max_key = 0;
    for (std::int64_t x = -X; x <= X; ++x) {
        const std::int64_t f = cubic_part(cfg.b2, b4, x);
        // y residues mod 4 that put b6 = y^2 - f into an allowed class mod 8.
        unsigned ymask = 0;
        for (int yr = 0; yr < 4; ++yr) {
            std::int64_t b6r = pos_mod(yr * yr - f, 8);
            if (mask & (1u << b6r)) ymask |= 1u << yr;
        }
        if (ymask == 0) continue;
        std::int64_t y0 = 0;
        if (!cfg.allow_negative_b6 && f > 0) {
            y0 = isqrt64(f);
            if (y0 * y0 < f) ++y0;
        }
        for (int yr = 0; yr < 4; ++yr) {
            if (!(ymask & (1u << yr))) continue;
            std::int64_t y = y0 + pos_mod(yr - y0, 4);
            for (; y <= Y; y += 4) {
                auto key = static_cast<std::uint64_t>(y * y - f + offset);
                s.keys.push_back(key);
                max_key = std::max(max_key, key);
            }
        }
    }
    radix_sort(s.keys, s.tmp, max_key);

    for (std::size_t i = 0; i < s.keys.size();) {
        std::size_t j = i;
        while (j < s.keys.size() && s.keys[j] == s.keys[i]) ++j;
        if (j - i >= cfg.threshold) {
            std::int64_t b6 = static_cast<std::int64_t>(s.keys[i]) - offset;
            TwoTorsionModel model{Int(from_int64(cfg.b2)), from_int64(b4), from_int64(b6)};
            if (!model.is_singular()) {
                CandidateCurve c;
                c.model = model;
                c.witnesses = box_points(cfg.b2, b4, b6, cfg.h);
                c.count = static_cast<unsigned>(c.witnesses.size());
                if (c.count != j - i) throw Error("internal: direct-search recount mismatch");
                out.push_back(std::move(c));
            }
        }
        i = j;
    }
    return out;
}

} // namespace

bool valid_b2(std::int64_t b2)
{
    return b2 == -4 || b2 == -3 || b2 == 0 || b2 == 1 || b2 == 4 || b2 == 5;
}

std::int64_t SearchConfig::b4_lo() const { return b4_min ? *b4_min : -2 * h * h * h * h; }
std::int64_t SearchConfig::b4_hi() const
{
    if (b4_max) return *b4_max;
    return allow_positive_b4 ? 2 * h * h * h * h : 0;
}

void SearchConfig::validate() const
{
    if (h < 2 || h > 200) throw DomainError("h must lie in [2, 200]");
    if (!valid_b2(b2)) throw DomainError("b2 must be one of -4, -3, 0, 1, 4, 5");
    if (threshold == 0) throw DomainError("threshold must be positive");
    if (b4_lo() > b4_hi()) throw DomainError("empty b4 range");
}

std::vector<IntegralPoint> box_points(std::int64_t b2, std::int64_t b4, std::int64_t b6, std::int64_t h)
{
    std::vector<IntegralPoint> pts;
    const std::int64_t X = h * h, Y = 2 * h * h * h;
    for (std::int64_t x = -X; x <= X; ++x) {
        std::int64_t v = cubic_part(b2, b4, x) + b6;
        if (v < 0) continue;
        std::int64_t y = isqrt64(v);
        if (y * y == v && y <= Y) pts.push_back({from_int64(x), from_int64(y)});
    }
    return pts;
}

std::vector<std::int64_t> direct_b4_values(const SearchConfig& config)
{
    std::vector<std::int64_t> out;
    for (std::int64_t b4 = config.b4_lo(); b4 <= config.b4_hi(); ++b4)
        if (allowed_b6_residues(config.b2, b4, config.classes) != 0) out.push_back(b4);
    return out;
}

std::vector<CandidateCurve> search_direct_slice(const SearchConfig& config, std::int64_t b4)
{
    Scratch s;
    return slice_kernel(config, b4, s);
}

std::vector<CandidateCurve> run_direct_serial(const SearchConfig& config, std::int64_t b4_lo, std::int64_t b4_hi)
{
    config.validate();
    Scratch s;
    std::vector<CandidateCurve> out;
    for (std::int64_t b4 = std::max(b4_lo, config.b4_lo()); b4 <= std::min(b4_hi, config.b4_hi()); ++b4) {
        auto part = slice_kernel(config, b4, s);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CandidateCurve> run_direct_parallel(const SearchConfig& config, std::int64_t b4_lo, std::int64_t b4_hi)
{
    config.validate();
    std::vector<std::int64_t> slices;
    for (std::int64_t b4 = std::max(b4_lo, config.b4_lo()); b4 <= std::min(b4_hi, config.b4_hi()); ++b4)
        if (allowed_b6_residues(config.b2, b4, config.classes) != 0) slices.push_back(b4);
    std::vector<std::vector<CandidateCurve>> parts(slices.size());
#pragma omp parallel
    {
        Scratch s;
#pragma omp for schedule(dynamic, 4)
        for (std::size_t i = 0; i < slices.size(); ++i) parts[i] = slice_kernel(config, slices[i], s);
    }
    std::vector<CandidateCurve> out;
    for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace rankforge
