#pragma once

// Brute-force references shared by the search tests and the acceptance run.

#include "rankforge/search_direct.hpp"
#include "rankforge/search_pair.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace rankforge::oracle {

using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>; // b2, b4, b6
using Boxes = std::map<Key, std::vector<std::pair<std::int64_t, std::int64_t>>>;

inline Key key_of(const CandidateCurve& c)
{
    return {to_int64(c.model.b2), to_int64(c.model.b4), to_int64(c.model.b6)};
}

inline std::map<Key, unsigned> as_map(const std::vector<CandidateCurve>& cs)
{
    std::map<Key, unsigned> out;
    for (const auto& c : cs) out[key_of(c)] = c.count;
    return out;
}

// Box points of every (b4, b6) reached at least `min_count` times, by brute force.
inline Boxes naive_box_counts(const SearchConfig& cfg, unsigned min_count)
{
    Boxes out;
    const std::int64_t X = cfg.h * cfg.h, Y = 2 * cfg.h * cfg.h * cfg.h;
    std::vector<std::array<std::int64_t, 3>> hits;
    for (std::int64_t b4 = cfg.b4_lo(); b4 <= cfg.b4_hi(); ++b4) {
        hits.clear();
        for (std::int64_t x = -X; x <= X; ++x)
            for (std::int64_t y = 0; y <= Y; ++y) {
                const std::int64_t b6 = y * y - (4 * x * x * x + cfg.b2 * x * x + 2 * b4 * x);
                if (b6 < 0 && !cfg.allow_negative_b6) continue;
                hits.push_back({b6, x, y});
            }
        std::sort(hits.begin(), hits.end());
        for (std::size_t i = 0, j = 0; i < hits.size(); i = j) {
            while (j < hits.size() && hits[j][0] == hits[i][0]) ++j;
            if (j - i < min_count) continue;
            auto& v = out[{cfg.b2, b4, hits[i][0]}];
            for (std::size_t k = i; k < j; ++k) v.push_back({hits[k][1], hits[k][2]});
        }
    }
    return out;
}

// The enumerations are shared by the direct and pair oracles.
inline const Boxes& cached_boxes(const SearchConfig& cfg)
{
    static std::map<std::string, Boxes> cache;
    const std::string key = std::to_string(cfg.h) + "/" + std::to_string(cfg.b2) + "/" + std::to_string(cfg.threshold) +
                            "/" + std::to_string(cfg.b4_lo()) + "/" + std::to_string(cfg.b4_hi()) + "/" +
                            std::to_string(cfg.allow_negative_b6);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, naive_box_counts(cfg, cfg.threshold)).first;
    return it->second;
}

inline std::map<Key, unsigned> naive_direct(const SearchConfig& cfg)
{
    std::map<Key, unsigned> out;
    for (const auto& [k, pts] : cached_boxes(cfg)) {
        auto [b2, b4, b6] = k;
        if (!passes_congruence_filters(b2, b4, b6, cfg.classes)) continue;
        if (TwoTorsionModel{b2, b4, b6}.is_singular()) continue;
        out[k] = static_cast<unsigned>(pts.size());
    }
    return out;
}

// A pair is compliant when its canonical quadruple passes every documented
// restriction for the curve's b2 and b6 parity: 1 <= r, t <= h, the parity
// schedule, and 0 < |W| <= 2h^4/U.
inline bool has_compliant_pair(const Key& k, const std::vector<std::pair<std::int64_t, std::int64_t>>& pts,
                               const PairSearchConfig& cfg, std::size_t& identity_failures)
{
    auto [b2, b4, b6] = k;
    const ParitySchedule sch = parity_schedule(b2, static_cast<int>(b6 & 1));
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            auto [x1, y1] = pts[i];
            auto [x2, y2] = pts[j];
            if (x1 >= x2) continue;
            for (std::int64_t sign : {1, -1}) {
                for (std::int64_t sign1 : {1, -1}) {
                    Quadruple q = quadruple_decompose(x1, sign1 * y1, x2, sign * y2);
                    const std::int64_t z = x1 + x2, l = x2 - x1;
                    const std::int64_t W = w_value(b2, b4, z, l);
                    if (W != q.s * q.u) ++identity_failures;
                    if (W == 0 || W > cfg.w_bound() || W < -cfg.w_bound()) continue;
                    if (sch.accepts(q, z, cfg.base.h)) return true;
                }
            }
        }
    return false;
}

} // namespace rankforge::oracle
