#pragma once

#include "rankforge/curve.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rankforge {

/// Smallest h with |2b4| <= 4h^4 and |b6| <= 4h^6.
std::int64_t natural_height(const TwoTorsionModel& model);

struct CatchRateRow {
    TwoTorsionModel model;
    std::int64_t h = 0;
    std::size_t points = 0;          // box points with y >= 0
    std::uint64_t quadruples = 0;    // canonical quadruples over pairs, both signs of y2
    std::uint64_t in_range = 0;      // 1 <= r, t <= h
    std::vector<std::int64_t> U;
    std::vector<std::uint64_t> w_caught;    // in range and |W| <= 2h^4/U
    std::vector<std::uint64_t> fully_caught; // additionally accepted by the parity schedule

    double in_range_fraction() const { return quadruples ? double(in_range) / double(quadruples) : 0.0; }
    double w_catch(std::size_t i) const { return in_range ? double(w_caught[i]) / double(in_range) : 0.0; }
    double quadruple_catch(std::size_t i) const { return quadruples ? double(fully_caught[i]) / double(quadruples) : 0.0; }
};

/// Quadruple statistics for one 2-torsion model at height h (natural height by default).
CatchRateRow measure_catch_rate(const TwoTorsionModel& model, std::optional<std::int64_t> h = std::nullopt,
                                const std::vector<std::int64_t>& U = {1, 8, 32});

struct CatchRateSummary {
    std::vector<CatchRateRow> rows;
    double mean_in_range = 0.0;
    std::vector<double> mean_w_catch;
    std::vector<double> mean_quadruple_catch;
};

/// Per-curve rates averaged with equal weight per curve.
CatchRateSummary measure_catch_rates(const std::vector<WeierstrassCurve>& curves,
                                     std::optional<std::int64_t> h = std::nullopt,
                                     const std::vector<std::int64_t>& U = {1, 8, 32});

} // namespace rankforge
