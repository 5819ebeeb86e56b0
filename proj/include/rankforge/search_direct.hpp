#pragma once

#include "rankforge/congruence.hpp"
#include "rankforge/curve.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rankforge {

struct SearchConfig {
    std::int64_t h = 12;
    std::int64_t b2 = 0;
    ClassSet classes;
    unsigned threshold = 10;
    // Inclusive b4 range; defaults to [-2h^4, 0] (or [-2h^4, 2h^4] with positive b4 allowed).
    std::optional<std::int64_t> b4_min, b4_max;
    bool allow_positive_b4 = false;
    bool allow_negative_b6 = false;

    std::int64_t x_bound() const { return h * h; }
    std::int64_t y_bound() const { return 2 * h * h * h; }
    std::int64_t b4_lo() const;
    std::int64_t b4_hi() const;
    /// Throws DomainError for h outside [2, 200] or b2 outside {-4,-3,0,1,4,5}.
    void validate() const;
};

struct CandidateCurve {
    TwoTorsionModel model;
    unsigned count = 0;
    std::vector<IntegralPoint> witnesses; // on the 2-torsion model, y >= 0

    friend bool operator<(const CandidateCurve& l, const CandidateCurve& r)
    {
        if (l.model.b4 != r.model.b4) return l.model.b4 < r.model.b4;
        if (l.model.b6 != r.model.b6) return l.model.b6 < r.model.b6;
        return l.model.b2 < r.model.b2;
    }
};

bool valid_b2(std::int64_t b2);

/// Box points of y^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 with |x| <= h^2, 0 <= y <= 2h^3.
std::vector<IntegralPoint> box_points(std::int64_t b2, std::int64_t b4, std::int64_t b6, std::int64_t h);

/// b4 values in the configured range whose slice can produce an admissible b6.
std::vector<std::int64_t> direct_b4_values(const SearchConfig& config);

/// One b4 slice: every admissible b6 reached at least `threshold` times.
std::vector<CandidateCurve> search_direct_slice(const SearchConfig& config, std::int64_t b4);

/// All slices in [b4_lo, b4_hi] (intersected with the config range), sorted.
std::vector<CandidateCurve> run_direct_serial(const SearchConfig& config, std::int64_t b4_lo, std::int64_t b4_hi);
std::vector<CandidateCurve> run_direct_parallel(const SearchConfig& config, std::int64_t b4_lo, std::int64_t b4_hi);

inline std::vector<CandidateCurve> run_direct(const SearchConfig& config)
{
    return run_direct_parallel(config, config.b4_lo(), config.b4_hi());
}

} // namespace rankforge
