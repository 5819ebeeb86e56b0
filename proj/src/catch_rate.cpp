#include "rankforge/catch_rate.hpp"

#include "rankforge/errors.hpp"
#include "rankforge/search_direct.hpp"
#include "rankforge/search_pair.hpp"

#include <cmath>

namespace rankforge {

std::int64_t natural_height(const TwoTorsionModel& model)
{
    const double b4 = std::fabs(model.b4.get_d()), b6 = std::fabs(model.b6.get_d());
    auto h = static_cast<std::int64_t>(std::ceil(std::max(std::pow(b4 / 2, 0.25), std::pow(b6 / 4, 1.0 / 6))));
    // Guard against rounding at exact powers.
    auto fits = [&](std::int64_t k) {
        const Int k4 = ipow(Int(static_cast<long>(k)), 4);
        return abs(model.b4) <= 2 * k4 && abs(model.b6) <= 4 * k4 * k * k;
    };
    while (h > 1 && fits(h - 1)) --h;
    while (!fits(h)) ++h;
    return std::max<std::int64_t>(h, 2);
}

CatchRateRow measure_catch_rate(const TwoTorsionModel& model, std::optional<std::int64_t> h_opt,
                                const std::vector<std::int64_t>& U)
{
    if (!fits_int64(model.b2) || !fits_int64(model.b4) || !fits_int64(model.b6))
        throw DomainError("catch-rate measurement needs 64-bit invariants");
    CatchRateRow row{model, h_opt ? *h_opt : natural_height(model), 0, 0, 0, U, {}, {}};
    const std::int64_t h = row.h;
    const std::int64_t b2 = to_int64(model.b2), b4 = to_int64(model.b4), b6 = to_int64(model.b6);
    row.w_caught.assign(U.size(), 0);
    row.fully_caught.assign(U.size(), 0);
    const auto pts = box_points(b2, b4, b6, h);
    row.points = pts.size();
    const ParitySchedule sched = parity_schedule(b2, static_cast<int>(b6 & 1));
    const std::int64_t h4 = h * h * h * h;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const std::int64_t x1 = to_int64(pts[i].x), y1 = to_int64(pts[i].y);
            const std::int64_t x2 = to_int64(pts[j].x), y2 = to_int64(pts[j].y);
            for (std::int64_t sign : {1, -1}) {
                if (sign < 0 && y2 == 0) continue;
                const Quadruple q = quadruple_decompose(x1, y1, x2, sign * y2);
                ++row.quadruples;
                if (q.r < 1 || q.t < 1 || q.r > h || q.t > h) continue;
                ++row.in_range;
                const std::int64_t z = x1 + x2;
                const std::int64_t W = w_value(b2, b4, z, q.r * q.t);
                const bool schedule_ok = sched.accepts(q, z, h);
                for (std::size_t k = 0; k < U.size(); ++k) {
                    if (std::abs(W) > 2 * h4 / U[k]) continue;
                    ++row.w_caught[k];
                    if (schedule_ok) ++row.fully_caught[k];
                }
            }
        }
    }
    return row;
}

CatchRateSummary measure_catch_rates(const std::vector<WeierstrassCurve>& curves, std::optional<std::int64_t> h,
                                     const std::vector<std::int64_t>& U)
{
    CatchRateSummary out;
    out.mean_w_catch.assign(U.size(), 0.0);
    out.mean_quadruple_catch.assign(U.size(), 0.0);
    for (const auto& c : curves) out.rows.push_back(measure_catch_rate(two_torsion_model(c), h, U));
    if (out.rows.empty()) return out;
    const auto n = static_cast<double>(out.rows.size());
    for (const auto& r : out.rows) {
        out.mean_in_range += r.in_range_fraction() / n;
        for (std::size_t k = 0; k < U.size(); ++k) {
            out.mean_w_catch[k] += r.w_catch(k) / n;
            out.mean_quadruple_catch[k] += r.quadruple_catch(k) / n;
        }
    }
    return out;
}

} // namespace rankforge
