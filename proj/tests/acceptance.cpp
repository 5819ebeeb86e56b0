// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "rankforge/catch_rate.hpp"
#include "rankforge/errors.hpp"
#include "rankforge/heights.hpp"
#include "rankforge/pipeline.hpp"
#include "rankforge/points.hpp"
#include "rankforge/published_tables.hpp"
#include "rankforge/records.hpp"
#include "rankforge/tate.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace rankforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int n, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %d: %s (%s) [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

RecordTable published_table()
{
    RecordTable t;
    for (const auto& d : published_conductor_dossiers()) t.insert(d);
    return t;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome invariants_of_published_rows()
{
    std::size_t ok = 0, total = 0;
    std::string bad;
    for (const auto& row : published_conductor_records()) {
        ++total;
        auto cd = conductor(WeierstrassCurve::parse(row.curve));
        if (cd.conductor == Int(row.conductor) && cd.delta_over_n == Int(row.delta_over_n))
            ++ok;
        else
            bad += std::string(" ") + row.curve;
    }
    for (const auto& row : published_discriminant_records()) {
        ++total;
        auto cd = conductor(WeierstrassCurve::parse(row.curve));
        if (abs(cd.minimal_discriminant) == Int(row.abs_discriminant))
            ++ok;
        else
            bad += std::string(" ") + row.curve;
    }
    return {ok == total && total == 65, std::to_string(ok) + "/" + std::to_string(total) + " rows match" + bad};
}

Outcome log_n_row()
{
    const auto row = lognew_row(published_table());
    const double want[] = {22.370, 26.670, 33.151, 38.008, 43.768, 51.246};
    bool pass = true;
    std::string detail;
    for (int r = 6; r <= 11; ++r) {
        const double got = row.at(r);
        pass = pass && std::fabs(got - want[r - 6]) <= 0.001;
        detail += fmt("r=%.0f %.3f ", r, got);
    }
    return {pass, detail + "tolerance 0.001"};
}

Outcome search_reproduction()
{
    const fs::path dir = "acceptance-run/search-h12";
    fs::remove_all(dir);
    RunConfig c;
    c.search.base.h = 12;
    c.search.base.b2 = 0;
    c.search.base.classes = ClassSet::parse("0,2,1");
    c.search.base.threshold = 10;
    c.x_bound = 100000;
    c.m = 2;
    c.verify_min_count = 23;
    auto s = run_pipeline(c, dir);
    const TwoTorsionModel want(0, -158, 1369);
    unsigned count = 0;
    for (const auto& cand : read_candidates(dir))
        if (cand.model == want) count = cand.count;
    bool found = false;
    read_jsonl(dir / "dossiers.jsonl", [&](const Json& j) {
        auto d = dossier_from_json(j);
        if (d.curve == WeierstrassCurve::parse("[0,0,1,-79,342]") && d.conductor == 19047851 && d.rank == 5)
            found = true;
    });
    std::string detail = std::to_string(s.candidates) + " candidates, model (0, -158, 1369) " +
                         (count ? "emitted with " + std::to_string(count) + " points" : "missing") + ", " +
                         std::to_string(s.dossiers) + " dossiers verified (count >= 23), record dossier N=19047851 r=5 " +
                         (found ? "present" : "missing");
    return {s.complete && count >= 10 && found, detail};
}

Outcome oracle_equivalence()
{
    using namespace rankforge::oracle;
    std::size_t direct_bad = 0, pair_missing = 0, pair_extra = 0, oracle_curves = 0, identity = 0, direct_total = 0;
    for (std::int64_t b2 : {-4, -3, 0, 1, 4, 5}) {
        PairSearchConfig cfg;
        cfg.base.h = 6;
        cfg.base.b2 = b2;
        cfg.base.threshold = 5;
        cfg.U = 1;
        cfg.L = 10;
        cfg.phase1_threshold = 1;
        const auto direct = naive_direct(cfg.base);
        const auto got = as_map(run_direct(cfg.base));
        direct_total += got.size();
        if (got != direct) ++direct_bad;
        const auto pair = as_map(run_pair(cfg));
        for (const auto& [k, n] : direct)
            if (has_compliant_pair(k, cached_boxes(cfg.base).at(k), cfg, identity)) {
                ++oracle_curves;
                if (!pair.count(k)) ++pair_missing;
            }
        for (const auto& [k, n] : pair)
            if (!direct.count(k) || direct.at(k) != n) ++pair_extra;
    }
    return {direct_bad == 0 && pair_missing == 0 && pair_extra == 0 && identity == 0,
            "h=6 threshold 5, all b2: direct mismatching b2 values " + std::to_string(direct_bad) + " over " +
                std::to_string(direct_total) + " candidates; pair misses " + std::to_string(pair_missing) + " of " +
                std::to_string(oracle_curves) + " compliant curves, " + std::to_string(pair_extra) +
                " outside the direct set"};
}

Outcome catch_rates()
{
    std::vector<WeierstrassCurve> curves;
    for (const auto& row : published_conductor_records())
        if (row.rank == 6) curves.push_back(WeierstrassCurve::parse(row.curve));
    auto s = measure_catch_rates(curves);
    for (const auto& r : s.rows)
        std::printf("  %s h=%lld quadruples=%llu in-range=%.3f b6-catch(U=1)=%.3f\n", r.model.to_string().c_str(),
                    static_cast<long long>(r.h), static_cast<unsigned long long>(r.quadruples), r.in_range_fraction(),
                    r.w_catch(0));
    for (std::int64_t h : {30, 40}) {
        auto f = measure_catch_rates(curves, h);
        std::printf("  reference at h=%lld: in-range=%.3f b6-catch U=1/8/32 = %.3f/%.3f/%.3f\n",
                    static_cast<long long>(h), f.mean_in_range, f.mean_w_catch[0], f.mean_w_catch[1],
                    f.mean_w_catch[2]);
    }
    const bool in_range_ok = std::fabs(s.mean_in_range - 0.18) <= 0.10;
    const bool catch_ok = std::fabs(s.mean_w_catch[0] - 0.83) <= 0.10;
    return {in_range_ok && catch_ok, fmt("natural height: in-range %.1f%% (want 18 +- 10), b6 catch at U=1 %.1f%% (want 83 +- 10)",
                                         100 * s.mean_in_range, 100 * s.mean_w_catch[0])};
}

Outcome integral_point_counts()
{
    const std::pair<const char*, std::size_t> cases[] = {{"[0,0,1,-79,342]", 39}, {"[0,0,1,-277,4566]", 49}};
    bool pass = true;
    std::string detail;
    for (const auto& [curve, want] : cases) {
        auto inv = inventory(WeierstrassCurve::parse(curve), 1000000000, 3);
        pass = pass && inv.I() >= want;
        detail += std::string(curve) + " I=" + std::to_string(inv.I()) + " (want " + std::to_string(want) + ")";
        if (inv.I() > want) detail += " warning: exceeds the published count";
        detail += "; ";
    }
    return {pass, detail + "X=1e9 m=3"};
}

Outcome rank_bounds()
{
    bool pass = true;
    std::string detail;
    int last = 0;
    for (const auto& row : published_conductor_records()) {
        if (row.rank == last || row.rank > 8) continue;
        last = row.rank;
        auto c = WeierstrassCurve::parse(row.curve);
        std::vector<RationalPoint> pts;
        for (const auto& p : sieve_search(c, 100000)) pts.emplace_back(Rat(p.x), Rat(p.y));
        auto ra = rank_lower_bound(c, pts);
        const double det = ra.gram.rows() ? ra.gram.determinant() : 0.0;
        pass = pass && ra.rank == row.rank && det > 1e-6;
        detail += std::string(row.curve) + fmt(" r=%.0f det=%.4g; ", ra.rank, det);
    }
    return {pass, detail + "sieve X=1e5"};
}

Outcome growth()
{
    auto table = published_table();
    auto data = growth_dataset(table, 1);
    auto lin = growth_fit(data, FitModel::Linear);
    auto pw = growth_fit(data, FitModel::Power);
    // The dataset is configurable; ranks 5-11 shown for comparison only.
    auto lin5 = growth_fit(growth_dataset(table, 5), FitModel::Linear);
    auto pw5 = growth_fit(growth_dataset(table, 5), FitModel::Power);
    std::printf("  reference on ranks 5-11: slope %.4f intercept %.4f exponent %.4f\n", lin5.slope, lin5.intercept,
                pw5.slope);
    bool bound_ok = true;
    for (const auto& [r, N] : data) bound_ok = bound_ok && grh_bsd_bound(N) >= r;
    for (const auto& d : published_conductor_dossiers()) bound_ok = bound_ok && grh_bsd_bound(d.conductor) >= d.rank;
    const bool pass = std::fabs(lin.slope - 0.865) <= 0.05 && std::fabs(lin.intercept + 0.126) <= 0.10 &&
                      std::fabs(pw.slope - 0.975) <= 0.05 && bound_ok;
    return {pass, fmt("ranks 1-11: slope %.4f (want 0.865 +- 0.05), intercept %.4f (want -0.126 +- 0.10), exponent %.4f "
                      "(want 0.975 +- 0.05), ",
                      lin.slope, lin.intercept, pw.slope) +
                      (bound_ok ? "GRH+BSD bound holds for every record" : "GRH+BSD bound violated")};
}

Outcome property_suites()
{
    std::mt19937_64 g(9);
    auto r = [&](long lo, long hi) { return lo + static_cast<long>(g() % static_cast<unsigned long>(hi - lo + 1)); };
    std::size_t identity_bad = 0;
    for (int i = 0; i < 10000; ++i) {
        Coefficients a{r(-50, 50), r(-50, 50), r(-50, 50), r(-100000, 100000), r(-10000000, 10000000)};
        auto inv = full_invariants(a);
        if (4 * inv.b8 != inv.b2 * inv.b6 - inv.b4 * inv.b4) ++identity_bad;
        if (inv.c4 * inv.c4 * inv.c4 - inv.c6 * inv.c6 != 1728 * inv.delta) ++identity_bad;
    }

    // Quadraticity and the parallelogram law on combinations of generators.
    const double eps = 1e-6;
    std::size_t height_bad = 0, height_checks = 0;
    for (const char* s : {"[0,1,1,-2,0]", "[0,0,1,-79,342]", "[1,1,0,-2582,48720]"}) {
        auto c = WeierstrassCurve::parse(s);
        HeightContext ctx(c);
        std::vector<RationalPoint> pts;
        for (const auto& p : sieve_search(c, 2000)) pts.emplace_back(Rat(p.x), Rat(p.y));
        auto gens = select_basis(c, pts).basis;
        auto random_point = [&]() {
            RationalPoint P;
            for (const auto& gen : gens) P = point_add(c, P, point_mul(c, r(-1, 1), gen));
            return P;
        };
        for (int i = 0; i < 20; ++i) {
            auto P = random_point(), Q = random_point();
            const long double hP = ctx.height(P), hQ = ctx.height(Q);
            const long double par =
                ctx.height(point_add(c, P, Q)) + ctx.height(point_add(c, P, point_negate(c, Q))) - 2 * hP - 2 * hQ;
            const long n = r(2, 4);
            const long double quad = ctx.height(point_mul(c, n, P)) - n * n * hP;
            height_checks += 2;
            if (std::fabs(static_cast<double>(par)) > eps) ++height_bad;
            if (std::fabs(static_cast<double>(quad)) > eps * n * n) ++height_bad;
        }
    }

    // Interrupted and resumed runs reproduce an uninterrupted one byte for byte.
    RunConfig cfg;
    cfg.search.base.h = 6;
    cfg.search.base.threshold = 5;
    cfg.search.base.b4_min = -600;
    cfg.partition_size = 16;
    cfg.x_bound = 2000;
    cfg.m = 2;
    cfg.verify_min_count = 13;
    const fs::path a = "acceptance-run/resume-straight", b = "acceptance-run/resume-interrupted";
    fs::remove_all(a);
    fs::remove_all(b);
    run_pipeline(cfg, a);
    RunControl stop;
    stop.stop_after_slices = 37;
    int interruptions = 0;
    while (!run_pipeline(cfg, b, stop).complete) ++interruptions;
    const bool same = slurp(a / "candidates.jsonl") == slurp(b / "candidates.jsonl") &&
                      slurp(a / "dossiers.jsonl") == slurp(b / "dossiers.jsonl");

    return {identity_bad == 0 && height_bad == 0 && same && interruptions > 0,
            "identity failures " + std::to_string(identity_bad) + " over 10^4 curves; height law failures " +
                std::to_string(height_bad) + "/" + std::to_string(height_checks) + " at eps 1e-6; resume after " +
                std::to_string(interruptions) + " interruptions " + (same ? "identical" : "DIFFERS")};
}

} // namespace

int main()
{
    run(1, invariants_of_published_rows);
    run(2, log_n_row);
    run(3, search_reproduction);
    run(4, oracle_equivalence);
    run(5, catch_rates);
    run(6, integral_point_counts);
    run(7, rank_bounds);
    run(8, growth);
    run(9, property_suites);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures ? 1 : 0;
}
