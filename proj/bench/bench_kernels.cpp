// Serial reference kernels against their OpenMP counterparts.

#include "rankforge/points.hpp"
#include "rankforge/search_direct.hpp"
#include "rankforge/search_pair.hpp"

#include <benchmark/benchmark.h>

using namespace rankforge;

namespace {

SearchConfig direct_config()
{
    SearchConfig c;
    c.h = 10;
    c.b2 = 0;
    c.threshold = 8;
    return c;
}

constexpr std::int64_t kSlices = 64;

void BM_DirectSerial(benchmark::State& st)
{
    auto c = direct_config();
    for (auto _ : st) benchmark::DoNotOptimize(run_direct_serial(c, c.b4_hi() - kSlices + 1, c.b4_hi()));
    st.SetItemsProcessed(st.iterations() * kSlices);
}

void BM_DirectParallel(benchmark::State& st)
{
    auto c = direct_config();
    for (auto _ : st) benchmark::DoNotOptimize(run_direct_parallel(c, c.b4_hi() - kSlices + 1, c.b4_hi()));
    st.SetItemsProcessed(st.iterations() * kSlices);
}

PairSearchConfig pair_config()
{
    PairSearchConfig c;
    c.base = direct_config();
    c.base.h = 16;
    c.U = 1;
    return c;
}

void BM_PairSerial(benchmark::State& st)
{
    PairSearchContext ctx(pair_config());
    const auto hi = ctx.config.base.b4_hi();
    for (auto _ : st) benchmark::DoNotOptimize(run_pair_serial(ctx, hi - kSlices + 1, hi));
    st.SetItemsProcessed(st.iterations() * kSlices);
}

void BM_PairParallel(benchmark::State& st)
{
    PairSearchContext ctx(pair_config());
    const auto hi = ctx.config.base.b4_hi();
    for (auto _ : st) benchmark::DoNotOptimize(run_pair_parallel(ctx, hi - kSlices + 1, hi));
    st.SetItemsProcessed(st.iterations() * kSlices);
}

const WeierstrassCurve& record_curve()
{
    static const WeierstrassCurve c = WeierstrassCurve::parse("[0,0,1,-79,342]");
    return c;
}

void BM_SieveSerial(benchmark::State& st)
{
    for (auto _ : st) benchmark::DoNotOptimize(sieve_search_serial(record_curve(), st.range(0)));
    st.SetItemsProcessed(st.iterations() * 2 * st.range(0));
}

void BM_SieveParallel(benchmark::State& st)
{
    for (auto _ : st) benchmark::DoNotOptimize(sieve_search_parallel(record_curve(), st.range(0)));
    st.SetItemsProcessed(st.iterations() * 2 * st.range(0));
}

} // namespace

BENCHMARK(BM_DirectSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DirectParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SieveSerial)->Arg(1000000)->Arg(100000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SieveParallel)->Arg(1000000)->Arg(100000000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
