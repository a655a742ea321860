#include <benchmark/benchmark.h>

#include "cpgibbs/diagnostics.hpp"
#include "cpgibbs/dimension.hpp"
#include "cpgibbs/engine.hpp"

using namespace cpgibbs;

namespace {

const sft::ProductAlphabet kPa{2, 3};

const thermo::GibbsModel& model() {
    static const auto g = [] {
        auto s = sft::full_shift(kPa.size());
        return thermo::GibbsModel::build(s, thermo::random_potential(s, 2, 17, 1.0));
    }();
    return g;
}

// Monte Carlo fan-out over paths: serial reference against the OpenMP kernel.
void BM_genericity(benchmark::State& state) {
    const auto params = encoding::make_adic_params(2, 3);
    diagnostics::TestFunctional f{diagnostics::IntervalSet({{0.2, 0.7}}), {1}, {}, {{{0}, {1}}}};
    diagnostics::RunOptions opts;
    opts.N = 20000;
    opts.paths = 8;
    opts.exec = state.range(0) ? Exec::Parallel : Exec::Serial;
    for (auto _ : state) benchmark::DoNotOptimize(diagnostics::genericity_check(model(), params, f, opts));
    state.SetLabel(state.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_genericity)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_local_dimension(benchmark::State& state) {
    const auto params = encoding::make_adic_params(2, 3);
    const Exec exec = state.range(0) ? Exec::Parallel : Exec::Serial;
    for (auto _ : state)
        benchmark::DoNotOptimize(dimension::measure_local_dimension(model(), params, 16, 1000, 3, exec));
    state.SetLabel(state.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_local_dimension)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// One scenery step at depth k: the full forward recursion against the sliding window.
void BM_conditional_reference(benchmark::State& state) {
    const auto params = encoding::make_adic_params(2, 3);
    const long long k = state.range(0);
    const auto path = thermo::sample_path(model(), static_cast<std::size_t>(k + 8), 5);
    const auto w = scenery::window_from_path(path, kPa, k, encoding::l_k(0.0, k, params));
    const scenery::QueryCylinder q{{1, 0}, {2}};
    for (auto _ : state) benchmark::DoNotOptimize(scenery::conditional_prob(model(), kPa, w, q));
}
BENCHMARK(BM_conditional_reference)->Arg(100)->Arg(1000)->Arg(10000);

void BM_conditional_engine(benchmark::State& state) {
    const auto params = encoding::make_adic_params(2, 3);
    const long long steps = state.range(0);
    const auto path = thermo::sample_path(model(), static_cast<std::size_t>(steps + 16), 5);
    const scenery::QueryCylinder q{{1, 0}, {2}};
    for (auto _ : state) {
        scenery::CpOrbit orbit(model(), kPa, params, path, 0.0, 2);
        double s = 0.0;
        for (long long k = 1; k <= steps; ++k) {
            orbit.advance_to(k);
            s += orbit.conditional(q);
        }
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_conditional_engine)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
