#include <benchmark/benchmark.h>

#include <cmath>

#include "upspec/calibration.hpp"
#include "upspec/forward.hpp"
#include "upspec/noise.hpp"
#include "upspec/retrieval.hpp"
#include "upspec/rng.hpp"

using namespace upspec;

namespace {

struct Fixture {
    SourceModel src;
    VisibilityModel vis;
    AcquisitionConfig cfg;
    RetrievalConfig rc;
    Spectrum expected;

    Fixture() {
        rc.analysis_band = BandLimits{10840.11, 11092.62};
        expected = expected_frame(src, vis, SampleModel::flat(1.0), cfg);
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

} // namespace

static void BM_SimulateFrame(benchmark::State& state) {
    auto& f = fixture();
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto frame = apply_shot_noise(f.expected, f.cfg, seed++);
        benchmark::DoNotOptimize(frame.spectrum.values.data());
    }
}
BENCHMARK(BM_SimulateFrame);

static void BM_ForwardChain(benchmark::State& state) {
    auto& f = fixture();
    auto sample = synthetic_polymer_sample(Polymer::polypropylene);
    for (auto _ : state) {
        auto px = expected_frame(f.src, f.vis, sample, f.cfg);
        benchmark::DoNotOptimize(px.values.data());
    }
}
BENCHMARK(BM_ForwardChain);

static void BM_EnvelopeExtraction(benchmark::State& state) {
    auto& f = fixture();
    auto frame = apply_shot_noise(f.expected, f.cfg, 42);
    frame.opld_mm = f.vis.opld_mm;
    for (auto _ : state) {
        auto env = extract_envelope(frame, f.rc);
        benchmark::DoNotOptimize(env.spectrum.values.data());
    }
}
BENCHMARK(BM_EnvelopeExtraction);

static void BM_RetrievePair(benchmark::State& state) {
    auto& f = fixture();
    auto sample = synthetic_polymer_sample(Polymer::polystyrene);
    auto smp_expected = expected_frame(f.src, f.vis, sample, f.cfg);
    auto ref = apply_shot_noise(f.expected, f.cfg, 1);
    auto smp = apply_shot_noise(smp_expected, f.cfg, 2);
    ref.opld_mm = smp.opld_mm = f.vis.opld_mm;
    for (auto _ : state) {
        auto a = retrieve(smp, ref, f.rc);
        benchmark::DoNotOptimize(a.values.data());
    }
}
BENCHMARK(BM_RetrievePair);

static void BM_AllanCurve(benchmark::State& state) {
    const std::size_t n_frames = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    FrameSeries series;
    series.base_integration_time_s = 0.01;
    for (std::size_t k = 0; k < n_frames; ++k) {
        Spectrum f;
        f.axis_kind = AxisKind::wavenumber_cm1;
        for (int i = 0; i < 400; ++i) {
            f.axis.push_back(2800.0 + 0.5 * i);
            f.values.push_back(100.0 + rng.gaussian());
        }
        series.frames.push_back(std::move(f));
    }
    std::vector<double> taus{0.01, 0.02, 0.04, 0.08, 0.16};
    for (auto _ : state) {
        auto curve = allan_deviation(series, taus);
        benchmark::DoNotOptimize(curve.sigma_a.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AllanCurve)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

static void BM_GaussianFit(benchmark::State& state) {
    Spectrum seg;
    seg.axis_kind = AxisKind::wavenumber_cm1;
    Rng rng(5);
    for (int i = 0; i < 121; ++i) {
        const double x = 2975.0 + (i - 60) * 0.5;
        seg.axis.push_back(x);
        seg.values.push_back(1.0 - 0.4 * std::exp(-0.5 * (x - 2975.0) * (x - 2975.0) / 6.5) +
                             0.005 * rng.gaussian());
    }
    for (auto _ : state) {
        auto fit = gaussian_fwhm_fit(seg);
        benchmark::DoNotOptimize(&fit);
    }
}
BENCHMARK(BM_GaussianFit);

static void BM_PoissonSampling(benchmark::State& state) {
    Rng rng(11);
    const double mean = static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.poisson(mean));
    }
}
BENCHMARK(BM_PoissonSampling)->Arg(5)->Arg(500)->Arg(50000);

BENCHMARK_MAIN();
