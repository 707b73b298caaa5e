// Acceptance suite: one test case per release criterion, each printing a
// single PASS/FAIL line. Thresholds are fixed here, not tuned at run time.

#include <doctest.h>

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <vector>

#include "upspec/calibration.hpp"
#include "upspec/crystal.hpp"
#include "upspec/envelope.hpp"
#include "upspec/forward.hpp"
#include "upspec/io.hpp"
#include "upspec/noise.hpp"
#include "upspec/polymer.hpp"
#include "upspec/retrieval.hpp"
#include "upspec/rng.hpp"

using namespace upspec;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << "criterion " << criterion << ": " << (pass ? "PASS" : "FAIL") << " - "
              << detail << "\n";
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// Shared operating point: calibrated instrument at 1.45 mm and 10 ms.
struct OperatingPoint {
    SourceModel src;
    VisibilityModel vis;
    AcquisitionConfig cfg;
    RetrievalConfig rc;

    OperatingPoint() {
        rc.analysis_band = BandLimits{10840.11, 11092.62};
        rc.baseline_regions.clear();
    }

    Interferogram averaged(const SampleModel& sample, std::size_t n, std::uint64_t seed) const {
        AcquisitionConfig c = cfg;
        c.rng_seed = seed;
        auto burst = simulate_burst(src, vis, sample, c, n);
        return average_frames(burst);
    }
};

FrameSeries envelope_burst(const OperatingPoint& op, std::size_t n_frames, std::uint64_t seed,
                           const BurstOptions& opts = {}) {
    AcquisitionConfig c = op.cfg;
    c.rng_seed = seed;
    auto frames = simulate_burst(op.src, op.vis, SampleModel::flat(1.0), c, n_frames, opts);
    const double nu_p = op.src.pump_wavenumber();
    FrameSeries series;
    series.base_integration_time_s = c.integration_time_s;
    series.frames.reserve(n_frames);
    for (const auto& frame : frames) {
        const Envelope env = extract_envelope(frame, op.rc);
        Spectrum idler;
        idler.axis_kind = AxisKind::wavenumber_cm1;
        const std::size_t n = env.spectrum.size();
        idler.axis.resize(n);
        idler.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            idler.axis[i] = nu_p - env.spectrum.axis[n - 1 - i];
            idler.values[i] = env.spectrum.values[n - 1 - i];
        }
        series.frames.push_back(std::move(idler));
    }
    return series;
}

AllanConfig nominal_allan_config() {
    AllanConfig cfg;
    cfg.exclude = {BandLimits{2850.0, 2925.0}};
    return cfg;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(UPSPEC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("criterion 1: envelope oracle") {
    Timer timer;
    double worst = 0.0;
    const std::size_t n = 2048;
    const double nu_lo = 10834.236, nu_hi = 11098.779;
    for (double opld : {0.5, 1.45}) {
        auto filter = EnvelopeFilter::for_opld(opld);
        for (double v : {0.05, 0.185, 0.3}) {
            for (double phase : {0.0, kPi / 4.0, kPi / 2.0}) {
                Spectrum s;
                s.axis_kind = AxisKind::wavenumber_cm1;
                s.axis.resize(n);
                s.values.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double nu = nu_lo + (nu_hi - nu_lo) * static_cast<double>(i) /
                                                  static_cast<double>(n - 1);
                    s.axis[i] = nu;
                    s.values[i] =
                        1.0 + v * std::cos(2.0 * kPi * nu * opld * 0.1 + phase);
                }
                auto env = analytic_envelope(s, filter);
                for (double e : env.values) {
                    worst = std::max(worst, std::abs(e - v) / v);
                }
            }
        }
    }
    const double elapsed = timer.seconds();
    const bool pass = worst < 0.01 && elapsed < 1.0;
    report(1, pass,
           "pure-fringe envelope error " + format_double(worst) + " (limit 0.01), " +
               format_double(elapsed) + " s");
    CHECK(worst < 0.01);
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 2: closed-loop polymer retrieval") {
    Timer timer;
    OperatingPoint op;
    auto sample = synthetic_polymer_sample(Polymer::polystyrene); // min T = 0.3
    auto ref = op.averaged(SampleModel::flat(1.0), 32, 9001);
    auto smp = op.averaged(sample, 32, 9002);
    auto a = retrieve(smp, ref, op.rc);

    // pointwise agreement on unflagged points
    auto t_truth = interp_pchip(sample.transmission.axis, sample.transmission.values, a.axis);
    std::size_t used = 0, violations = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.saturated[i]) continue;
        const double truth = -std::log10(std::max(t_truth[i], 1e-3));
        if (std::abs(a.values[i] - truth) > 3.0 * a.sigma[i]) ++violations;
        ++used;
    }
    const double viol_frac = static_cast<double>(violations) / static_cast<double>(used);

    // peak positions within 2 cm^-1 via Gaussian fits around each band
    double worst_pos = 0.0;
    for (double center : {3025.0, 2924.0, 2850.0}) {
        Spectrum seg;
        seg.axis_kind = AxisKind::wavenumber_cm1;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::abs(a.axis[i] - center) < 36.0) {
                seg.axis.push_back(a.axis[i]);
                seg.values.push_back(a.values[i]);
            }
        }
        const auto fit = gaussian_fwhm_fit(seg);
        worst_pos = std::max(worst_pos, std::abs(fit.center - center));
    }
    const double elapsed = timer.seconds();
    const bool pass = viol_frac < 0.01 && worst_pos < 2.0 && elapsed < 10.0;
    report(2, pass,
           "3-sigma violations " + format_double(viol_frac) + ", worst peak shift " +
               format_double(worst_pos) + " cm^-1 (limit 2), " + format_double(elapsed) +
               " s");
    CHECK(viol_frac < 0.01);
    CHECK(worst_pos < 2.0);
    CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 3: single-shot noise level") {
    Timer timer;
    OperatingPoint op;
    auto series = envelope_burst(op, 200, 4242);
    std::vector<double> taus{0.01};
    auto curve = allan_deviation(series, taus, nominal_allan_config());
    const double sigma = curve.sigma_a[0];
    const double elapsed = timer.seconds();
    const bool in_window = sigma > 2.9e-2 / 1.5 && sigma < 2.9e-2 * 1.5;
    const bool pass = in_window && elapsed < 60.0;
    report(3, pass,
           "sigma_A(10 ms) = " + format_double(sigma) + " (window 1.93e-2..4.35e-2), SNR " +
               format_double(1.0 / sigma) + ", " + format_double(elapsed) + " s");
    CHECK(in_window);
    CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 4: shot-noise scaling and drift turnover") {
    Timer timer;
    OperatingPoint op;

    // shot-noise-limited burst: exponent 0.5 +- 0.05 over 10 ms .. 0.5 s
    auto series = envelope_burst(op, 3000, 555);
    std::vector<double> taus{0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.5};
    auto curve = snr_scan(series, taus, nominal_allan_config());
    const double exponent = fit_scaling_exponent(curve, 0.01, 0.5);

    // slow linear drift: the SNR curve must turn over at an interior tau
    BurstOptions drift;
    drift.gain_drift_per_s = 0.02;
    auto drift_series = envelope_burst(op, 2400, 777, drift);
    std::vector<double> dr_taus{0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.6, 1.2};
    auto drift_curve = snr_scan(drift_series, dr_taus, nominal_allan_config());
    std::size_t imax = 0;
    for (std::size_t i = 0; i < drift_curve.snr.size(); ++i) {
        if (drift_curve.snr[i] > drift_curve.snr[imax]) imax = i;
    }
    const bool interior_max = imax > 0 && imax + 1 < drift_curve.snr.size();

    const double elapsed = timer.seconds();
    const bool pass = std::abs(exponent - 0.5) < 0.05 && interior_max && elapsed < 120.0;
    report(4, pass,
           "scaling exponent " + format_double(exponent) + " (want 0.5 +- 0.05), drift SNR peak at tau = " +
               format_double(drift_curve.taus[imax]) + " s (interior), " +
               format_double(elapsed) + " s");
    CHECK(std::abs(exponent - 0.5) < 0.05);
    CHECK(interior_max);
    CHECK(elapsed < 120.0);
}

TEST_CASE("criterion 5: brightness extrapolation") {
    OperatingPoint op;
    auto series = envelope_burst(op, 200, 4242);
    std::vector<double> taus{0.01};
    auto curve = allan_deviation(series, taus, nominal_allan_config());
    auto bright = extrapolate_brightness(curve, 100.0);
    // evaluate at 1 ms through the square-root law
    const double snr_1ms = bright.snr[0] * std::sqrt(0.001 / bright.taus[0]);
    const bool pass = snr_1ms > 70.0 && snr_1ms < 140.0;
    report(5, pass,
           "x100 flux extrapolated SNR(1 ms) = " + format_double(snr_1ms) +
               " (window 70..140)");
    CHECK(snr_1ms > 70.0);
    CHECK(snr_1ms < 140.0);
}

TEST_CASE("criterion 6: path-difference calibration") {
    Timer timer;
    SimContext ctx = SimContext::nominal();
    OpldScanConfig cfg; // 0.5, 0.8, 1.15, 1.45 mm, 0.96 cm^-1 feature
    auto points = opld_scan(cfg, ctx);
    REQUIRE(points.size() == 4);
    const auto& p_short = points.front();
    const auto& p_long = points.back();
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        monotone = monotone && points[i].visibility >= points[i + 1].visibility;
    }
    const bool fwhm_ok = p_short.converged && p_long.converged &&
                         std::abs(p_short.fwhm_cm1 - 14.0) < 0.2 * 14.0 &&
                         std::abs(p_long.fwhm_cm1 - 6.0) < 0.2 * 6.0;
    const bool vis_ok = std::abs(p_short.visibility - 0.30) < 0.03 &&
                        std::abs(p_long.visibility - 0.175) < 0.03;
    const double elapsed = timer.seconds();
    const bool pass = fwhm_ok && vis_ok && monotone && elapsed < 120.0;
    report(6, pass,
           "FWHM " + format_double(p_short.fwhm_cm1) + " / " + format_double(p_long.fwhm_cm1) +
               " cm^-1 (want 14 / 6 +-20%), visibility " + format_double(p_short.visibility) +
               " -> " + format_double(p_long.visibility) + " (want 0.30 -> 0.175 +-0.03), " +
               format_double(elapsed) + " s");
    CHECK(fwhm_ok);
    CHECK(vis_ok);
    CHECK(monotone);
    CHECK(elapsed < 120.0);
}

TEST_CASE("criterion 7: crystal length optimum") {
    Timer timer;
    const double l_opt = optimal_length(0.78);
    const bool exact = l_opt == 1.0 / 0.78 &&
                       std::abs(l_opt * 10.0 - 12.82051282051282) < 1e-9;
    const double l_num = numeric_optimum(0.78, {0.1, 5.0});
    const bool numeric_ok = std::abs(l_num - l_opt) < 1e-6;
    const double ratio = snr_relative(l_opt, 0.78) / snr_relative(3.0, 0.78);
    const bool ratio_ok = std::abs(ratio - 1.2775) < 1e-3;
    const double elapsed = timer.seconds();
    const bool pass = exact && numeric_ok && ratio_ok && elapsed < 1.0;
    report(7, pass,
           "L_opt = " + format_double(l_opt * 10.0) + " mm, numeric delta " +
               format_double(std::abs(l_num - l_opt)) + " cm, SNR ratio " +
               format_double(ratio) + " (want 1.2775 +- 1e-3)");
    CHECK(exact);
    CHECK(numeric_ok);
    CHECK(ratio_ok);
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 8: Allan unit checks") {
    std::vector<double> constant(64, 4.2);
    const double s_const = allan_deviation_scalars(constant);

    std::vector<double> alternating;
    for (int i = 0; i < 128; ++i) alternating.push_back(i % 2 == 0 ? 1.0 : 3.0);
    const double s_alt = allan_deviation_scalars(alternating);

    // white-noise sqrt(k) averaging over >= 512 frames
    Rng rng(31337);
    std::vector<double> levels(2048);
    for (auto& v : levels) v = 1.0 + 0.05 * rng.gaussian();
    FrameSeries series;
    series.base_integration_time_s = 0.01;
    for (double level : levels) {
        Spectrum f;
        f.axis_kind = AxisKind::wavenumber_cm1;
        f.axis = {2800.0, 2801.0, 2802.0, 2803.0};
        f.values = {level, level, level, level};
        series.frames.push_back(std::move(f));
    }
    std::vector<double> taus{0.01, 0.02, 0.04, 0.08};
    auto curve = allan_deviation(series, taus);
    double worst_k = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double k = taus[i] / taus[0];
        const double expect = curve.sigma_a[0] / std::sqrt(k);
        worst_k = std::max(worst_k, std::abs(curve.sigma_a[i] - expect) / expect);
    }

    const bool pass = s_const == 0.0 &&
                      std::abs(s_alt - std::sqrt(2.0)) < 1e-12 && worst_k < 0.10;
    report(8, pass,
           "constant -> " + format_double(s_const) + ", alternating -> " +
               format_double(s_alt) + " (want sqrt(2)), sqrt(k) law deviation " +
               format_double(worst_k) + " (limit 0.10)");
    CHECK(s_const == 0.0);
    CHECK(std::abs(s_alt - std::sqrt(2.0)) < 1e-12);
    CHECK(worst_k < 0.10);
}

TEST_CASE("criterion 9: polymer identification") {
    Timer timer;
    OperatingPoint op;
    auto lib = builtin_library();
    int correct = 0, total = 0;
    std::string first_miss;
    for (Polymer truth : {Polymer::polystyrene, Polymer::polypropylene, Polymer::polyethylene}) {
        auto sample = synthetic_polymer_sample(truth);
        for (int run = 0; run < 30; ++run) {
            const std::uint64_t seed = 20000 + 1000 * static_cast<std::uint64_t>(truth) +
                                       static_cast<std::uint64_t>(run) * 64;
            auto ref = op.averaged(SampleModel::flat(1.0), 30, seed);
            auto smp = op.averaged(sample, 30, seed + 32);
            auto a = retrieve(smp, ref, op.rc);
            auto peaks = detect_peaks(a);
            auto result = match_polymer(peaks, lib);
            ++total;
            if (!result.ranked.empty() && result.ranked.front().name == to_string(truth)) {
                ++correct;
            } else if (first_miss.empty()) {
                first_miss = to_string(truth) + " run " + std::to_string(run) + " -> " +
                             (result.ranked.empty() ? "none" : result.ranked.front().name);
            }
        }
    }

    // flat spectra give a null decision
    auto ref = op.averaged(SampleModel::flat(1.0), 30, 99991);
    auto flat = op.averaged(SampleModel::flat(1.0), 30, 99992);
    auto a_flat = retrieve(flat, ref, op.rc);
    auto result_flat = match_polymer(detect_peaks(a_flat), lib);
    const bool null_ok = !result_flat.decision.has_value();

    const double elapsed = timer.seconds();
    const bool pass = correct == total && null_ok && elapsed < 180.0;
    report(9, pass,
           std::to_string(correct) + "/" + std::to_string(total) +
               " top-1 correct, flat spectrum decision " +
               (null_ok ? std::string("null") : std::string("NOT null")) +
               (first_miss.empty() ? "" : ", first miss: " + first_miss) + ", " +
               format_double(elapsed) + " s");
    CHECK(correct == total);
    CHECK(null_ok);
    CHECK(elapsed < 180.0);
}

TEST_CASE("criterion 10: determinism and format round trips") {
    const fs::path tmp =
        fs::temp_directory_path() / ("upspec_acc_" + std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const std::string scen = (fs::path(UPSPEC_SCENARIO_DIR) / "nominal_10ms.cfg").string();

    bool pass = true;
    std::string detail;

    // simulate twice: byte-identical frames
    const auto d1 = tmp / "s1";
    const auto d2 = tmp / "s2";
    pass = pass && run_cli("simulate --scenario " + scen + " --frames 2 --seed 77 --out " +
                           d1.string()) == 0;
    pass = pass && run_cli("simulate --scenario " + scen + " --frames 2 --seed 77 --out " +
                           d2.string()) == 0;
    const bool sim_identical = slurp(d1 / "frame_00000.csv") == slurp(d2 / "frame_00000.csv") &&
                               slurp(d1 / "frame_00001.csv") == slurp(d2 / "frame_00001.csv");
    pass = pass && sim_identical;
    detail += std::string("simulate bytes ") + (sim_identical ? "identical" : "DIFFER");

    // retrieval twice over the same inputs: byte-identical outputs; the
    // absorbance file round-trips through its reader
    const auto smp_dir = tmp / "smp";
    pass = pass &&
           run_cli("simulate --scenario " +
                   (fs::path(UPSPEC_SCENARIO_DIR) / "polystyrene_10ms.cfg").string() +
                   " --frames 1 --seed 78 --out " + smp_dir.string()) == 0;
    const auto r1 = tmp / "r1";
    const auto r2 = tmp / "r2";
    const std::string retrieve_args = "retrieve --sample " +
                                      (smp_dir / "frame_00000.csv").string() + " --reference " +
                                      (d1 / "frame_00000.csv").string();
    pass = pass && run_cli(retrieve_args + " --out " + r1.string()) == 0;
    pass = pass && run_cli(retrieve_args + " --out " + r2.string()) == 0;
    const bool ret_identical = slurp(r1 / "absorbance.csv") == slurp(r2 / "absorbance.csv");
    pass = pass && ret_identical;
    detail += std::string(", retrieve bytes ") + (ret_identical ? "identical" : "DIFFER");

    bool roundtrip = true;
    try {
        auto a = read_absorbance_csv(r1 / "absorbance.csv");
        roundtrip = roundtrip && a.size() > 100;
        const auto rt = tmp / "roundtrip.csv";
        write_absorbance_csv(rt, a, RunManifest{});
        auto b = read_absorbance_csv(rt);
        roundtrip = roundtrip && b.values == a.values && b.axis == a.axis;
        auto frame = read_interferogram(d1 / "frame_00000.csv");
        RunManifest m;
        const auto fr = tmp / "frame_rt.csv";
        write_interferogram(fr, frame, m);
        auto frame2 = read_interferogram(fr);
        roundtrip = roundtrip && frame2.spectrum.values == frame.spectrum.values;
    } catch (const std::exception& e) {
        roundtrip = false;
        detail += std::string(", round-trip error: ") + e.what();
    }
    pass = pass && roundtrip;
    detail += std::string(", round trips ") + (roundtrip ? "ok" : "FAILED");

    // allan CSV determinism
    const auto burst_dir = tmp / "burst";
    pass = pass && run_cli("simulate --scenario " + scen + " --frames 8 --seed 79 --out " +
                           burst_dir.string()) == 0;
    const auto c1 = tmp / "c1.csv";
    const auto c2 = tmp / "c2.csv";
    pass = pass && run_cli("allan --frames " + burst_dir.string() +
                           " --taus 0.01,0.02 --out " + c1.string()) == 0;
    pass = pass && run_cli("allan --frames " + burst_dir.string() +
                           " --taus 0.01,0.02 --out " + c2.string()) == 0;
    pass = pass && slurp(c1) == slurp(c2);

    fs::remove_all(tmp);
    report(10, pass, detail);
    CHECK(pass);
}
