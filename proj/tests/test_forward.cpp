#include <doctest.h>

#include <cmath>
#include <numbers>

#include "upspec/calibration.hpp"
#include "upspec/errors.hpp"
#include "upspec/forward.hpp"
#include "upspec/retrieval.hpp"

using namespace upspec;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("visibility prefactor") {
    CHECK(visibility(1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(visibility(2.5, 2.5, 0.5) == doctest::Approx(0.5));
    CHECK(visibility(4.0, 1.0, 1.0) == doctest::Approx(0.8));
    CHECK_THROWS_AS(visibility(1.0, 1.0, 1.5), DomainError);
    CHECK_THROWS_AS(visibility(1.0, 1.0, -0.1), DomainError);
    CHECK_THROWS_AS(visibility(0.0, 1.0, 0.5), DomainError);
}

TEST_CASE("ideal interferogram contrast matches the visibility model") {
    SourceModel src;
    VisibilityModel vis;
    auto flat = SampleModel::flat(1.0);
    auto fine = ideal_interferogram(src, vis, flat);

    // fringe contrast in a clean zone near 918 nm (idler ~2990, far from
    // the 2899 absorption dip)
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        if (fine.axis[i] > 917.5 && fine.axis[i] < 918.5) {
            lo = std::min(lo, fine.values[i]);
            hi = std::max(hi, fine.values[i]);
        }
    }
    const double contrast = (hi - lo) / (hi + lo);
    CHECK(contrast == doctest::Approx(vis.base_visibility).epsilon(0.01));
}

TEST_CASE("opaque sample kills the fringes entirely") {
    SourceModel src;
    VisibilityModel vis;
    auto dark = SampleModel::flat(0.0);
    auto fine = ideal_interferogram(src, vis, dark);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        if (fine.axis[i] > 910.0 && fine.axis[i] < 912.0) {
            lo = std::min(lo, fine.values[i]);
            hi = std::max(hi, fine.values[i]);
        }
    }
    CHECK((hi - lo) / (hi + lo) < 1e-12);
}

TEST_CASE("sample phase shifts the fringe pattern, not its envelope") {
    SourceModel src;
    VisibilityModel vis;
    auto flat = SampleModel::flat(1.0);
    SampleModel shifted = flat;
    shifted.phase = shifted.transmission;
    for (auto& v : shifted.phase.values) v = kPi / 4.0; // 2 dphi = pi/2

    auto a = ideal_interferogram(src, vis, flat);
    auto b = ideal_interferogram(src, vis, shifted);
    // oracle: evaluate the model at both phases directly
    const double nu_p = src.pump_wavenumber();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.axis[i] < 902.0 || a.axis[i] > 922.0) continue;
        const double nu_s = 1.0e7 / a.axis[i];
        const double v_eff = vis.plateau_times_dip(nu_p - nu_s);
        const double expect_a = 1.0 + v_eff * std::cos(2.0 * kPi * nu_s * 0.145);
        const double expect_b = 1.0 + v_eff * std::cos(2.0 * kPi * nu_s * 0.145 + kPi / 2.0);
        worst = std::max(worst, std::abs(a.values[i] - expect_a));
        worst = std::max(worst, std::abs(b.values[i] - expect_b));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("instrument response: zero width reduces to bin averaging") {
    SourceModel src;
    VisibilityModel vis;
    auto flat = SampleModel::flat(1.0);
    AcquisitionConfig cfg;
    cfg.instrument_response_fwhm_nm = 0.0;
    auto fine = ideal_interferogram(src, vis, flat, cfg.pixel_pitch_nm, cfg.oversample);
    auto px = apply_instrument_response(fine, cfg);
    double acc = 0.0;
    for (int j = 0; j < cfg.oversample; ++j) acc += fine.values[static_cast<std::size_t>(j)];
    CHECK(px.values[0] == doctest::Approx(acc / cfg.oversample).epsilon(1e-12));
}

TEST_CASE("gaussian response attenuates a pure fringe by its Fourier factor") {
    const double f_carrier = 1.74; // cycles per nm
    AcquisitionConfig cfg;
    cfg.instrument_response_fwhm_nm = 0.2298924;
    const double sigma = cfg.instrument_response_fwhm_nm / 2.3548200450309493;
    Spectrum fine;
    fine.axis_kind = AxisKind::wavelength_nm;
    const std::size_t n = 292 * 8;
    const double dx = 0.089 / 8.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lam = 899.0 + dx * (static_cast<double>(i) + 0.5);
        fine.axis.push_back(lam);
        fine.values.push_back(1.0 + 0.5 * std::cos(2.0 * kPi * f_carrier * lam));
    }
    auto px = apply_instrument_response(fine, cfg);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = px.size() / 4; i < 3 * px.size() / 4; ++i) {
        lo = std::min(lo, px.values[i]);
        hi = std::max(hi, px.values[i]);
    }
    const double contrast = (hi - lo) / (hi + lo);
    const double gauss_factor =
        std::exp(-2.0 * kPi * kPi * sigma * sigma * f_carrier * f_carrier);
    const double x = kPi * cfg.pixel_pitch_nm * f_carrier;
    const double box_factor = std::sin(x) / x;
    CHECK(contrast == doctest::Approx(0.5 * gauss_factor * box_factor).epsilon(0.02));
}

TEST_CASE("calibrated response reproduces the visibility roll-off pair") {
    SimContext ctx = SimContext::nominal();
    const double v_short = peak_visibility(0.5, ctx);
    const double v_long = peak_visibility(1.45, ctx);
    CHECK(std::abs(v_short - 0.30) < 0.03);
    CHECK(std::abs(v_long - 0.175) < 0.03);
}

TEST_CASE("shot noise: zero expectation stays zero, fixed seed repeats") {
    AcquisitionConfig cfg;
    Spectrum zeros;
    zeros.axis_kind = AxisKind::wavelength_nm;
    for (int i = 0; i < 100; ++i) {
        zeros.axis.push_back(900.0 + 0.1 * i);
        zeros.values.push_back(0.0);
    }
    auto f = apply_shot_noise(zeros, cfg, 5);
    for (double v : f.spectrum.values) CHECK(v == 0.0);

    Spectrum mean = zeros;
    for (auto& v : mean.values) v = 250.0;
    auto a = apply_shot_noise(mean, cfg, 42);
    auto b = apply_shot_noise(mean, cfg, 42);
    auto c = apply_shot_noise(mean, cfg, 43);
    CHECK(a.spectrum.values == b.spectrum.values);
    CHECK(a.spectrum.values != c.spectrum.values);

    Spectrum bad = zeros;
    bad.values[0] = -1.0;
    CHECK_THROWS_AS(apply_shot_noise(bad, cfg, 1), DomainError);
}

TEST_CASE("poisson draws have variance equal to the mean") {
    AcquisitionConfig cfg;
    Spectrum mean;
    mean.axis_kind = AxisKind::wavelength_nm;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n; ++i) {
        mean.axis.push_back(900.0 + 0.001 * static_cast<double>(i));
        mean.values.push_back(1.0e6);
    }
    auto f = apply_shot_noise(mean, cfg, 7);
    double acc = 0.0, acc2 = 0.0;
    for (double v : f.spectrum.values) {
        acc += v;
        acc2 += v * v;
    }
    const double m = acc / static_cast<double>(n);
    const double var = acc2 / static_cast<double>(n) - m * m;
    CHECK(var / m > 0.97);
    CHECK(var / m < 1.03);
    CHECK(std::sqrt(var) / m == doctest::Approx(1e-3).epsilon(0.05));
}

TEST_CASE("frame counts total gain x flux x integration time") {
    SourceModel src;
    VisibilityModel vis;
    AcquisitionConfig cfg;
    auto flat = SampleModel::flat(1.0);
    auto expected = expected_frame(src, vis, flat, cfg);
    double total = 0.0;
    for (double v : expected.values) total += v;
    const double target =
        cfg.gain_counts_per_photon * src.total_detected_flux * cfg.integration_time_s;
    CHECK(total == doctest::Approx(target).epsilon(1e-9));

    // bookkeeping is independent of the sample and the visibility model
    auto half = SampleModel::flat(0.5);
    VisibilityModel blind = vis;
    blind.base_visibility = 0.01;
    blind.dip_floor = 0.005;
    auto expected2 = expected_frame(src, blind, half, cfg);
    double total2 = 0.0;
    for (double v : expected2.values) total2 += v;
    CHECK(total2 == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("photon-count units: unit gain, plateau-wide source") {
    // 247 pixels of flat source at gain 1 carry ~1457 photons/pixel at the
    // reference flux and 10 ms
    SourceModel src;
    src.band_lo_nm = 901.5;
    src.band_hi_nm = 901.5 + 0.089 * 247 + 0.001;
    src.plateau_lo_nm = 901.5;
    src.plateau_hi_nm = src.band_hi_nm;
    AcquisitionConfig cfg;
    cfg.gain_counts_per_photon = 1.0;
    VisibilityModel vis;
    auto flat = SampleModel::flat(1.0);
    auto expected = expected_frame(src, vis, flat, cfg);
    CHECK(expected.size() == 247);
    double total = 0.0;
    for (double v : expected.values) total += v;
    CHECK(total / static_cast<double>(expected.size()) ==
          doctest::Approx(1457.5).epsilon(0.01));
}

TEST_CASE("doubling the integration time doubles the counts") {
    SourceModel src;
    VisibilityModel vis;
    AcquisitionConfig cfg;
    auto flat = SampleModel::flat(1.0);
    auto f1 = simulate_frame(src, vis, flat, cfg);
    cfg.integration_time_s *= 2.0;
    auto f2 = simulate_frame(src, vis, flat, cfg);
    double t1 = 0.0, t2 = 0.0;
    for (double v : f1.spectrum.values) t1 += v;
    for (double v : f2.spectrum.values) t2 += v;
    CHECK(std::abs(t2 - 2.0 * t1) < 5.0 * std::sqrt(t2 + 4.0 * t1));
}

TEST_CASE("zero-visibility frame: carrier bin consistent with the noise floor") {
    SourceModel src;
    VisibilityModel vis;
    vis.base_visibility = 1e-9;
    vis.dip_floor = 5e-10;
    AcquisitionConfig cfg;
    auto flat = SampleModel::flat(1.0);
    auto expected = expected_frame(src, vis, flat, cfg);
    // DFT of the noiseless plateau region: the carrier bin must sit far
    // below the one-frame Poisson noise floor
    std::vector<double> plateau;
    double mean = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected.axis[i] >= 901.5 && expected.axis[i] <= 922.5) {
            plateau.push_back(expected.values[i]);
        }
    }
    for (double v : plateau) mean += v;
    mean /= static_cast<double>(plateau.size());
    const std::size_t n = plateau.size();
    // carrier at ~0.155 cycles per pixel
    const double fc = 0.155;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double ph = 2.0 * kPi * fc * static_cast<double>(j);
        re += (plateau[j] - mean) * std::cos(ph);
        im -= (plateau[j] - mean) * std::sin(ph);
    }
    const double carrier_mag = std::hypot(re, im);
    const double noise_floor = std::sqrt(mean * static_cast<double>(n) / 2.0);
    CHECK(carrier_mag < noise_floor);
}

TEST_CASE("effective visibility stays within [0,1]") {
    VisibilityModel vis;
    for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        for (double nu : {2790.0, 2850.0, 2899.0, 2950.0, 3054.0}) {
            const double v =
                visibility(vis.intensity_first_pass, vis.intensity_second_pass, t) *
                vis.plateau_times_dip(nu);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("fringe contrast is linear in the sample transmission") {
    SourceModel src;
    VisibilityModel vis;
    auto s1 = SampleModel::flat(0.8);
    auto s2 = SampleModel::flat(0.4);
    auto a = ideal_interferogram(src, vis, s1);
    auto b = ideal_interferogram(src, vis, s2);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.axis[i] < 903.0 || a.axis[i] > 921.0) continue;
        const double fa = a.values[i] - 1.0;
        const double fb = b.values[i] - 1.0;
        if (std::abs(fa) > 1e-3) {
            worst = std::max(worst, std::abs(fb / fa - 0.5));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("burst simulation is deterministic and drift scales the mean") {
    SourceModel src;
    VisibilityModel vis;
    AcquisitionConfig cfg;
    auto flat = SampleModel::flat(1.0);
    auto b1 = simulate_burst(src, vis, flat, cfg, 4);
    auto b2 = simulate_burst(src, vis, flat, cfg, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(b1[i].spectrum.values == b2[i].spectrum.values);
    }
    BurstOptions drift;
    drift.gain_drift_per_s = 10.0; // 10 percent per 10 ms frame
    auto bd = simulate_burst(src, vis, flat, cfg, 3, drift);
    double t0 = 0.0, t2 = 0.0;
    for (double v : bd[0].spectrum.values) t0 += v;
    for (double v : bd[2].spectrum.values) t2 += v;
    CHECK(t2 / t0 == doctest::Approx(1.2).epsilon(0.02));
}

TEST_CASE("synthetic polymer samples hit their design floors") {
    auto ps = synthetic_polymer_sample(Polymer::polystyrene);
    double min_t = 1.0;
    for (double v : ps.transmission.values) min_t = std::min(min_t, v);
    CHECK(min_t == doctest::Approx(0.3).epsilon(0.01));
    auto pe = synthetic_polymer_sample(Polymer::polyethylene);
    for (double v : pe.transmission.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("scenario sample resolution") {
    Scenario sc = Scenario::nominal();
    sc.sample_name = "flat:0.5";
    auto s = sc.resolve_sample();
    CHECK(s.transmission.values.front() == doctest::Approx(0.5));
    sc.sample_name = "pp";
    CHECK_NOTHROW(sc.resolve_sample());
    sc.sample_name = "bogus";
    CHECK_THROWS_AS(sc.resolve_sample(), ConfigError);
}

TEST_CASE("sample band mismatch is rejected") {
    SourceModel src;
    VisibilityModel vis;
    SampleModel narrow;
    narrow.transmission.axis_kind = AxisKind::wavenumber_cm1;
    narrow.transmission.axis = {2900.0, 2950.0};
    narrow.transmission.values = {1.0, 1.0};
    CHECK_THROWS_AS(ideal_interferogram(src, vis, narrow), DomainError);
}
