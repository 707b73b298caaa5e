#include "upspec/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "upspec/errors.hpp"
#include "upspec/rng.hpp"

namespace upspec {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFwhmPerSigma = 2.3548200450309493;
} // namespace

void OpldScanConfig::validate() const {
    if (oplds_mm.empty()) throw ConfigError("scan needs at least one path difference");
    for (std::size_t i = 0; i < oplds_mm.size(); ++i) {
        if (!(oplds_mm[i] > 0.0)) throw ConfigError("path differences must be positive");
        if (i > 0 && oplds_mm[i] <= oplds_mm[i - 1]) {
            throw ConfigError("path differences must ascend");
        }
    }
    if (!(feature_fwhm_cm1 > 0.0)) throw ConfigError("feature width must be positive");
    if (!(feature_depth > 0.0) || feature_depth > 1.0) {
        throw ConfigError("feature depth must lie in (0, 1]");
    }
    if (frames_per_point < 0) throw ConfigError("frames per point must be >= 0");
    if (!(scan_half_ratio > 0.0) || !(scan_half_ratio < 1.0)) {
        throw ConfigError("scan passband ratio must be in (0, 1)");
    }
}

GaussianFit gaussian_fwhm_fit(const Spectrum& segment) {
    segment.validate();
    const std::size_t n = segment.size();
    if (n < 7) throw NumericalError("segment too short for a Gaussian fit");
    const auto& x = segment.axis;
    const auto& y = segment.values;

    // Initial guesses: discrete extremum relative to the segment median and
    // half-maximum crossings.
    std::vector<double> sorted(y);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2),
                     sorted.end());
    const double base0 = sorted[n / 2];
    std::size_t i0 = 0;
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(y[i] - base0);
        if (d > dev) {
            dev = d;
            i0 = i;
        }
    }
    const double a0 = y[i0] - base0;
    if (std::abs(a0) < 1e-300) {
        throw NumericalError("segment has no extremum to fit");
    }
    const double half = 0.5 * std::abs(a0);
    std::size_t li = i0, ri = i0;
    while (li > 0 && std::abs(y[li] - base0) > half) --li;
    while (ri + 1 < n && std::abs(y[ri] - base0) > half) ++ri;
    if (li == i0 && ri == i0) {
        throw NumericalError("no half-maximum crossings around the extremum");
    }
    double w0 = x[ri] - x[li];
    const double min_w = 2.0 * (x[1] - x[0]);
    if (!(w0 > min_w)) w0 = min_w;

    double c = x[i0];
    double s = w0 / kFwhmPerSigma;
    double a = a0;
    double b = base0;

    auto chi2_of = [&](double cc, double ss, double aa, double bb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (x[i] - cc) / ss;
            const double r = y[i] - (bb + aa * std::exp(-0.5 * u * u));
            acc += r * r;
        }
        return acc;
    };

    double lambda = 1e-3;
    double chi2 = chi2_of(c, s, a, b);
    int iter = 0;
    bool converged = false;
    for (; iter < 200; ++iter) {
        // Jacobian and normal equations (4 parameters)
        double jtj[4][4] = {};
        double jtr[4] = {};
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (x[i] - c) / s;
            const double g = std::exp(-0.5 * u * u);
            const double r = y[i] - (b + a * g);
            const double j0 = a * g * u / s;            // d/dc
            const double j1 = a * g * u * u / s;        // d/ds
            const double j2 = g;                        // d/da
            const double j3 = 1.0;                      // d/db
            const double j[4] = {j0, j1, j2, j3};
            for (int r1 = 0; r1 < 4; ++r1) {
                for (int c1 = 0; c1 < 4; ++c1) jtj[r1][c1] += j[r1] * j[c1];
                jtr[r1] += j[r1] * r;
            }
        }
        double m[4][5];
        for (int r1 = 0; r1 < 4; ++r1) {
            for (int c1 = 0; c1 < 4; ++c1) m[r1][c1] = jtj[r1][c1];
            m[r1][r1] *= 1.0 + lambda;
            m[r1][4] = jtr[r1];
        }
        // Gaussian elimination
        bool singular = false;
        for (int col = 0; col < 4; ++col) {
            int piv = col;
            for (int r1 = col + 1; r1 < 4; ++r1) {
                if (std::abs(m[r1][col]) > std::abs(m[piv][col])) piv = r1;
            }
            if (std::abs(m[piv][col]) < 1e-30) {
                singular = true;
                break;
            }
            if (piv != col) {
                for (int c1 = col; c1 < 5; ++c1) std::swap(m[col][c1], m[piv][c1]);
            }
            for (int r1 = col + 1; r1 < 4; ++r1) {
                const double f = m[r1][col] / m[col][col];
                for (int c1 = col; c1 < 5; ++c1) m[r1][c1] -= f * m[col][c1];
            }
        }
        if (singular) {
            lambda *= 10.0;
            if (lambda > 1e12) break;
            continue;
        }
        double dp[4];
        for (int r1 = 3; r1 >= 0; --r1) {
            double acc = m[r1][4];
            for (int c1 = r1 + 1; c1 < 4; ++c1) acc -= m[r1][c1] * dp[c1];
            dp[r1] = acc / m[r1][r1];
        }
        const double c_new = c + dp[0];
        const double s_new = s + dp[1];
        const double a_new = a + dp[2];
        const double b_new = b + dp[3];
        if (!(std::abs(s_new) > 1e-12)) {
            lambda *= 10.0;
            continue;
        }
        const double chi2_new = chi2_of(c_new, s_new, a_new, b_new);
        if (chi2_new < chi2) {
            const double rel = (chi2 - chi2_new) / std::max(chi2, 1e-300);
            c = c_new;
            s = s_new;
            a = a_new;
            b = b_new;
            chi2 = chi2_new;
            lambda = std::max(lambda / 3.0, 1e-12);
            if (rel < 1e-14) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                converged = true; // damped to a stationary point
                break;
            }
        }
    }
    if (!converged && iter >= 200) {
        // accept a well-reduced fit, otherwise report failure with residuals
        const double rms = std::sqrt(chi2 / static_cast<double>(n));
        if (rms > 0.5 * std::abs(a)) {
            throw NumericalError("gaussian fit did not converge; rms residual " +
                                 std::to_string(rms));
        }
    }
    GaussianFit fit;
    fit.center = c;
    fit.fwhm = std::abs(s) * kFwhmPerSigma;
    fit.amplitude = a;
    fit.offset = b;
    fit.rms_residual = std::sqrt(chi2 / static_cast<double>(n));
    fit.iterations = iter;
    return fit;
}

SampleModel inject_feature(SampleModel sample, double center_cm1, double fwhm_cm1, double depth) {
    sample.validate();
    if (!(fwhm_cm1 > 0.0)) throw DomainError("feature width must be positive");
    if (depth < 0.0 || depth > 1.0) throw DomainError("feature depth must lie in [0, 1]");
    if (center_cm1 < sample.transmission.axis.front() ||
        center_cm1 > sample.transmission.axis.back()) {
        throw DomainError("feature centre outside the sample axis");
    }
    constexpr double kLn2x4 = 2.772588722239781;
    for (std::size_t i = 0; i < sample.transmission.size(); ++i) {
        const double u = (sample.transmission.axis[i] - center_cm1) / fwhm_cm1;
        sample.transmission.values[i] *= 1.0 - depth * std::exp(-kLn2x4 * u * u);
    }
    return sample;
}

SimContext SimContext::nominal() {
    return SimContext{SourceModel{}, VisibilityModel{}, AcquisitionConfig{}};
}

namespace {

RetrievalConfig scan_retrieval_config(const OpldScanConfig& cfg, double opld_mm,
                                      const Spectrum& reference_px) {
    RetrievalConfig rc;
    rc.carrier_cycles = opld_mm * 0.1;
    rc.passband_half_ratio = cfg.scan_half_ratio;
    // pin the analysis band from the noiseless reference so every noisy
    // realization lands on the same grid
    const std::size_t n_new = static_cast<std::size_t>(
        std::llround(rc.resample_factor * static_cast<double>(reference_px.size())));
    rc.analysis_band =
        detect_plateau_band(resample_to_uniform_wavenumber(reference_px, n_new));
    return rc;
}

// Reference and fringe-free expectation frames at one OPLD.
struct ScanFrames {
    Spectrum reference;  // expected counts with fringes
    Spectrum fringeless; // expected counts with zero visibility
};

ScanFrames scan_frames(double opld_mm, const SimContext& ctx) {
    VisibilityModel vis = ctx.visibility;
    vis.opld_mm = opld_mm;
    auto flat = SampleModel::flat(1.0);
    ScanFrames out;
    out.reference = expected_frame(ctx.source, vis, flat, ctx.acquisition);
    auto blind = SampleModel::flat(0.0);
    out.fringeless = expected_frame(ctx.source, vis, blind, ctx.acquisition);
    return out;
}

} // namespace

double peak_visibility(double opld_mm, const SimContext& ctx) {
    const auto frames = scan_frames(opld_mm, ctx);
    RetrievalConfig rc;
    rc.carrier_cycles = opld_mm * 0.1;
    Interferogram ref_frame{frames.reference, ctx.acquisition, opld_mm};
    const Envelope env = extract_envelope(ref_frame, rc);
    // divide by the fringe-free frame resampled onto the envelope axis
    Interferogram s0{frames.fringeless, ctx.acquisition, opld_mm};
    auto uniform = resample_to_uniform_wavenumber(
        s0.spectrum, static_cast<std::size_t>(std::llround(
                         rc.resample_factor * static_cast<double>(s0.spectrum.size()))));
    auto s0_on_env = interp_pchip(uniform.axis, uniform.values, env.spectrum.axis);
    double peak = 0.0;
    const std::size_t n = env.spectrum.size();
    const std::size_t margin = n / 20;
    for (std::size_t i = margin; i + margin < n; ++i) {
        if (s0_on_env[i] > 0.0) {
            peak = std::max(peak, env.spectrum.values[i] / s0_on_env[i]);
        }
    }
    return peak;
}

ResolutionPoint measure_resolution(double opld_mm, const OpldScanConfig& cfg,
                                   const SimContext& ctx) {
    cfg.validate();
    ResolutionPoint point;
    point.opld_mm = opld_mm;

    const auto frames = scan_frames(opld_mm, ctx);
    const double nu_p = ctx.source.pump_wavenumber();
    const RetrievalConfig rc = scan_retrieval_config(cfg, opld_mm, frames.reference);

    // Imprint the feature on the recorded fringe component: the fringe-free
    // frame carries the background, the remainder carries the carrier.
    const std::size_t n_px = frames.reference.size();
    Spectrum feature_frame = frames.reference;
    for (std::size_t i = 0; i < n_px; ++i) {
        const double nu_i = nu_p - wavelength_to_wavenumber(frames.reference.axis[i]);
        const double u = (nu_i - cfg.feature_center_cm1) / cfg.feature_fwhm_cm1;
        const double t = 1.0 - cfg.feature_depth * std::exp(-2.772588722239781 * u * u);
        const double fringe = frames.reference.values[i] - frames.fringeless.values[i];
        feature_frame.values[i] = frames.fringeless.values[i] + fringe * t;
    }

    const double h = cfg.scan_half_ratio * opld_mm * 0.1;
    const double expected_fwhm = std::hypot(0.6034 / h, 1.5);

    auto retrieve_t = [&](const Spectrum& ref_px,
                          const Spectrum& smp_px) -> TransmissionSpectrum {
        Interferogram fr{ref_px, ctx.acquisition, opld_mm};
        Interferogram fs{smp_px, ctx.acquisition, opld_mm};
        const Envelope er = extract_envelope(fr, rc);
        const Envelope es = extract_envelope(fs, rc);
        return transmission(es, er, rc);
    };

    auto fit_curve = [&](const TransmissionSpectrum& t, double* fwhm_out, double* center_out,
                         std::string* diag) -> bool {
        Spectrum seg;
        seg.axis_kind = AxisKind::wavenumber_cm1;
        const double win = 3.0 * std::max(expected_fwhm, 3.0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (std::abs(t.axis[i] - cfg.feature_center_cm1) <= win) {
                seg.axis.push_back(t.axis[i]);
                seg.values.push_back(t.values[i]);
            }
        }
        try {
            const GaussianFit fit = gaussian_fwhm_fit(seg);
            if (fit.amplitude >= 0.0 ||
                std::abs(fit.center - cfg.feature_center_cm1) > expected_fwhm) {
                *diag = "fit locked onto structure away from the injected feature";
                return false;
            }
            *fwhm_out = fit.fwhm;
            *center_out = fit.center;
            return true;
        } catch (const NumericalError& e) {
            *diag = e.what();
            return false;
        }
    };

    point.visibility = peak_visibility(opld_mm, ctx);

    if (cfg.frames_per_point <= 0) {
        auto t = retrieve_t(frames.reference, feature_frame);
        double fwhm = 0.0, center = 0.0;
        std::string diag;
        if (fit_curve(t, &fwhm, &center, &diag)) {
            point.fwhm_cm1 = fwhm;
            point.converged = true;
        } else {
            point.diagnostic = diag;
        }
        return point;
    }

    // Noisy mode: average the per-pair transmissions, fit the average, and
    // report the spread of per-pair fits as the uncertainty.
    std::vector<double> per_frame_fwhm;
    TransmissionSpectrum mean_t;
    Rng seeder(cfg.seed + static_cast<std::uint64_t>(opld_mm * 1000.0));
    for (int k = 0; k < cfg.frames_per_point; ++k) {
        const std::uint64_t s1 = seeder.next_u64();
        const std::uint64_t s2 = seeder.next_u64();
        auto ref_noisy = apply_shot_noise(frames.reference, ctx.acquisition, s1).spectrum;
        auto smp_noisy = apply_shot_noise(feature_frame, ctx.acquisition, s2).spectrum;
        auto t = retrieve_t(ref_noisy, smp_noisy);
        if (mean_t.axis.empty()) {
            mean_t = t;
        } else {
            for (std::size_t i = 0; i < t.size(); ++i) mean_t.values[i] += t.values[i];
        }
        double fwhm = 0.0, center = 0.0;
        std::string diag;
        if (fit_curve(t, &fwhm, &center, &diag)) {
            per_frame_fwhm.push_back(fwhm);
        }
    }
    for (auto& v : mean_t.values) v /= static_cast<double>(cfg.frames_per_point);
    double fwhm = 0.0, center = 0.0;
    std::string diag;
    if (fit_curve(mean_t, &fwhm, &center, &diag)) {
        point.fwhm_cm1 = fwhm;
        point.converged = true;
        if (per_frame_fwhm.size() >= 2) {
            double mean = 0.0;
            for (double v : per_frame_fwhm) mean += v;
            mean /= static_cast<double>(per_frame_fwhm.size());
            double var = 0.0;
            for (double v : per_frame_fwhm) var += (v - mean) * (v - mean);
            var /= static_cast<double>(per_frame_fwhm.size() - 1);
            point.fwhm_uncertainty_cm1 =
                std::sqrt(var / static_cast<double>(per_frame_fwhm.size()));
        }
    } else {
        point.diagnostic = diag;
    }
    return point;
}

std::vector<ResolutionPoint> opld_scan(const OpldScanConfig& cfg, const SimContext& ctx) {
    cfg.validate();
    std::vector<ResolutionPoint> points;
    points.reserve(cfg.oplds_mm.size());
    for (const double opld : cfg.oplds_mm) {
        points.push_back(measure_resolution(opld, cfg, ctx));
    }
    return points;
}

ResponseCalibration calibrate_response(double opld1_mm, double target_vis1, double opld2_mm,
                                       double target_vis2, double eval_wavelength_nm,
                                       double pixel_pitch_nm) {
    if (!(opld1_mm > 0.0) || !(opld2_mm > opld1_mm)) {
        throw ConfigError("calibration needs 0 < opld1 < opld2");
    }
    if (!(target_vis1 > target_vis2) || !(target_vis2 > 0.0) || target_vis1 >= 1.0) {
        throw ConfigError("calibration targets must satisfy 0 < v2 < v1 < 1");
    }
    // Local fringe frequency in cycles/nm at the evaluation wavelength; the
    // Gaussian slit multiplies the contrast by exp(-2 pi^2 sigma^2 f^2) and
    // pixel integration contributes sinc(pi p f).
    const double dnu_dlam = 1.0e7 / (eval_wavelength_nm * eval_wavelength_nm);
    const double f1 = opld1_mm * 0.1 * dnu_dlam;
    const double f2 = opld2_mm * 0.1 * dnu_dlam;
    auto boxf = [&](double f) {
        const double x = kPi * pixel_pitch_nm * f;
        return x == 0.0 ? 1.0 : std::sin(x) / x;
    };
    const double ratio = (target_vis2 / target_vis1) * (boxf(f1) / boxf(f2));
    const double two_pi2 = 2.0 * kPi * kPi;
    const double sigma2 = -std::log(ratio) / (two_pi2 * (f2 * f2 - f1 * f1));
    if (!(sigma2 > 0.0)) {
        throw NumericalError("calibration targets do not admit a Gaussian washout");
    }
    ResponseCalibration out;
    out.sigma_nm = std::sqrt(sigma2);
    out.base_visibility =
        target_vis1 / (std::exp(-two_pi2 * sigma2 * f1 * f1) * boxf(f1));
    return out;
}

} // namespace upspec
