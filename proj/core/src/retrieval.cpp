#include "upspec/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "fft.hpp"
#include "upspec/errors.hpp"

namespace upspec {

void RetrievalConfig::validate() const {
    if (analysis_band) analysis_band->validate();
    if (!(pump_wavelength_nm > 0.0)) throw ConfigError("pump wavelength must be positive");
    if (!(resample_factor >= 1.0)) throw ConfigError("resample factor must be >= 1");
    if (!(passband_half_ratio > 0.0) || !(passband_half_ratio < 1.0)) {
        throw ConfigError("passband half ratio must be in (0, 1)");
    }
    if (baseline_order < 0 || baseline_order > 4) {
        throw ConfigError("baseline order must be in [0, 4]");
    }
    if (!(saturation_k > 0.0)) throw ConfigError("saturation threshold must be positive");
    if (!(clip_floor > 0.0) || !(clip_floor < clip_ceiling)) {
        throw ConfigError("require 0 < clip_floor < clip_ceiling");
    }
    if (edge_exclusion < 0.0 || edge_exclusion > 0.25) {
        throw ConfigError("edge exclusion must be in [0, 0.25]");
    }
}

double detect_carrier(const Interferogram& frame, const RetrievalConfig& cfg) {
    cfg.validate();
    const auto& s = frame.spectrum;
    s.validate();
    const std::size_t n = s.size();
    if (n < 32) throw DomainError("frame too short for carrier detection");

    // Work on the converted wavenumber span so the returned frequency is in
    // cycles per cm^-1 directly.
    const double nu_a = wavelength_to_wavenumber(s.axis.front());
    const double nu_b = wavelength_to_wavenumber(s.axis.back());
    const double span = std::abs(nu_a - nu_b);
    const double d = span / static_cast<double>(n - 1);

    double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) /
                  static_cast<double>(n);
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = s.values[i] - mean;
    detail::fft(buf, false);

    const double f_min = 3.0 / span;  // stay clear of the DC pedestal
    const double f_max = 0.45 / d;    // stay clear of Nyquist
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double fk = static_cast<double>(k) / (static_cast<double>(n) * d);
        if (fk < f_min || fk > f_max) continue;
        const double mag = std::norm(buf[k]);
        if (mag > best_mag) {
            best_mag = mag;
            best = k;
        }
    }
    if (best == 0) throw NumericalError("no carrier found in the frame spectrum");
    // parabolic refinement in log power
    double delta = 0.0;
    if (best + 1 < n / 2 && best > 1) {
        const double l = std::log(std::max(std::norm(buf[best - 1]), 1e-300));
        const double c = std::log(std::max(std::norm(buf[best]), 1e-300));
        const double r = std::log(std::max(std::norm(buf[best + 1]), 1e-300));
        const double den = l - 2.0 * c + r;
        if (den < 0.0) delta = 0.5 * (l - r) / den;
    }
    return (static_cast<double>(best) + delta) / (static_cast<double>(n) * d);
}

// Default analysis band when none is configured: the emission plateau of the
// frame itself, found by thresholding the fringe-smoothed record. Mirrors
// the usable-band truncation that precedes envelope extraction.
BandLimits detect_plateau_band(const Spectrum& uniform) {
    const std::size_t n = uniform.size();
    // wide enough to average out fringes down to ~20 cm^-1 periods
    const double span = uniform.axis.back() - uniform.axis.front();
    const double step = span / static_cast<double>(n - 1);
    const int half = std::clamp(static_cast<int>(std::ceil(12.0 / step)), 4, 64);
    std::vector<double> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        int count = 0;
        for (int j = -half; j <= half; ++j) {
            const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) + j;
            if (k < 0 || k >= static_cast<std::ptrdiff_t>(n)) continue;
            acc += uniform.values[static_cast<std::size_t>(k)];
            ++count;
        }
        smooth[i] = acc / static_cast<double>(count);
    }
    std::vector<double> sorted(smooth);
    std::sort(sorted.begin(), sorted.end());
    const double top = sorted[static_cast<std::size_t>(0.9 * static_cast<double>(n - 1))];
    const double threshold = 0.85 * top;
    // longest contiguous run above the threshold
    std::size_t best_lo = 0, best_len = 0, run_lo = 0, run_len = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (smooth[i] >= threshold) {
            if (run_len == 0) run_lo = i;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_lo = run_lo;
            }
        } else {
            run_len = 0;
        }
    }
    // The 0.85 crossing sits on the shoulder just outside the plateau; half
    // the smoothing window steps back to the plateau edge without eating
    // into the usable band.
    const std::size_t trim = static_cast<std::size_t>(half) / 2 + 2;
    if (best_len < 32 + 2 * trim) {
        return BandLimits{uniform.axis.front(), uniform.axis.back()};
    }
    return BandLimits{uniform.axis[best_lo + trim],
                      uniform.axis[best_lo + best_len - 1 - trim]};
}

Envelope extract_envelope(const Interferogram& frame, const RetrievalConfig& cfg) {
    cfg.validate();
    frame.spectrum.validate();
    if (frame.spectrum.axis_kind != AxisKind::wavelength_nm) {
        throw DomainError("extract_envelope expects a wavelength-domain frame");
    }
    const std::size_t n_px = frame.spectrum.size();
    const std::size_t n_new = static_cast<std::size_t>(
        std::llround(cfg.resample_factor * static_cast<double>(n_px)));
    auto uniform = resample_to_uniform_wavenumber(frame.spectrum, n_new);
    uniform = truncate_band(uniform, cfg.analysis_band ? *cfg.analysis_band
                                                       : detect_plateau_band(uniform));

    double carrier = 0.0;
    if (cfg.carrier_cycles) {
        carrier = *cfg.carrier_cycles;
    } else if (frame.opld_mm > 0.0) {
        carrier = frame.opld_mm * 0.1;
    } else {
        carrier = detect_carrier(frame, cfg);
    }

    EnvelopeFilter filter;
    filter.passband = BandLimits{carrier * (1.0 - cfg.passband_half_ratio),
                                 carrier * (1.0 + cfg.passband_half_ratio)};
    filter.edge_exclusion_fraction = cfg.edge_exclusion;
    filter.band_taper = cfg.band_taper;
    filter.ar_order = cfg.ar_order;

    Envelope env;
    env.carrier = carrier;
    env.spectrum = analytic_envelope(uniform, filter);

    // Noise: estimate the white pixel noise from the raw frame's guard band
    // (carrier mapped to the pixel record's own span), then scale by the
    // filter's noise gain on the resampled grid.
    Spectrum pixel_record;
    pixel_record.axis_kind = AxisKind::wavenumber_cm1;
    pixel_record.axis.resize(n_px);
    pixel_record.values = frame.spectrum.values;
    // uniform surrogate axis spanning the converted range; the guard band
    // estimate only needs the correct span
    const double nu_lo = wavelength_to_wavenumber(frame.spectrum.axis.back());
    const double nu_hi = wavelength_to_wavenumber(frame.spectrum.axis.front());
    for (std::size_t i = 0; i < n_px; ++i) {
        pixel_record.axis[i] =
            nu_lo + (nu_hi - nu_lo) * static_cast<double>(i) / static_cast<double>(n_px - 1);
    }
    double sigma_px = estimate_sample_noise(pixel_record, filter);
    if (sigma_px <= 0.0) {
        // fall back to shot-noise of the mean counts
        const double mean = std::accumulate(frame.spectrum.values.begin(),
                                            frame.spectrum.values.end(), 0.0) /
                            static_cast<double>(n_px);
        sigma_px = std::sqrt(std::max(mean, 0.0));
    }
    const auto& ax = env.spectrum.axis;
    const double d_env = ax.size() > 1
                             ? (ax.back() - ax.front()) / static_cast<double>(ax.size() - 1)
                             : 1.0;
    // White pixel noise of deviation sigma_px and pixel spacing dp carries a
    // flat spectral density sigma_px^2 * dp; express it as an equivalent
    // per-sample deviation on the resampled grid before applying the gain.
    const double dp = (nu_hi - nu_lo) / static_cast<double>(n_px - 1);
    const double sigma_equiv = sigma_px * std::sqrt(dp / d_env);
    EnvelopeFilter f2 = filter;
    env.sigma = sigma_equiv * envelope_noise_gain(f2, d_env);
    return env;
}

TransmissionSpectrum transmission(const Envelope& sample, const Envelope& reference,
                                  const RetrievalConfig& cfg) {
    cfg.validate();
    const auto& sa = sample.spectrum;
    const auto& ra = reference.spectrum;
    if (sa.size() != ra.size()) {
        throw DomainError("sample and reference envelopes have different lengths");
    }
    for (std::size_t i = 0; i < sa.size(); ++i) {
        if (std::abs(sa.axis[i] - ra.axis[i]) > 1e-9) {
            throw DomainError("sample and reference envelope axes differ");
        }
    }

    // Global reference validity: the band median must stand clear of the
    // noise floor (a noise-only envelope has a Rayleigh median ~1.18 sigma).
    std::vector<double> sorted(ra.values);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                     sorted.end());
    const double median_ref = sorted[sorted.size() / 2];
    if (reference.sigma > 0.0 && median_ref < 2.0 * reference.sigma) {
        throw ReferenceInvalidError("reference envelope is below the noise floor");
    }

    const double nu_p = wavelength_to_wavenumber(cfg.pump_wavelength_nm);
    const std::size_t n = sa.size();
    TransmissionSpectrum out;
    out.axis.resize(n);
    out.values.resize(n);
    out.sigma.resize(n);
    out.saturated.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // signal axis ascends; idler axis nu_p - nu_s descends, so reverse
        const std::size_t j = n - 1 - i;
        const double e_s = sa.values[j];
        const double e_r = ra.values[j];
        const double nu_i = nu_p - sa.axis[j];
        const bool sat = e_s < cfg.saturation_k * sample.sigma ||
                         e_r < cfg.saturation_k * reference.sigma;
        double t = e_r > 0.0 ? e_s / e_r : cfg.clip_ceiling;
        t = std::clamp(t, cfg.clip_floor, cfg.clip_ceiling);
        double rel = 0.0;
        if (e_s > 0.0 && e_r > 0.0) {
            const double rs = sample.sigma / e_s;
            const double rr = reference.sigma / e_r;
            rel = std::sqrt(rs * rs + rr * rr);
        }
        out.axis[i] = nu_i;
        out.values[i] = t;
        out.sigma[i] = t * rel;
        out.saturated[i] = sat ? 1 : 0;
    }
    return out;
}

AbsorbanceSpectrum absorbance(const TransmissionSpectrum& t) {
    AbsorbanceSpectrum out;
    const std::size_t n = t.size();
    out.axis = t.axis;
    out.values.resize(n);
    out.sigma.resize(n);
    out.saturated = t.saturated;
    constexpr double ln10 = 2.302585092994046;
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = -std::log10(t.values[i]);
        out.sigma[i] = t.sigma[i] / (t.values[i] * ln10);
    }
    return out;
}

namespace {

// Least-squares polynomial fit with the axis mapped to [-1, 1]; degree <= 4
// solved by Gaussian elimination with partial pivoting.
std::vector<double> polyfit_normalized(const std::vector<double>& x, const std::vector<double>& y,
                                       int order, double x0, double x1) {
    const int m = order + 1;
    std::vector<double> ata(static_cast<std::size_t>(m * m), 0.0);
    std::vector<double> atb(static_cast<std::size_t>(m), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = 2.0 * (x[i] - x0) / (x1 - x0) - 1.0;
        double pow_u[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
        for (int p = 1; p < m; ++p) pow_u[p] = pow_u[p - 1] * u;
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                ata[static_cast<std::size_t>(r * m + c)] += pow_u[r] * pow_u[c];
            }
            atb[static_cast<std::size_t>(r)] += pow_u[r] * y[i];
        }
    }
    // solve
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r) {
            if (std::abs(ata[static_cast<std::size_t>(r * m + col)]) >
                std::abs(ata[static_cast<std::size_t>(pivot * m + col)])) {
                pivot = r;
            }
        }
        if (std::abs(ata[static_cast<std::size_t>(pivot * m + col)]) < 1e-14) {
            throw ConfigError("baseline fit is underdetermined");
        }
        if (pivot != col) {
            for (int c = 0; c < m; ++c) {
                std::swap(ata[static_cast<std::size_t>(col * m + c)],
                          ata[static_cast<std::size_t>(pivot * m + c)]);
            }
            std::swap(atb[static_cast<std::size_t>(col)], atb[static_cast<std::size_t>(pivot)]);
        }
        const double d = ata[static_cast<std::size_t>(col * m + col)];
        for (int r = col + 1; r < m; ++r) {
            const double f = ata[static_cast<std::size_t>(r * m + col)] / d;
            for (int c = col; c < m; ++c) {
                ata[static_cast<std::size_t>(r * m + c)] -=
                    f * ata[static_cast<std::size_t>(col * m + c)];
            }
            atb[static_cast<std::size_t>(r)] -= f * atb[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> coef(static_cast<std::size_t>(m), 0.0);
    for (int r = m - 1; r >= 0; --r) {
        double acc = atb[static_cast<std::size_t>(r)];
        for (int c = r + 1; c < m; ++c) {
            acc -= ata[static_cast<std::size_t>(r * m + c)] * coef[static_cast<std::size_t>(c)];
        }
        coef[static_cast<std::size_t>(r)] = acc / ata[static_cast<std::size_t>(r * m + r)];
    }
    return coef;
}

} // namespace

AbsorbanceSpectrum baseline_correct(const AbsorbanceSpectrum& a, const RetrievalConfig& cfg) {
    cfg.validate();
    if (cfg.baseline_regions.empty()) {
        throw ConfigError("baseline correction needs at least one region");
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (const auto& r : cfg.baseline_regions) {
            if (r.contains(a.axis[i])) {
                xs.push_back(a.axis[i]);
                ys.push_back(a.values[i]);
                break;
            }
        }
    }
    // distinct axis points must exceed the polynomial order
    if (static_cast<int>(xs.size()) <= cfg.baseline_order) {
        throw ConfigError("baseline regions cover too few points for the requested order");
    }
    const double x0 = a.axis.front();
    const double x1 = a.axis.back();
    const auto coef = polyfit_normalized(xs, ys, cfg.baseline_order, x0, x1);
    AbsorbanceSpectrum out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double u = 2.0 * (a.axis[i] - x0) / (x1 - x0) - 1.0;
        double fit = 0.0, pw = 1.0;
        for (const double c : coef) {
            fit += c * pw;
            pw *= u;
        }
        out.values[i] -= fit;
    }
    return out;
}

AbsorbanceSpectrum retrieve(const Interferogram& sample, const Interferogram& reference,
                            const RetrievalConfig& cfg) {
    cfg.validate();
    const auto& ca = sample.config;
    const auto& cb = reference.config;
    const auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)) + 1e-30;
    };
    if (!close(ca.integration_time_s, cb.integration_time_s) ||
        !close(ca.pixel_pitch_nm, cb.pixel_pitch_nm) ||
        !close(ca.gain_counts_per_photon, cb.gain_counts_per_photon) ||
        sample.spectrum.size() != reference.spectrum.size()) {
        throw DomainError("sample and reference acquisition configurations differ");
    }

    RetrievalConfig local = cfg;
    if (!local.carrier_cycles) {
        if (reference.opld_mm > 0.0) {
            local.carrier_cycles = reference.opld_mm * 0.1;
        } else {
            local.carrier_cycles = detect_carrier(reference, cfg);
        }
    }
    if (!local.analysis_band) {
        // band from the reference frame; an absorbing sample must see the
        // same truncation or the envelope axes drift apart
        const std::size_t n_new = static_cast<std::size_t>(std::llround(
            cfg.resample_factor * static_cast<double>(reference.spectrum.size())));
        local.analysis_band =
            detect_plateau_band(resample_to_uniform_wavenumber(reference.spectrum, n_new));
    }
    const Envelope env_ref = extract_envelope(reference, local);
    const Envelope env_smp = extract_envelope(sample, local);
    auto t = transmission(env_smp, env_ref, local);
    auto a = absorbance(t);
    if (!cfg.baseline_regions.empty()) {
        a = baseline_correct(a, cfg);
    }
    return a;
}

Interferogram average_frames(const std::vector<Interferogram>& frames) {
    if (frames.empty()) throw DomainError("cannot average an empty frame list");
    Interferogram out = frames.front();
    for (std::size_t f = 1; f < frames.size(); ++f) {
        if (frames[f].spectrum.size() != out.spectrum.size()) {
            throw DomainError("frames have mismatched lengths");
        }
        for (std::size_t i = 0; i < out.spectrum.size(); ++i) {
            out.spectrum.values[i] += frames[f].spectrum.values[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(frames.size());
    for (auto& v : out.spectrum.values) v *= inv;
    return out;
}

} // namespace upspec
