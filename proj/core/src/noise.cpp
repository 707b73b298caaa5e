#include "upspec/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "upspec/errors.hpp"

namespace upspec {

void FrameSeries::validate() const {
    if (frames.size() < 2) throw DomainError("frame series needs at least two frames");
    const auto& ref = frames.front().axis;
    for (const auto& f : frames) {
        if (f.axis.size() != ref.size()) {
            throw DomainError("frame series axes differ in length");
        }
        for (std::size_t i = 0; i < ref.size(); ++i) {
            if (std::abs(f.axis[i] - ref[i]) > 1e-9) {
                throw DomainError("frame series axes differ");
            }
        }
    }
    if (!(base_integration_time_s > 0.0)) {
        throw DomainError("base integration time must be positive");
    }
}

void FluxCalibration::validate() const {
    if (!(gain_counts_per_photon > 0.0)) throw ConfigError("gain must be positive");
    if (!(quantum_efficiency > 0.0) || quantum_efficiency > 1.0 ||
        !(grating_efficiency > 0.0) || grating_efficiency > 1.0) {
        throw ConfigError("efficiencies must lie in (0, 1]");
    }
    if (!(pixel_pitch_nm > 0.0) || !(bandwidth_nm > 0.0)) {
        throw ConfigError("pitch and bandwidth must be positive");
    }
}

namespace {

bool point_excluded(double x, std::span<const BandLimits> exclude) {
    for (const auto& b : exclude) {
        if (b.contains(x)) return true;
    }
    return false;
}

// Band mean of one frame outside the excluded regions; NaN when nothing
// remains.
double band_mean(const Spectrum& f, const AllanConfig& cfg) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = f.axis[i];
        if (cfg.band && !cfg.band->contains(x)) continue;
        if (point_excluded(x, cfg.exclude)) continue;
        acc += f.values[i];
        ++count;
    }
    if (count == 0) return std::numeric_limits<double>::quiet_NaN();
    return acc / static_cast<double>(count);
}

} // namespace

std::vector<Spectrum> pairwise_residuals(const FrameSeries& series,
                                         std::span<const BandLimits> exclude) {
    series.validate();
    std::vector<Spectrum> out;
    out.reserve(series.frames.size() - 1);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k + 1 < series.frames.size(); ++k) {
        const auto& a = series.frames[k];
        const auto& b = series.frames[k + 1];
        Spectrum r;
        r.axis_kind = a.axis_kind;
        r.axis = a.axis;
        r.values.resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double sum = b.values[i] + a.values[i];
            if (point_excluded(a.axis[i], exclude) || sum == 0.0) {
                r.values[i] = nan;
            } else {
                r.values[i] = 2.0 * (b.values[i] - a.values[i]) / sum;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

double allan_deviation_scalars(std::span<const double> interval_means) {
    const std::size_t m = interval_means.size();
    if (m < 2) throw ConfigError("Allan deviation needs at least two intervals");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double d = interval_means[k + 1] - interval_means[k];
        acc += d * d;
    }
    return std::sqrt(acc / (2.0 * static_cast<double>(m - 1)));
}

double allan_deviation_at(std::span<const double> scalars, std::size_t block) {
    if (block < 1) throw ConfigError("block size must be at least 1");
    const std::size_t m = scalars.size() / block;
    if (m < 2) throw ConfigError("not enough intervals for this averaging time");
    std::vector<double> means(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < block; ++j) acc += scalars[k * block + j];
        means[k] = acc / static_cast<double>(block);
    }
    return allan_deviation_scalars(means);
}

AllanCurve allan_deviation(const FrameSeries& series, std::span<const double> taus,
                           const AllanConfig& cfg) {
    series.validate();
    const std::size_t n = series.frames.size();
    std::vector<double> scalars(n);
    for (std::size_t k = 0; k < n; ++k) {
        scalars[k] = band_mean(series.frames[k], cfg);
        if (!std::isfinite(scalars[k])) {
            throw DomainError("scalarization band is empty");
        }
    }
    AllanCurve curve;
    for (const double tau : taus) {
        const double ratio = tau / series.base_integration_time_s;
        const auto block = static_cast<std::size_t>(std::llround(ratio));
        if (block < 1 || std::abs(ratio - static_cast<double>(block)) > 1e-6) {
            throw ConfigError("tau must be a positive multiple of the base integration time");
        }
        const std::size_t m = n / block;
        if (m < 2) {
            throw ConfigError("not enough frames for the requested averaging time");
        }
        // Normalize by the mean over the frames actually used at this tau so
        // that block-averaging the series first gives the identical value.
        const std::size_t used = m * block;
        double g = 0.0;
        for (std::size_t k = 0; k < used; ++k) g += scalars[k];
        g /= static_cast<double>(used);
        if (g == 0.0) throw DomainError("series mean is zero; cannot normalize");
        std::vector<double> norm(used);
        for (std::size_t k = 0; k < used; ++k) norm[k] = scalars[k] / g;
        const double sigma = allan_deviation_at(norm, block);
        curve.taus.push_back(tau);
        curve.sigma_a.push_back(sigma);
        curve.snr.push_back(sigma > 0.0 ? 1.0 / sigma : std::numeric_limits<double>::infinity());
    }
    return curve;
}

AllanCurve snr_scan(const FrameSeries& series, std::span<const double> taus,
                    const AllanConfig& cfg) {
    return allan_deviation(series, taus, cfg);
}

FrameSeries block_average(const FrameSeries& series, std::size_t block) {
    series.validate();
    if (block < 1) throw ConfigError("block size must be at least 1");
    const std::size_t m = series.frames.size() / block;
    if (m == 0) throw ConfigError("block larger than the series");
    FrameSeries out;
    out.base_integration_time_s = series.base_integration_time_s * static_cast<double>(block);
    out.frames.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        Spectrum f = series.frames[k * block];
        for (std::size_t j = 1; j < block; ++j) {
            const auto& g = series.frames[k * block + j];
            for (std::size_t i = 0; i < f.size(); ++i) f.values[i] += g.values[i];
        }
        for (auto& v : f.values) v /= static_cast<double>(block);
        out.frames.push_back(std::move(f));
    }
    return out;
}

double fit_scaling_exponent(const AllanCurve& curve, double tau_lo, double tau_hi) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
        if (curve.taus[i] >= tau_lo && curve.taus[i] <= tau_hi && curve.snr[i] > 0.0 &&
            std::isfinite(curve.snr[i])) {
            lx.push_back(std::log(curve.taus[i]));
            ly.push_back(std::log(curve.snr[i]));
        }
    }
    if (lx.size() < 3) {
        throw ConfigError("scaling fit needs at least three curve points in range");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-30) throw NumericalError("degenerate scaling fit");
    return (n * sxy - sx * sy) / den;
}

AllanCurve extrapolate_brightness(const AllanCurve& curve, double factor) {
    if (!(factor > 0.0)) throw DomainError("brightness factor must be positive");
    AllanCurve out = curve;
    const double gain = std::sqrt(factor);
    for (std::size_t i = 0; i < out.snr.size(); ++i) {
        out.snr[i] *= gain;
        out.sigma_a[i] /= gain;
    }
    return out;
}

FluxReport estimate_photon_flux(const Interferogram& frame, const FluxCalibration& calib,
                                std::optional<BandLimits> band_nm) {
    calib.validate();
    frame.spectrum.validate();
    if (!(frame.config.integration_time_s > 0.0)) {
        throw DomainError("frame has no integration time");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < frame.spectrum.size(); ++i) {
        if (band_nm && !band_nm->contains(frame.spectrum.axis[i])) continue;
        total += frame.spectrum.values[i];
    }
    FluxReport rep;
    rep.total_counts = total;
    rep.integration_time_s = frame.config.integration_time_s;
    rep.calibration = calib;
    rep.detected_photons_per_s =
        total / calib.gain_counts_per_photon / frame.config.integration_time_s;
    rep.source_referred_photons_per_s =
        rep.detected_photons_per_s / (calib.quantum_efficiency * calib.grating_efficiency);
    return rep;
}

} // namespace upspec
