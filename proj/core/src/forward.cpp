#include "upspec/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "upspec/errors.hpp"
#include "upspec/io.hpp"
#include "upspec/rng.hpp"

namespace upspec {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLn2x4 = 2.772588722239781; // 4 ln 2
} // namespace

double SourceModel::pump_wavenumber() const {
    return wavelength_to_wavenumber(pump_wavelength_nm);
}

void SourceModel::validate() const {
    if (!(pump_wavelength_nm > 0.0)) throw ConfigError("pump wavelength must be positive");
    if (!(band_lo_nm < band_hi_nm)) throw ConfigError("signal band requires lo < hi");
    if (!(band_lo_nm > pump_wavelength_nm) || !(band_hi_nm < 2.0 * pump_wavelength_nm)) {
        throw ConfigError("signal band must lie between the pump and its degenerate point");
    }
    if (!(total_detected_flux > 0.0)) throw ConfigError("detected flux must be positive");
    if (shape == Shape::flat_top) {
        if (!(band_lo_nm <= plateau_lo_nm && plateau_lo_nm < plateau_hi_nm &&
              plateau_hi_nm <= band_hi_nm)) {
            throw ConfigError("flat-top plateau must lie inside the signal band");
        }
    } else {
        if (!(gaussian_fwhm_nm > 0.0)) throw ConfigError("gaussian width must be positive");
    }
}

void VisibilityModel::validate() const {
    if (!(dip_floor > 0.0) || !(dip_floor <= base_visibility) || !(base_visibility <= 1.0)) {
        throw ConfigError("require 0 < dip_floor <= base_visibility <= 1");
    }
    if (!(opld_mm > 0.0)) throw ConfigError("path difference must be positive");
    if (!(dip_fwhm_cm1 > 0.0)) throw ConfigError("dip width must be positive");
    if (!(intensity_first_pass > 0.0) || !(intensity_second_pass > 0.0)) {
        throw ConfigError("pass intensities must be positive");
    }
}

double VisibilityModel::plateau_times_dip(double nu_idler) const {
    const double u = (nu_idler - dip_center_cm1) / dip_fwhm_cm1;
    const double g = std::exp(-kLn2x4 * u * u);
    return base_visibility * (1.0 - (1.0 - dip_floor / base_visibility) * g);
}

void SampleModel::validate() const {
    transmission.validate();
    if (transmission.axis_kind != AxisKind::wavenumber_cm1 || !transmission.ascending()) {
        throw DomainError("sample transmission must be on an ascending wavenumber axis");
    }
    for (double t : transmission.values) {
        if (!(t >= 0.0) || !(t <= 1.0)) {
            throw DomainError("sample transmission values must lie in [0, 1]");
        }
    }
    if (!phase.axis.empty()) {
        phase.validate();
        if (phase.axis_kind != AxisKind::wavenumber_cm1) {
            throw DomainError("sample phase must be on a wavenumber axis");
        }
    }
}

SampleModel SampleModel::flat(double t, double nu_lo, double nu_hi) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw DomainError("flat transmission must lie in [0, 1]");
    }
    // dense grid so later pointwise edits (feature injection) resolve
    SampleModel s;
    s.transmission.axis_kind = AxisKind::wavenumber_cm1;
    const double step = 0.5;
    const std::size_t n = static_cast<std::size_t>((nu_hi - nu_lo) / step) + 1;
    s.transmission.axis.resize(n);
    s.transmission.values.assign(n, t);
    for (std::size_t i = 0; i < n; ++i) {
        s.transmission.axis[i] = nu_lo + step * static_cast<double>(i);
    }
    return s;
}

void AcquisitionConfig::validate() const {
    if (!(integration_time_s > 0.0)) throw ConfigError("integration time must be positive");
    if (!(pixel_pitch_nm > 0.0)) throw ConfigError("pixel pitch must be positive");
    if (instrument_response_fwhm_nm < 0.0) throw ConfigError("response width must be >= 0");
    if (!(gain_counts_per_photon > 0.0)) throw ConfigError("gain must be positive");
    if (!(quantum_efficiency > 0.0) || quantum_efficiency > 1.0 ||
        !(grating_efficiency > 0.0) || grating_efficiency > 1.0) {
        throw ConfigError("efficiencies must lie in (0, 1]");
    }
    if (oversample < 4) throw ConfigError("oversample must be at least 4");
}

double visibility(double i1, double i2, double transmittance) {
    if (!(i1 > 0.0) || !(i2 > 0.0)) {
        throw DomainError("pass intensities must be positive");
    }
    if (!(transmittance >= 0.0) || !(transmittance <= 1.0)) {
        throw DomainError("transmittance must lie in [0, 1]");
    }
    return 2.0 * std::sqrt(i1 * i2) / (i1 + i2) * transmittance;
}

namespace {

double source_shape(const SourceModel& src, double lam) {
    if (lam < src.band_lo_nm || lam > src.band_hi_nm) return 0.0;
    if (src.shape == SourceModel::Shape::gaussian) {
        const double u = (lam - src.gaussian_center_nm) / src.gaussian_fwhm_nm;
        return std::exp(-kLn2x4 * u * u);
    }
    if (lam < src.plateau_lo_nm) {
        const double w = src.plateau_lo_nm - src.band_lo_nm;
        return w > 0.0 ? 0.5 * (1.0 - std::cos(kPi * (lam - src.band_lo_nm) / w)) : 1.0;
    }
    if (lam > src.plateau_hi_nm) {
        const double w = src.band_hi_nm - src.plateau_hi_nm;
        return w > 0.0 ? 0.5 * (1.0 - std::cos(kPi * (src.band_hi_nm - lam) / w)) : 1.0;
    }
    return 1.0;
}

} // namespace

Spectrum ideal_interferogram(const SourceModel& src, const VisibilityModel& vis,
                             const SampleModel& sample, double pixel_pitch_nm, int oversample) {
    src.validate();
    vis.validate();
    sample.validate();
    if (!(pixel_pitch_nm > 0.0) || oversample < 4) {
        throw ConfigError("ideal_interferogram needs a positive pitch and oversample >= 4");
    }
    const double nu_p = src.pump_wavenumber();
    const double pitch = pixel_pitch_nm;
    const std::size_t n_px = static_cast<std::size_t>(
        std::floor((src.band_hi_nm - src.band_lo_nm) / pitch));
    const std::size_t n_fine = n_px * static_cast<std::size_t>(oversample);

    // sample band coverage check: long signal wavelengths probe the high
    // end of the idler axis
    const double nu_i_min = nu_p - wavelength_to_wavenumber(src.band_lo_nm) + 1e-9;
    const double nu_i_max = nu_p - wavelength_to_wavenumber(src.band_hi_nm) - 1e-9;
    if (sample.transmission.axis.front() > nu_i_min ||
        sample.transmission.axis.back() < nu_i_max) {
        throw DomainError("sample axis does not cover the idler band");
    }

    Spectrum out;
    out.axis_kind = AxisKind::wavelength_nm;
    out.axis.resize(n_fine);
    out.values.resize(n_fine);
    const double step = pitch / static_cast<double>(oversample);
    std::vector<double> nu_i(n_fine);
    for (std::size_t i = 0; i < n_fine; ++i) {
        out.axis[i] = src.band_lo_nm + step * (static_cast<double>(i) + 0.5);
        nu_i[i] = nu_p - 1.0e7 / out.axis[i];
    }
    auto t_interp = interp_pchip(sample.transmission.axis, sample.transmission.values, nu_i);
    std::vector<double> phi(n_fine, 0.0);
    if (!sample.phase.axis.empty()) {
        phi = interp_pchip(sample.phase.axis, sample.phase.values, nu_i);
    }
    const double balance = visibility(vis.intensity_first_pass, vis.intensity_second_pass, 1.0);
    const double opld_cm = vis.opld_mm * 0.1;
    for (std::size_t i = 0; i < n_fine; ++i) {
        const double nu_s = nu_p - nu_i[i];
        const double t = std::clamp(t_interp[i], 0.0, 1.0);
        const double v_eff = balance * t * vis.plateau_times_dip(nu_i[i]);
        const double s = source_shape(src, out.axis[i]);
        out.values[i] = s * (1.0 + v_eff * std::cos(2.0 * kPi * nu_s * opld_cm + 2.0 * phi[i]));
    }
    return out;
}

Spectrum apply_instrument_response(const Spectrum& fine, const AcquisitionConfig& cfg) {
    fine.validate();
    cfg.validate();
    if (fine.axis_kind != AxisKind::wavelength_nm || fine.size() < 8) {
        throw DomainError("instrument response expects a fine wavelength spectrum");
    }
    const double dx = fine.axis[1] - fine.axis[0];
    if (dx * 4.0 > cfg.pixel_pitch_nm) {
        throw ConfigError("fine grid must be at least 4x denser than the pixel pitch");
    }
    std::vector<double> blurred = fine.values;
    if (cfg.instrument_response_fwhm_nm > 0.0) {
        const double sigma = cfg.instrument_response_fwhm_nm / 2.3548200450309493;
        const int kw = static_cast<int>(std::ceil(4.0 * sigma / dx));
        std::vector<double> kernel(static_cast<std::size_t>(2 * kw + 1));
        double norm = 0.0;
        for (int j = -kw; j <= kw; ++j) {
            const double u = static_cast<double>(j) * dx / sigma;
            kernel[static_cast<std::size_t>(j + kw)] = std::exp(-0.5 * u * u);
            norm += kernel[static_cast<std::size_t>(j + kw)];
        }
        for (auto& k : kernel) k /= norm;
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(fine.size());
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = -kw; j <= kw; ++j) {
                std::ptrdiff_t idx = i + j;
                idx = std::clamp<std::ptrdiff_t>(idx, 0, n - 1);
                acc += kernel[static_cast<std::size_t>(j + kw)] *
                       fine.values[static_cast<std::size_t>(idx)];
            }
            blurred[static_cast<std::size_t>(i)] = acc;
        }
    }
    // integrate into pixels
    const std::size_t per_px = static_cast<std::size_t>(
        std::llround(cfg.pixel_pitch_nm / dx));
    if (per_px < 1) throw ConfigError("pixel pitch finer than the fine grid");
    const std::size_t n_px = fine.size() / per_px;
    Spectrum out;
    out.axis_kind = AxisKind::wavelength_nm;
    out.axis.resize(n_px);
    out.values.resize(n_px);
    for (std::size_t p = 0; p < n_px; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < per_px; ++j) {
            acc += blurred[p * per_px + j];
        }
        out.values[p] = acc / static_cast<double>(per_px);
        out.axis[p] = fine.axis[0] + (static_cast<double>(p) + 0.5) * cfg.pixel_pitch_nm -
                      0.5 * dx; // centre of the pixel's fine-sample block
    }
    return out;
}

Interferogram apply_shot_noise(const Spectrum& expected_counts, const AcquisitionConfig& cfg,
                               std::uint64_t seed) {
    expected_counts.validate();
    for (double v : expected_counts.values) {
        if (v < 0.0) throw DomainError("expected counts must be non-negative");
    }
    Rng rng(seed);
    Interferogram frame;
    frame.spectrum = expected_counts;
    frame.config = cfg;
    for (auto& v : frame.spectrum.values) {
        v = static_cast<double>(rng.poisson(v));
    }
    return frame;
}

Spectrum expected_frame(const SourceModel& src, const VisibilityModel& vis,
                        const SampleModel& sample, const AcquisitionConfig& cfg) {
    cfg.validate();
    auto fine = ideal_interferogram(src, vis, sample, cfg.pixel_pitch_nm, cfg.oversample);
    auto pixels = apply_instrument_response(fine, cfg);
    double total = 0.0;
    for (double v : pixels.values) total += v;
    if (!(total > 0.0)) throw DomainError("frame has no detected signal");
    const double target =
        cfg.gain_counts_per_photon * src.total_detected_flux * cfg.integration_time_s;
    const double scale = target / total;
    for (auto& v : pixels.values) v *= scale;
    return pixels;
}

Interferogram simulate_frame(const SourceModel& src, const VisibilityModel& vis,
                             const SampleModel& sample, const AcquisitionConfig& cfg) {
    auto expected = expected_frame(src, vis, sample, cfg);
    auto frame = apply_shot_noise(expected, cfg, cfg.rng_seed);
    frame.opld_mm = vis.opld_mm;
    return frame;
}

std::vector<Interferogram> simulate_burst(const SourceModel& src, const VisibilityModel& vis,
                                          const SampleModel& sample, const AcquisitionConfig& cfg,
                                          std::size_t n_frames, const BurstOptions& opts) {
    if (n_frames == 0) throw ConfigError("burst needs at least one frame");
    auto expected = expected_frame(src, vis, sample, cfg);
    std::vector<Interferogram> frames;
    frames.reserve(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        const std::uint64_t seed = cfg.rng_seed + i;
        double scale = 1.0;
        if (opts.gain_drift_per_s != 0.0) {
            scale *= 1.0 + opts.gain_drift_per_s * cfg.integration_time_s * static_cast<double>(i);
        }
        if (opts.rin_fractional != 0.0) {
            Rng jitter(seed ^ 0x9e3779b97f4a7c15ULL);
            scale *= 1.0 + opts.rin_fractional * jitter.gaussian();
        }
        scale = std::max(scale, 0.0);
        Spectrum exp_i = expected;
        for (auto& v : exp_i.values) {
            v = v * scale + opts.dark_counts_per_pixel;
        }
        auto frame = apply_shot_noise(exp_i, cfg, seed);
        frame.opld_mm = vis.opld_mm;
        frame.config.rng_seed = seed;
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::string to_string(Polymer p) {
    switch (p) {
    case Polymer::polystyrene: return "polystyrene";
    case Polymer::polypropylene: return "polypropylene";
    case Polymer::polyethylene: return "polyethylene";
    }
    return "unknown";
}

std::optional<Polymer> polymer_from_string(const std::string& name) {
    if (name == "polystyrene" || name == "ps") return Polymer::polystyrene;
    if (name == "polypropylene" || name == "pp") return Polymer::polypropylene;
    if (name == "polyethylene" || name == "pe") return Polymer::polyethylene;
    return std::nullopt;
}

SampleModel synthetic_polymer_sample(Polymer kind, double depth_scale) {
    struct Band {
        double center, fwhm, absorbance;
    };
    std::vector<Band> bands;
    switch (kind) {
    case Polymer::polystyrene:
        bands = {{3025.0, 22.0, 0.35}, {2924.0, 30.0, 0.5229}, {2850.0, 28.0, 0.30}};
        break;
    case Polymer::polypropylene:
        bands = {{2953.0, 24.0, 0.42}, {2918.0, 26.0, 0.50}, {2838.0, 26.0, 0.33}};
        break;
    case Polymer::polyethylene:
        bands = {{2915.0, 24.0, 0.5229}, {2850.0, 22.0, 0.40}};
        break;
    }
    SampleModel s;
    s.transmission.axis_kind = AxisKind::wavenumber_cm1;
    const double lo = 2700.0, hi = 3150.0, step = 0.25;
    const std::size_t n = static_cast<std::size_t>((hi - lo) / step) + 1;
    s.transmission.axis.resize(n);
    s.transmission.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double nu = lo + step * static_cast<double>(i);
        double a = 0.0;
        for (const auto& b : bands) {
            const double u = (nu - b.center) / b.fwhm;
            a += depth_scale * b.absorbance * std::exp(-kLn2x4 * u * u);
        }
        s.transmission.axis[i] = nu;
        s.transmission.values[i] = std::clamp(std::pow(10.0, -a), 0.0, 1.0);
    }
    return s;
}

Scenario Scenario::nominal() {
    Scenario sc;
    sc.source = SourceModel{};
    sc.visibility = VisibilityModel{};
    sc.acquisition = AcquisitionConfig{};
    sc.sample_name = "none";
    sc.frames = 1;
    return sc;
}

SampleModel Scenario::resolve_sample() const {
    if (sample_name.empty() || sample_name == "none") {
        return SampleModel::flat(1.0);
    }
    if (sample_name.rfind("flat:", 0) == 0) {
        return SampleModel::flat(std::stod(sample_name.substr(5)));
    }
    if (sample_name.rfind("csv:", 0) == 0) {
        SampleModel s;
        s.transmission = read_spectrum_csv(sample_name.substr(4));
        s.validate();
        return s;
    }
    if (auto p = polymer_from_string(sample_name)) {
        return synthetic_polymer_sample(*p);
    }
    throw ConfigError("unknown sample: " + sample_name);
}

} // namespace upspec
