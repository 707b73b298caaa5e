#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "upspec/spectrum.hpp"

namespace upspec {

// Signal-side source description. The signal band is the detector span in
// wavelength; the emission plateau sits inside it with raised-cosine
// shoulders falling to zero at the band edges.
struct SourceModel {
    double pump_wavelength_nm = 720.0;
    double band_lo_nm = 899.0;
    double band_hi_nm = 925.0;
    enum class Shape { flat_top, gaussian } shape = Shape::flat_top;
    double plateau_lo_nm = 901.5; // flat_top only
    double plateau_hi_nm = 922.5;
    double gaussian_center_nm = 912.0; // gaussian only
    double gaussian_fwhm_nm = 10.0;
    double total_detected_flux = 3.6e7; // photons per second

    double pump_wavenumber() const;
    void validate() const;
};

// Fringe-contrast model: balance prefactor from the two generation passes, a
// plateau visibility, and a Gaussian crystal-absorption dip on the idler
// axis. base_visibility and dip_floor describe the contrast entering the
// interferogram before the spectrometer response washes it out.
struct VisibilityModel {
    double base_visibility = 0.3226233; // see calibration::calibrate_response
    double dip_center_cm1 = 2899.0;
    double dip_fwhm_cm1 = 60.0;
    double dip_floor = 0.0922;
    double opld_mm = 1.45;
    double intensity_first_pass = 1.0;
    double intensity_second_pass = 1.0;

    void validate() const;
    // dip profile in [dip_floor/base_visibility, 1], times base visibility
    double plateau_times_dip(double nu_idler) const;
};

// Sample acting on the idler: intensity transmission and single-pass phase,
// both on an ascending idler wavenumber axis covering the probed band.
struct SampleModel {
    Spectrum transmission; // values in [0, 1]
    Spectrum phase;        // radians; empty axis means zero phase

    void validate() const;
    static SampleModel flat(double t, double nu_lo = 2700.0, double nu_hi = 3150.0);
};

struct AcquisitionConfig {
    double integration_time_s = 0.01;
    double pixel_pitch_nm = 0.089;
    double instrument_response_fwhm_nm = 0.2298924; // calibrated default
    double gain_counts_per_photon = 0.35;
    double quantum_efficiency = 0.42;
    double grating_efficiency = 0.50;
    std::uint64_t rng_seed = 1;
    int oversample = 8; // fine grid samples per pixel

    void validate() const;
};

// Detected frame: per-pixel counts vs signal wavelength plus the acquisition
// snapshot it was taken with.
struct Interferogram {
    Spectrum spectrum; // wavelength_nm axis, counts
    AcquisitionConfig config;
    double opld_mm = 0.0; // carried for downstream carrier selection
};

// Eq-style visibility prefactor: 2 sqrt(I1 I2) / (I1 + I2) * transmittance.
double visibility(double i1, double i2, double transmittance);

// Noiseless interferogram on a fine wavelength grid (oversample points per
// pixel): S(nu_s) [1 + V_eff(nu_s) cos(2 pi nu_s dL + 2 dphi_i)].
Spectrum ideal_interferogram(const SourceModel& src, const VisibilityModel& vis,
                             const SampleModel& sample, double pixel_pitch_nm = 0.089,
                             int oversample = 8);

// Gaussian slit convolution followed by pixel integration. A zero response
// width degenerates to plain bin averaging.
Spectrum apply_instrument_response(const Spectrum& fine, const AcquisitionConfig& cfg);

// Independent Poisson draw per pixel; deterministic for a fixed seed.
Interferogram apply_shot_noise(const Spectrum& expected_counts, const AcquisitionConfig& cfg,
                               std::uint64_t seed);

// Expected per-pixel counts for the full chain, scaled so the frame totals
// gain * flux * integration time.
Spectrum expected_frame(const SourceModel& src, const VisibilityModel& vis,
                        const SampleModel& sample, const AcquisitionConfig& cfg);

Interferogram simulate_frame(const SourceModel& src, const VisibilityModel& vis,
                             const SampleModel& sample, const AcquisitionConfig& cfg);

// Optional slow-noise terms for burst simulation.
struct BurstOptions {
    double gain_drift_per_s = 0.0;   // linear common-mode drift of the mean
    double rin_fractional = 0.0;     // per-frame common-mode gaussian jitter
    double dark_counts_per_pixel = 0.0;
};

// n frames with per-frame seeds cfg.rng_seed + index.
std::vector<Interferogram> simulate_burst(const SourceModel& src, const VisibilityModel& vis,
                                          const SampleModel& sample, const AcquisitionConfig& cfg,
                                          std::size_t n_frames, const BurstOptions& opts = {});

// Synthetic polymer transmission curves built from Gaussian absorbance bands
// at the characteristic C-H stretch positions. depth_scale multiplies the
// band absorbances.
enum class Polymer { polystyrene, polypropylene, polyethylene };
std::string to_string(Polymer p);
std::optional<Polymer> polymer_from_string(const std::string& name);
SampleModel synthetic_polymer_sample(Polymer kind, double depth_scale = 1.0);

// Bundle describing one simulated acquisition scenario.
struct Scenario {
    SourceModel source;
    VisibilityModel visibility;
    AcquisitionConfig acquisition;
    std::string sample_name = "none"; // none | flat:<T> | ps | pp | pe | csv:<path>
    std::size_t frames = 1;

    static Scenario nominal(); // calibrated instrument at the 1.45 mm set point
    SampleModel resolve_sample() const;
};

} // namespace upspec
