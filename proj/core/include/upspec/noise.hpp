#pragma once

#include <optional>
#include <span>
#include <vector>

#include "upspec/forward.hpp"
#include "upspec/spectrum.hpp"

namespace upspec {

// Ordered envelope (or generic) spectra on a common axis.
struct FrameSeries {
    std::vector<Spectrum> frames;
    double base_integration_time_s = 0.0;

    void validate() const; // >= 2 frames, identical axes
};

struct AllanCurve {
    std::vector<double> taus;
    std::vector<double> sigma_a;
    std::vector<double> snr; // 1 / sigma_a
};

struct FluxCalibration {
    double gain_counts_per_photon = 0.35;
    double quantum_efficiency = 0.42;
    double grating_efficiency = 0.50;
    double pixel_pitch_nm = 0.089;
    double bandwidth_nm = 22.0;

    void validate() const;
};

struct FluxReport {
    double total_counts = 0.0;
    double integration_time_s = 0.0;
    double detected_photons_per_s = 0.0;
    double source_referred_photons_per_s = 0.0;
    FluxCalibration calibration;
};

// Band selection for scalarization: mean over `band` (whole axis when unset)
// minus any `exclude` intervals.
struct AllanConfig {
    std::optional<BandLimits> band;
    std::vector<BandLimits> exclude;
};

// r_k = 2 (E_{k+1} - E_k) / (E_{k+1} + E_k) per consecutive pair. Excluded or
// zero-denominator points carry NaN.
std::vector<Spectrum> pairwise_residuals(const FrameSeries& series,
                                         std::span<const BandLimits> exclude);

// Two-sample deviation of interval-averaged scalars:
// sqrt( sum (y_{k+1}-y_k)^2 / (2 (M-1)) ). Input is already normalized; no
// further scaling is applied here.
double allan_deviation_scalars(std::span<const double> interval_means);

// Block the scalars into contiguous groups of `block`, average each, then
// apply allan_deviation_scalars. Trailing remainder frames are dropped.
double allan_deviation_at(std::span<const double> scalars, std::size_t block);

// Scalarize each frame (band mean outside the excluded regions, normalized
// by the mean over the frames actually used at each tau) and evaluate the
// deviation at every requested averaging time. Taus must be multiples of the
// base integration time with at least two intervals each.
AllanCurve allan_deviation(const FrameSeries& series, std::span<const double> taus,
                           const AllanConfig& cfg = {});

// Same curve with the SNR column populated (SNR = 1/sigma); kept as a named
// entry point for the scan workflow.
AllanCurve snr_scan(const FrameSeries& series, std::span<const double> taus,
                    const AllanConfig& cfg = {});

// Average `block` consecutive frames; base time multiplies accordingly.
FrameSeries block_average(const FrameSeries& series, std::size_t block);

// Least-squares slope of log SNR vs log tau over [tau_lo, tau_hi].
double fit_scaling_exponent(const AllanCurve& curve, double tau_lo, double tau_hi);

// Shot-noise brightness scaling: SNR multiplied by sqrt(factor) at every tau.
AllanCurve extrapolate_brightness(const AllanCurve& curve, double factor);

// Counts -> detected photons/s via the gain; source-referred additionally
// divides by the quantum and grating efficiencies. Optional wavelength band
// restricts the summed pixels.
FluxReport estimate_photon_flux(const Interferogram& frame, const FluxCalibration& calib,
                                std::optional<BandLimits> band_nm = {});

} // namespace upspec
