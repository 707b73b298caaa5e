#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "upspec/forward.hpp"
#include "upspec/retrieval.hpp"
#include "upspec/spectrum.hpp"

namespace upspec {

// Configuration of the path-difference scan that maps OPLD to spectral
// resolution and fringe visibility.
struct OpldScanConfig {
    std::vector<double> oplds_mm{0.5, 0.8, 1.15, 1.45};
    double feature_center_cm1 = 2975.0;
    double feature_fwhm_cm1 = 0.96;
    double feature_depth = 0.5;
    int frames_per_point = 0; // 0: fit the noiseless expectation frames
    // Resolution extraction uses a wider passband than the default retrieval
    // so the reconstructed width reflects the carrier spacing, not the
    // analysis filter.
    double scan_half_ratio = 0.8;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ResolutionPoint {
    double opld_mm = 0.0;
    double fwhm_cm1 = 0.0;
    double visibility = 0.0;
    double fwhm_uncertainty_cm1 = 0.0; // 0 for noiseless points
    bool converged = false;
    std::string diagnostic;
};

struct GaussianFit {
    double center = 0.0;
    double fwhm = 0.0;
    double amplitude = 0.0; // negative for a dip
    double offset = 0.0;
    double rms_residual = 0.0;
    int iterations = 0;
};

// Nonlinear least squares of offset + amplitude * exp(-(x-c)^2 / (2 s^2))
// with a bounded Levenberg-style damping schedule (max 200 iterations).
// Initial parameters come from the discrete extremum and its half-maximum
// crossings. Throws NumericalError when no extremum exists or the fit
// does not converge.
GaussianFit gaussian_fwhm_fit(const Spectrum& segment);

// Multiply the sample transmission by 1 - depth * g(nu) with a Gaussian g of
// the given FWHM. Throws DomainError when the centre is outside the sample
// axis.
SampleModel inject_feature(SampleModel sample, double center_cm1, double fwhm_cm1, double depth);

// Instrument bundle the scan runs against.
struct SimContext {
    SourceModel source;
    VisibilityModel visibility;
    AcquisitionConfig acquisition;

    static SimContext nominal();
};

// Simulate reference frames at the given OPLD, imprint the narrowband
// feature on the recorded fringe component, retrieve the transmission and
// fit a Gaussian to the reconstructed dip. Also reports the off-feature peak
// envelope visibility from the noiseless frames. Fit failures are returned
// as non-converged points with diagnostics rather than thrown.
ResolutionPoint measure_resolution(double opld_mm, const OpldScanConfig& cfg,
                                   const SimContext& ctx);

std::vector<ResolutionPoint> opld_scan(const OpldScanConfig& cfg, const SimContext& ctx);

// Observed peak visibility of the noiseless instrument at one OPLD: envelope
// of the reference frame divided by the fringe-free frame, maximum over the
// interior of the analysis band.
double peak_visibility(double opld_mm, const SimContext& ctx);

// Solve the two-point washout calibration: a Gaussian slit width and a
// plateau visibility such that the observed peak visibility hits the two
// targets at the two path differences. Returns {sigma_nm, base_visibility}.
struct ResponseCalibration {
    double sigma_nm = 0.0;
    double base_visibility = 0.0;
};
ResponseCalibration calibrate_response(double opld1_mm, double target_vis1, double opld2_mm,
                                       double target_vis2, double eval_wavelength_nm = 912.0,
                                       double pixel_pitch_nm = 0.089);

} // namespace upspec
