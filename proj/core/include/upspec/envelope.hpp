#pragma once

#include "upspec/spectrum.hpp"

namespace upspec {

// Fourier-domain band-pass used to isolate the fringe term before taking the
// magnitude of the analytic signal. Frequencies are in cycles per cm^-1, so a
// path difference of D cm puts the carrier at D cycles per cm^-1.
struct EnvelopeFilter {
    BandLimits passband;                   // cycles per cm^-1, must exclude DC
    double edge_exclusion_fraction = 0.05; // discarded per side of the record
    double band_taper = 0.2;               // raised-cosine fraction of the passband width
    int ar_order = 6;                      // autoregressive order for record extension

    // Carrier-centred passband for a given path difference: centre at the
    // fringe frequency, half-width half_ratio times the centre.
    static EnvelopeFilter for_opld(double opld_mm, double half_ratio = 0.5);

    double center() const { return 0.5 * (passband.lo + passband.hi); }
    double half_width() const { return 0.5 * (passband.hi - passband.lo); }
    void validate() const;
};

// |s + i H[s]| after band-pass isolation of the fringe term. The input must
// be on a uniform wavenumber grid resolving the carrier with at least four
// samples per fringe period. The returned spectrum has the edge-excluded
// samples removed.
//
// Implementation: smooth background removal (Fourier low-pass), Burg
// autoregressive extension of the record to suppress boundary leakage, a
// raised-cosine tapered band-pass over the positive-frequency carrier band,
// inverse transform, magnitude.
Spectrum analytic_envelope(const Spectrum& s, const EnvelopeFilter& filter);

// Standard deviation of the in-phase envelope noise produced by white noise
// of standard deviation sigma_sample per input sample with spacing
// sample_spacing (cm^-1 per sample), filtered by `filter`. Exact for white
// noise; validated against Monte Carlo in the tests.
double envelope_noise_gain(const EnvelopeFilter& filter, double sample_spacing);

// Estimate the white-noise standard deviation per sample of a (pixel-grid)
// record from the power in a guard band just above the carrier passband.
// Returns 0 when the guard band has no usable bins.
double estimate_sample_noise(const Spectrum& record, const EnvelopeFilter& filter);

} // namespace upspec
