#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "upspec/envelope.hpp"
#include "upspec/forward.hpp"
#include "upspec/spectrum.hpp"

namespace upspec {

struct RetrievalConfig {
    // Signal-side analysis band in cm^-1; unset means the full frame range.
    std::optional<BandLimits> analysis_band;
    double pump_wavelength_nm = 720.0;
    double resample_factor = 2.0;

    // Carrier frequency in cycles per cm^-1. Unset: taken from the frame's
    // recorded path difference when present, else detected from the data.
    std::optional<double> carrier_cycles;
    double passband_half_ratio = 0.5;
    double band_taper = 0.2;
    double edge_exclusion = 0.05;
    int ar_order = 6;

    int baseline_order = 2;
    std::vector<BandLimits> baseline_regions; // idler cm^-1; empty disables

    double saturation_k = 3.0;
    double clip_floor = 1e-3;
    double clip_ceiling = 1.2;

    void validate() const;
};

// Envelope with its scalar in-phase noise estimate and the carrier used.
struct Envelope {
    Spectrum spectrum; // signal wavenumber axis, ascending
    double sigma = 0.0;
    double carrier = 0.0;
};

struct TransmissionSpectrum {
    std::vector<double> axis; // idler cm^-1, ascending
    std::vector<double> values;
    std::vector<double> sigma;
    std::vector<std::uint8_t> saturated;

    std::size_t size() const { return axis.size(); }
};

struct AbsorbanceSpectrum {
    std::vector<double> axis; // idler cm^-1, ascending
    std::vector<double> values;
    std::vector<double> sigma;
    std::vector<std::uint8_t> saturated;

    std::size_t size() const { return axis.size(); }
};

// Detect the dominant fringe frequency of a frame (cycles per cm^-1 on the
// converted axis) from the positive-frequency spectrum away from DC.
double detect_carrier(const Interferogram& frame, const RetrievalConfig& cfg);

// Emission plateau of a uniform wavenumber record: the usable analysis band
// when none is configured. Derive it from a reference frame, never from an
// absorbing sample.
BandLimits detect_plateau_band(const Spectrum& uniform_wavenumber);

// resample -> truncate -> analytic envelope, with a scalar noise estimate
// from the frame's out-of-band spectral power.
Envelope extract_envelope(const Interferogram& frame, const RetrievalConfig& cfg);

// Envelope ratio remapped to the ascending idler axis with noise propagation,
// saturation flags and clipping.
TransmissionSpectrum transmission(const Envelope& sample, const Envelope& reference,
                                  const RetrievalConfig& cfg);

// Beer-Lambert conversion with first-order noise propagation.
AbsorbanceSpectrum absorbance(const TransmissionSpectrum& t);

// Least-squares polynomial over the configured baseline regions, subtracted
// everywhere. Values may go slightly negative afterwards.
AbsorbanceSpectrum baseline_correct(const AbsorbanceSpectrum& a, const RetrievalConfig& cfg);

// Full single-pair pipeline. Baseline correction runs only when regions are
// configured.
AbsorbanceSpectrum retrieve(const Interferogram& sample, const Interferogram& reference,
                            const RetrievalConfig& cfg);

// Mean of several frames with matching axes (burst co-addition ahead of
// retrieval; equivalent to a longer integration at the same flux).
Interferogram average_frames(const std::vector<Interferogram>& frames);

} // namespace upspec
