#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace upspec {

enum class AxisKind {
    wavelength_nm,
    wavenumber_cm1,
};

std::string to_string(AxisKind kind);
AxisKind axis_kind_from_string(const std::string& s);

// Generic (axis, values) pair on a strictly monotone grid.
struct Spectrum {
    std::vector<double> axis;
    std::vector<double> values;
    AxisKind axis_kind = AxisKind::wavenumber_cm1;

    std::size_t size() const { return axis.size(); }

    // Throws FormatError on length mismatch or a non-monotone axis.
    void validate() const;

    bool ascending() const { return axis.size() < 2 || axis[1] > axis[0]; }
};

// Inclusive band limits in cm^-1 (or in the axis units of whatever grid
// they are applied to).
struct BandLimits {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
    void validate() const; // lo < hi
};

// nu = 1e7 / lambda. Throws DomainError on non-positive input.
double wavelength_to_wavenumber(double lambda_nm);

// Energy conservation of the pair process: nu_i = nu_p - nu_s.
// Throws DomainError unless 0 < nu_signal < nu_pump.
double signal_to_idler_wavenumber(double nu_signal, double nu_pump);

// Keep exactly the samples with axis value in [band.lo, band.hi].
// Throws DomainError when the overlap is empty.
Spectrum truncate_band(const Spectrum& s, const BandLimits& band);

// Convert a wavelength-domain spectrum to a uniform wavenumber grid spanning
// the converted input range (endpoints preserved). Values come from cubic
// Hermite interpolation with high-order slope estimates; see also
// interp_pchip for the shape-preserving variant used on smooth model curves.
Spectrum resample_to_uniform_wavenumber(const Spectrum& s, std::size_t n_points);

// Cubic Hermite interpolation with 6th-order centered slope estimates on the
// interior. Best for oscillatory data (preserves fringe amplitude).
std::vector<double> interp_hermite(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> x_new);

// Monotone-preserving cubic (Fritsch-Carlson). Best for smooth bounded model
// curves such as transmission profiles; never overshoots.
std::vector<double> interp_pchip(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> x_new);

} // namespace upspec
