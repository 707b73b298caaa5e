#include "upspec/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "upspec/errors.hpp"

namespace upspec {

std::string to_string(AxisKind kind) {
    switch (kind) {
    case AxisKind::wavelength_nm: return "wavelength_nm";
    case AxisKind::wavenumber_cm1: return "wavenumber_cm1";
    }
    return "unknown";
}

AxisKind axis_kind_from_string(const std::string& s) {
    if (s == "wavelength_nm") return AxisKind::wavelength_nm;
    if (s == "wavenumber_cm1") return AxisKind::wavenumber_cm1;
    throw FormatError("unknown axis_kind: " + s);
}

void Spectrum::validate() const {
    if (axis.size() != values.size()) {
        throw FormatError("spectrum axis/values length mismatch");
    }
    if (axis.size() >= 2) {
        const bool up = axis[1] > axis[0];
        for (std::size_t i = 1; i < axis.size(); ++i) {
            if (up ? axis[i] <= axis[i - 1] : axis[i] >= axis[i - 1]) {
                throw FormatError("spectrum axis is not strictly monotone");
            }
        }
    }
}

void BandLimits::validate() const {
    if (!(lo < hi)) {
        throw ConfigError("band limits require lo < hi");
    }
}

double wavelength_to_wavenumber(double lambda_nm) {
    if (!(lambda_nm > 0.0)) {
        throw DomainError("wavelength must be positive");
    }
    return 1.0e7 / lambda_nm;
}

double signal_to_idler_wavenumber(double nu_signal, double nu_pump) {
    if (!(nu_signal > 0.0) || !(nu_signal < nu_pump)) {
        throw DomainError("signal wavenumber must satisfy 0 < nu_s < nu_p");
    }
    return nu_pump - nu_signal;
}

Spectrum truncate_band(const Spectrum& s, const BandLimits& band) {
    s.validate();
    band.validate();
    Spectrum out;
    out.axis_kind = s.axis_kind;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (band.contains(s.axis[i])) {
            out.axis.push_back(s.axis[i]);
            out.values.push_back(s.values[i]);
        }
    }
    if (out.axis.empty()) {
        throw DomainError("band does not overlap the spectrum axis");
    }
    return out;
}

namespace {

// Slope estimates for Hermite interpolation: 6th-order centered differences
// on the interior, one-sided at the boundaries. Grid may be mildly
// non-uniform; the stencil assumes local uniformity which holds for pixel
// grids and uniform resampled grids.
std::vector<double> hermite_slopes(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 3 && i + 3 < n) {
            const double h = (x[i + 3] - x[i - 3]) / 6.0;
            d[i] = (-y[i - 3] + 9.0 * y[i - 2] - 45.0 * y[i - 1] + 45.0 * y[i + 1] -
                    9.0 * y[i + 2] + y[i + 3]) /
                   (60.0 * h);
        } else if (i == 0) {
            d[i] = (y[1] - y[0]) / (x[1] - x[0]);
        } else if (i + 1 == n) {
            d[i] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
        } else {
            d[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
        }
    }
    return d;
}

std::size_t find_cell(std::span<const double> x, double xq, std::size_t hint) {
    const std::size_t n = x.size();
    std::size_t i = hint;
    if (i + 1 >= n) i = n - 2;
    while (i > 0 && xq < x[i]) --i;
    while (i + 2 < n && xq >= x[i + 1]) ++i;
    return i;
}

} // namespace

std::vector<double> interp_hermite(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> x_new) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DomainError("interp_hermite needs at least two samples");
    }
    const auto d = hermite_slopes(x, y);
    std::vector<double> out(x_new.size());
    std::size_t cell = 0;
    for (std::size_t q = 0; q < x_new.size(); ++q) {
        cell = find_cell(x, x_new[q], cell);
        const double h = x[cell + 1] - x[cell];
        const double t = (x_new[q] - x[cell]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        out[q] = h00 * y[cell] + h10 * h * d[cell] + h01 * y[cell + 1] + h11 * h * d[cell + 1];
    }
    return out;
}

std::vector<double> interp_pchip(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> x_new) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) {
        throw DomainError("interp_pchip needs at least two samples");
    }
    std::vector<double> slope(n - 1), d(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        slope[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    }
    // Fritsch-Carlson derivative limiting
    d[0] = slope[0];
    d[n - 1] = slope[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (slope[i - 1] * slope[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double h0 = x[i] - x[i - 1];
            const double h1 = x[i + 1] - x[i];
            const double w1 = 2.0 * h1 + h0;
            const double w2 = h1 + 2.0 * h0;
            d[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
        }
    }
    std::vector<double> out(x_new.size());
    std::size_t cell = 0;
    for (std::size_t q = 0; q < x_new.size(); ++q) {
        double xq = x_new[q];
        // clamp queries to the data range; callers keep queries in-range
        xq = std::clamp(xq, x.front(), x.back());
        cell = find_cell(x, xq, cell);
        const double h = x[cell + 1] - x[cell];
        const double t = (xq - x[cell]) / h;
        const double t2 = t * t, t3 = t2 * t;
        out[q] = (2.0 * t3 - 3.0 * t2 + 1.0) * y[cell] + (t3 - 2.0 * t2 + t) * h * d[cell] +
                 (-2.0 * t3 + 3.0 * t2) * y[cell + 1] + (t3 - t2) * h * d[cell + 1];
    }
    return out;
}

Spectrum resample_to_uniform_wavenumber(const Spectrum& s, std::size_t n_points) {
    s.validate();
    if (s.axis_kind != AxisKind::wavelength_nm) {
        throw DomainError("resample_to_uniform_wavenumber expects a wavelength spectrum");
    }
    if (n_points < 2 || s.size() < 2) {
        throw DomainError("resampling needs at least two points");
    }
    // Wavelengths ascending; the converted wavenumber axis descends, so the
    // output grid runs from 1e7/lambda_max up to 1e7/lambda_min.
    std::vector<double> lam(s.axis);
    std::vector<double> val(s.values);
    if (!s.ascending()) {
        std::reverse(lam.begin(), lam.end());
        std::reverse(val.begin(), val.end());
    }
    const double nu_lo = wavelength_to_wavenumber(lam.back());
    const double nu_hi = wavelength_to_wavenumber(lam.front());

    Spectrum out;
    out.axis_kind = AxisKind::wavenumber_cm1;
    out.axis.resize(n_points);
    const double step = (nu_hi - nu_lo) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        out.axis[i] = nu_lo + step * static_cast<double>(i);
    }
    out.axis.back() = nu_hi;

    // Interpolate in the wavelength domain at lambda(nu); the pixel grid is
    // uniform there, which is where the high-order slope stencil is exact.
    std::vector<double> lam_query(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        lam_query[i] = 1.0e7 / out.axis[i];
    }
    std::reverse(lam_query.begin(), lam_query.end());
    auto vals = interp_hermite(lam, val, lam_query);
    std::reverse(vals.begin(), vals.end());
    out.values = std::move(vals);
    return out;
}

} // namespace upspec
