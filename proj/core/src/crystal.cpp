#include "upspec/crystal.hpp"

#include <cmath>

#include "upspec/errors.hpp"

namespace upspec {

void CrystalParams::validate() const {
    if (!(alpha_per_cm > 0.0)) throw DomainError("absorption coefficient must be positive");
    if (!(length_cm > 0.0)) throw DomainError("crystal length must be positive");
}

double snr_relative(double length_cm, double alpha_per_cm) {
    if (!(length_cm > 0.0) || !(alpha_per_cm > 0.0)) {
        throw DomainError("snr_relative needs positive length and absorption");
    }
    return std::sqrt(length_cm) * std::exp(-0.5 * alpha_per_cm * length_cm);
}

double optimal_length(double alpha_per_cm) {
    if (!(alpha_per_cm > 0.0)) throw DomainError("absorption coefficient must be positive");
    return 1.0 / alpha_per_cm;
}

double numeric_optimum(double alpha_per_cm, std::pair<double, double> bracket_cm) {
    if (!(alpha_per_cm > 0.0)) throw DomainError("absorption coefficient must be positive");
    double lo = bracket_cm.first;
    double hi = bracket_cm.second;
    if (!(lo > 0.0) || !(lo < hi)) throw DomainError("invalid bracket");
    const double opt = 1.0 / alpha_per_cm;
    if (opt < lo || opt > hi) {
        throw DomainError("bracket does not contain the optimum");
    }
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = snr_relative(c, alpha_per_cm);
    double fd = snr_relative(d, alpha_per_cm);
    while (b - a > 1e-9) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = snr_relative(c, alpha_per_cm);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = snr_relative(d, alpha_per_cm);
        }
    }
    return 0.5 * (a + b);
}

CrystalCurve crystal_curve(double alpha_per_cm, double lo_cm, double hi_cm, std::size_t n) {
    if (!(alpha_per_cm > 0.0) || !(lo_cm > 0.0) || !(lo_cm < hi_cm) || n < 2) {
        throw DomainError("invalid curve parameters");
    }
    CrystalCurve curve;
    curve.length_cm.resize(n);
    curve.snr_normalized.resize(n);
    const double peak = snr_relative(optimal_length(alpha_per_cm), alpha_per_cm);
    for (std::size_t i = 0; i < n; ++i) {
        const double l =
            lo_cm + (hi_cm - lo_cm) * static_cast<double>(i) / static_cast<double>(n - 1);
        curve.length_cm[i] = l;
        curve.snr_normalized[i] = snr_relative(l, alpha_per_cm) / peak;
    }
    return curve;
}

} // namespace upspec
