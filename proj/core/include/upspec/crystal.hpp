#pragma once

#include <utility>
#include <vector>

namespace upspec {

struct CrystalParams {
    double alpha_per_cm = 0.78; // idler absorption coefficient
    double length_cm = 3.0;

    void validate() const;
};

// Relative signal-to-noise of a crystal of the given length under intrinsic
// idler absorption: sqrt(L) * exp(-alpha L / 2), unnormalized.
double snr_relative(double length_cm, double alpha_per_cm);

// Analytic optimum 1/alpha.
double optimal_length(double alpha_per_cm);

// Golden-section search of snr_relative over [lo, hi]; the bracket must
// contain the optimum. Agrees with optimal_length to 1e-6 cm.
double numeric_optimum(double alpha_per_cm, std::pair<double, double> bracket_cm);

// Sampled curve normalized to a unit peak, for plotting and CSV export.
struct CrystalCurve {
    std::vector<double> length_cm;
    std::vector<double> snr_normalized;
};
CrystalCurve crystal_curve(double alpha_per_cm, double lo_cm, double hi_cm, std::size_t n);

} // namespace upspec
