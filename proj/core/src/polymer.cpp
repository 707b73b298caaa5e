#include "upspec/polymer.hpp"

#include <algorithm>
#include <cmath>

#include "upspec/calibration.hpp"
#include "upspec/errors.hpp"

namespace upspec {

void PeakLibrary::validate() const {
    if (entries.empty()) throw ConfigError("peak library is empty");
    for (const auto& [name, peaks] : entries) {
        if (name.empty()) throw ConfigError("library entry without a name");
        if (peaks.empty()) throw ConfigError("library entry without peaks: " + name);
        for (const auto& p : peaks) {
            if (!(p.tolerance_cm1 > 0.0) || !(p.weight > 0.0)) {
                throw ConfigError("library peaks need positive tolerance and weight");
            }
        }
    }
}

PeakLibrary builtin_library() {
    PeakLibrary lib;
    lib.entries = {
        {"polyethylene", {{2915.0, 8.0, 1.0}, {2850.0, 8.0, 1.0}}},
        {"polypropylene", {{2953.0, 8.0, 1.0}, {2918.0, 8.0, 1.0}, {2838.0, 8.0, 1.0}}},
        {"polystyrene", {{3025.0, 8.0, 2.0}, {2924.0, 8.0, 1.0}, {2850.0, 8.0, 1.0}}},
    };
    return lib;
}

namespace {

// Boxcar smoothing sized to about 3.5 cm^-1, below the system resolution so
// genuine bands are untouched while pixel-scale noise is suppressed.
std::vector<double> smooth_for_detection(const AbsorbanceSpectrum& a) {
    const std::size_t n = a.size();
    std::vector<double> out(n);
    double step = 1.0;
    if (n >= 2) step = (a.axis.back() - a.axis.front()) / static_cast<double>(n - 1);
    int half = static_cast<int>(std::floor(1.75 / step));
    half = std::clamp(half, 0, 15);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        int count = 0;
        for (int j = -half; j <= half; ++j) {
            const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) + j;
            if (k < 0 || k >= static_cast<std::ptrdiff_t>(n)) continue;
            acc += a.values[static_cast<std::size_t>(k)];
            ++count;
        }
        out[i] = acc / static_cast<double>(count);
    }
    return out;
}

double prominence_at(const std::vector<double>& y, std::size_t i) {
    double left_min = y[i];
    for (std::size_t j = i; j-- > 0;) {
        if (y[j] > y[i]) break;
        left_min = std::min(left_min, y[j]);
    }
    double right_min = y[i];
    for (std::size_t j = i + 1; j < y.size(); ++j) {
        if (y[j] > y[i]) break;
        right_min = std::min(right_min, y[j]);
    }
    return y[i] - std::max(left_min, right_min);
}

} // namespace

PeakList detect_peaks(const AbsorbanceSpectrum& a, double min_snr, double min_prominence) {
    PeakList out;
    const std::size_t n = a.size();
    if (n < 7) return out;
    const auto ys = smooth_for_detection(a);
    const double step = (a.axis.back() - a.axis.front()) / static_cast<double>(n - 1);

    for (std::size_t i = 2; i + 2 < n; ++i) {
        if (!(ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])) continue;
        const double prom = prominence_at(ys, i);
        if (prom < min_prominence) continue;
        const double sigma = a.sigma.empty() ? 0.0 : a.sigma[i];
        const bool degraded = !a.saturated.empty() && a.saturated[i] != 0;
        if (!degraded && sigma > 0.0 && ys[i] / sigma < min_snr) continue;
        if (degraded && sigma > 0.0 && ys[i] / sigma < 1.0) continue;

        // parabolic refinement on the smoothed curve
        double pos = a.axis[i];
        const double den = ys[i - 1] - 2.0 * ys[i] + ys[i + 1];
        if (den < 0.0) {
            pos += 0.5 * (ys[i - 1] - ys[i + 1]) / den * step;
        }
        // width from half-prominence crossings
        const double half_level = ys[i] - 0.5 * prom;
        std::size_t li = i, ri = i;
        while (li > 0 && ys[li] > half_level) --li;
        while (ri + 1 < n && ys[ri] > half_level) ++ri;
        double width = (a.axis[ri] - a.axis[li]);

        // local Gaussian refinement when the peak is well sampled
        if (ri - li >= 6) {
            Spectrum seg;
            seg.axis_kind = AxisKind::wavenumber_cm1;
            const double w = std::max(width, 4.0 * step);
            for (std::size_t j = 0; j < n; ++j) {
                if (std::abs(a.axis[j] - pos) <= 1.2 * w) {
                    seg.axis.push_back(a.axis[j]);
                    seg.values.push_back(a.values[j]);
                }
            }
            try {
                const GaussianFit fit = gaussian_fwhm_fit(seg);
                if (fit.amplitude > 0.0 && std::abs(fit.center - pos) < w) {
                    pos = fit.center;
                    width = fit.fwhm;
                }
            } catch (const NumericalError&) {
                // keep the parabolic estimate
            }
        }

        DetectedPeak p;
        p.position_cm1 = pos;
        p.height = ys[i];
        p.width_cm1 = width;
        p.snr = sigma > 0.0 ? ys[i] / sigma : 0.0;
        p.height_degraded = degraded;
        out.peaks.push_back(p);
    }
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const DetectedPeak& a_, const DetectedPeak& b_) {
                  return a_.position_cm1 < b_.position_cm1;
              });
    return out;
}

IdentificationResult match_polymer(const PeakList& peaks, const PeakLibrary& lib,
                                   double threshold) {
    lib.validate();
    IdentificationResult result;
    result.threshold = threshold;
    for (const auto& [name, entries] : lib.entries) {
        PolymerScore sc;
        sc.name = name;
        double total_weight = 0.0;
        for (const auto& entry : entries) {
            total_weight += entry.weight;
            double best = -1.0;
            for (const auto& p : peaks.peaks) {
                const double d = std::abs(p.position_cm1 - entry.center_cm1);
                if (best < 0.0 || d < best) best = d;
            }
            if (best >= 0.0) {
                const double m = std::max(0.0, 1.0 - best / entry.tolerance_cm1);
                sc.score += entry.weight * m;
                if (m > 0.0) {
                    ++sc.matched;
                } else {
                    ++sc.missed;
                }
            } else {
                ++sc.missed;
            }
        }
        if (total_weight > 0.0) sc.score /= total_weight;
        result.ranked.push_back(std::move(sc));
    }
    std::stable_sort(result.ranked.begin(), result.ranked.end(),
                     [](const PolymerScore& a, const PolymerScore& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.name < b.name;
                     });
    if (!result.ranked.empty() && result.ranked.front().score >= threshold) {
        result.decision = result.ranked.front().name;
    }
    return result;
}

} // namespace upspec
