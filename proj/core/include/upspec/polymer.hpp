#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "upspec/retrieval.hpp"

namespace upspec {

struct PeakEntry {
    double center_cm1 = 0.0;
    double tolerance_cm1 = 8.0;
    double weight = 1.0;
};

// Ordered polymer -> characteristic peaks map; order fixes tie-breaking.
struct PeakLibrary {
    std::vector<std::pair<std::string, std::vector<PeakEntry>>> entries;

    void validate() const;
};

struct DetectedPeak {
    double position_cm1 = 0.0;
    double height = 0.0;
    double width_cm1 = 0.0;
    double snr = 0.0;
    bool height_degraded = false; // peak sits in a saturation-flagged region
};

struct PeakList {
    std::vector<DetectedPeak> peaks;
};

struct PolymerScore {
    std::string name;
    double score = 0.0;
    int matched = 0;
    int missed = 0;
};

struct IdentificationResult {
    std::vector<PolymerScore> ranked; // descending score
    std::optional<std::string> decision;
    double threshold = 0.6;
};

// Built-in C-H stretch library: PS {3025 (x2), 2924, 2850}, PP {2953, 2918,
// 2838}, PE {2915, 2850}; tolerance 8 cm^-1 throughout.
PeakLibrary builtin_library();

// Local maxima of the (lightly smoothed) absorbance with prominence and
// SNR gating; positions refined by a parabolic step plus a local Gaussian
// fit when enough points are available.
PeakList detect_peaks(const AbsorbanceSpectrum& a, double min_snr = 3.0,
                      double min_prominence = 0.05);

// Position-based triangular-kernel score per polymer; greedy nearest match
// of each library peak to the detected list, normalized by total weight.
// Ties break lexicographically on the polymer name.
IdentificationResult match_polymer(const PeakList& peaks, const PeakLibrary& lib,
                                   double threshold = 0.6);

} // namespace upspec
