#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "upspec/forward.hpp"
#include "upspec/noise.hpp"
#include "upspec/polymer.hpp"
#include "upspec/retrieval.hpp"

namespace upspec {

// Shortest round-trip decimal representation (std::to_chars); identical
// inputs always serialize to identical bytes.
std::string format_double(double v);

// FNV-1a 64-bit over a canonical string; used for config hashes.
std::uint64_t fnv1a64(const std::string& text);

// Reproducibility block written into every output file as comment lines.
struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::vector<std::string> inputs;
    std::uint64_t seed = 0;
    std::string version;
    std::uint64_t config_hash = 0;

    std::vector<std::string> comment_lines() const;
};

// ---- Spectrum CSV -----------------------------------------------------
// Header line `# axis_kind=<kind>`, optional further `#` comments, then
// `axis,value` rows. UTF-8, LF line endings.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s,
                        const std::vector<std::string>& extra_comments = {});
Spectrum read_spectrum_csv(const std::filesystem::path& path);

// ---- Interferogram: spectrum CSV + `.meta` sidecar --------------------
void write_interferogram(const std::filesystem::path& csv_path, const Interferogram& frame,
                         const RunManifest& manifest);
Interferogram read_interferogram(const std::filesystem::path& csv_path);

// ---- Absorbance CSV: wavenumber_cm1,absorbance,sigma,saturated ---------
void write_absorbance_csv(const std::filesystem::path& path, const AbsorbanceSpectrum& a,
                          const RunManifest& manifest);
AbsorbanceSpectrum read_absorbance_csv(const std::filesystem::path& path);

// ---- Allan curve CSV: tau_s,sigma_a,snr --------------------------------
void write_allan_csv(const std::filesystem::path& path, const AllanCurve& curve,
                     const RunManifest& manifest);
AllanCurve read_allan_csv(const std::filesystem::path& path);

// ---- OPLD scan CSV: opld_mm,fwhm_cm1,visibility -------------------------
struct ScanRow {
    double opld_mm, fwhm_cm1, visibility;
};
void write_scan_csv(const std::filesystem::path& path, const std::vector<ScanRow>& rows,
                    const RunManifest& manifest);
std::vector<ScanRow> read_scan_csv(const std::filesystem::path& path);

// ---- Scenario config: `key = value` text --------------------------------
Scenario read_scenario(const std::filesystem::path& path);
void write_scenario(const std::filesystem::path& path, const Scenario& sc);
std::string scenario_canonical_text(const Scenario& sc);

// Generic key-value block (used by sidecars and reports).
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const std::string& title,
                      const std::vector<std::pair<std::string, std::string>>& rows);

// ---- Peak library: `[name]` blocks with `peak = {c, tol, w}` entries ----
PeakLibrary read_peak_library(const std::filesystem::path& path);
void write_peak_library(const std::filesystem::path& path, const PeakLibrary& lib);

} // namespace upspec
