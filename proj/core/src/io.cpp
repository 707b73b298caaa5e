#include "upspec/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "upspec/errors.hpp"
#include "upspec/version.hpp"

namespace upspec {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> RunManifest::comment_lines() const {
    std::vector<std::string> lines;
    lines.push_back("manifest subcommand = " + subcommand);
    if (!config_path.empty()) lines.push_back("manifest config = " + config_path);
    for (const auto& in : inputs) lines.push_back("manifest input = " + in);
    lines.push_back("manifest seed = " + std::to_string(seed));
    lines.push_back("manifest toolkit_version = " +
                    (version.empty() ? std::string(kVersion) : version));
    char hex[19];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_hash));
    lines.push_back(std::string("manifest config_hash = ") + hex);
    return lines;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

double parse_double(const std::string& tok, const std::string& context) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc()) {
        throw FormatError("bad number '" + tok + "' in " + context);
    }
    return v;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s,
                        const std::vector<std::string>& extra_comments) {
    s.validate();
    auto out = open_out(path);
    out << "# axis_kind=" << to_string(s.axis_kind) << "\n";
    for (const auto& c : extra_comments) out << "# " << c << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format_double(s.axis[i]) << "," << format_double(s.values[i]) << "\n";
    }
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    Spectrum s;
    std::string line;
    bool have_kind = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("axis_kind=");
            if (pos != std::string::npos) {
                s.axis_kind = axis_kind_from_string(trim(line.substr(pos + 10)));
                have_kind = true;
            }
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 2) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'axis,value'");
        }
        s.axis.push_back(parse_double(cols[0], path.string()));
        s.values.push_back(parse_double(cols[1], path.string()));
    }
    if (!have_kind) {
        throw FormatError(path.string() + ": missing '# axis_kind=' header");
    }
    s.validate();
    return s;
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p += ".meta";
    return p;
}

} // namespace

void write_interferogram(const std::filesystem::path& csv_path, const Interferogram& frame,
                         const RunManifest& manifest) {
    write_spectrum_csv(csv_path, frame.spectrum, manifest.comment_lines());
    const auto& c = frame.config;
    write_key_values(sidecar_path(csv_path), "interferogram metadata",
                     {
                         {"integration_time_s", format_double(c.integration_time_s)},
                         {"pixel_pitch_nm", format_double(c.pixel_pitch_nm)},
                         {"instrument_response_fwhm_nm",
                          format_double(c.instrument_response_fwhm_nm)},
                         {"gain_counts_per_photon", format_double(c.gain_counts_per_photon)},
                         {"quantum_efficiency", format_double(c.quantum_efficiency)},
                         {"grating_efficiency", format_double(c.grating_efficiency)},
                         {"rng_seed", std::to_string(c.rng_seed)},
                         {"oversample", std::to_string(c.oversample)},
                         {"opld_mm", format_double(frame.opld_mm)},
                     });
}

Interferogram read_interferogram(const std::filesystem::path& csv_path) {
    Interferogram frame;
    frame.spectrum = read_spectrum_csv(csv_path);
    if (frame.spectrum.axis_kind != AxisKind::wavelength_nm) {
        throw FormatError(csv_path.string() + ": interferograms use a wavelength axis");
    }
    const auto meta = read_key_values(sidecar_path(csv_path));
    auto get = [&](const char* key, double fallback) {
        const auto it = meta.find(key);
        return it == meta.end() ? fallback : parse_double(it->second, key);
    };
    frame.config.integration_time_s = get("integration_time_s", 0.01);
    frame.config.pixel_pitch_nm = get("pixel_pitch_nm", 0.089);
    frame.config.instrument_response_fwhm_nm = get("instrument_response_fwhm_nm", 0.0);
    frame.config.gain_counts_per_photon = get("gain_counts_per_photon", 1.0);
    frame.config.quantum_efficiency = get("quantum_efficiency", 1.0);
    frame.config.grating_efficiency = get("grating_efficiency", 1.0);
    frame.config.rng_seed = static_cast<std::uint64_t>(get("rng_seed", 0.0));
    frame.config.oversample = static_cast<int>(get("oversample", 8.0));
    frame.opld_mm = get("opld_mm", 0.0);
    return frame;
}

void write_absorbance_csv(const std::filesystem::path& path, const AbsorbanceSpectrum& a,
                          const RunManifest& manifest) {
    auto out = open_out(path);
    for (const auto& c : manifest.comment_lines()) out << "# " << c << "\n";
    out << "wavenumber_cm1,absorbance,sigma,saturated\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
        out << format_double(a.axis[i]) << "," << format_double(a.values[i]) << ","
            << format_double(a.sigma[i]) << "," << (a.saturated[i] ? 1 : 0) << "\n";
    }
}

AbsorbanceSpectrum read_absorbance_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    AbsorbanceSpectrum a;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            if (line != "wavenumber_cm1,absorbance,sigma,saturated") {
                throw FormatError(path.string() + ": unexpected absorbance header");
            }
            have_header = true;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 4) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected four columns");
        }
        a.axis.push_back(parse_double(cols[0], path.string()));
        a.values.push_back(parse_double(cols[1], path.string()));
        a.sigma.push_back(parse_double(cols[2], path.string()));
        a.saturated.push_back(cols[3] == "1" ? 1 : 0);
    }
    if (!have_header) throw FormatError(path.string() + ": empty absorbance file");
    return a;
}

void write_allan_csv(const std::filesystem::path& path, const AllanCurve& curve,
                     const RunManifest& manifest) {
    auto out = open_out(path);
    for (const auto& c : manifest.comment_lines()) out << "# " << c << "\n";
    out << "tau_s,sigma_a,snr\n";
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
        out << format_double(curve.taus[i]) << "," << format_double(curve.sigma_a[i]) << ","
            << format_double(curve.snr[i]) << "\n";
    }
}

AllanCurve read_allan_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    AllanCurve curve;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            if (line != "tau_s,sigma_a,snr") {
                throw FormatError(path.string() + ": unexpected allan header");
            }
            have_header = true;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 3) throw FormatError(path.string() + ": expected three columns");
        curve.taus.push_back(parse_double(cols[0], path.string()));
        curve.sigma_a.push_back(parse_double(cols[1], path.string()));
        curve.snr.push_back(parse_double(cols[2], path.string()));
    }
    if (!have_header) throw FormatError(path.string() + ": empty allan file");
    return curve;
}

void write_scan_csv(const std::filesystem::path& path, const std::vector<ScanRow>& rows,
                    const RunManifest& manifest) {
    auto out = open_out(path);
    for (const auto& c : manifest.comment_lines()) out << "# " << c << "\n";
    out << "opld_mm,fwhm_cm1,visibility\n";
    for (const auto& r : rows) {
        out << format_double(r.opld_mm) << "," << format_double(r.fwhm_cm1) << ","
            << format_double(r.visibility) << "\n";
    }
}

std::vector<ScanRow> read_scan_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<ScanRow> rows;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            if (line != "opld_mm,fwhm_cm1,visibility") {
                throw FormatError(path.string() + ": unexpected scan header");
            }
            have_header = true;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 3) throw FormatError(path.string() + ": expected three columns");
        rows.push_back(ScanRow{parse_double(cols[0], path.string()),
                               parse_double(cols[1], path.string()),
                               parse_double(cols[2], path.string())});
    }
    if (!have_header) throw FormatError(path.string() + ": empty scan file");
    return rows;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    auto in = open_in(path);
    KeyValues kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw FormatError(path.string() + ": expected 'key = value', got '" + t + "'");
        }
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

void write_key_values(const std::filesystem::path& path, const std::string& title,
                      const std::vector<std::pair<std::string, std::string>>& rows) {
    auto out = open_out(path);
    out << "# " << title << "\n";
    for (const auto& [k, v] : rows) {
        out << k << " = " << v << "\n";
    }
}

namespace {

const char* shape_name(SourceModel::Shape s) {
    return s == SourceModel::Shape::flat_top ? "flat_top" : "gaussian";
}

} // namespace

std::string scenario_canonical_text(const Scenario& sc) {
    std::ostringstream out;
    const auto& s = sc.source;
    const auto& v = sc.visibility;
    const auto& a = sc.acquisition;
    out << "pump_wavelength_nm = " << format_double(s.pump_wavelength_nm) << "\n"
        << "signal_band_lo_nm = " << format_double(s.band_lo_nm) << "\n"
        << "signal_band_hi_nm = " << format_double(s.band_hi_nm) << "\n"
        << "spectral_shape = " << shape_name(s.shape) << "\n"
        << "plateau_lo_nm = " << format_double(s.plateau_lo_nm) << "\n"
        << "plateau_hi_nm = " << format_double(s.plateau_hi_nm) << "\n"
        << "gaussian_center_nm = " << format_double(s.gaussian_center_nm) << "\n"
        << "gaussian_fwhm_nm = " << format_double(s.gaussian_fwhm_nm) << "\n"
        << "total_detected_flux_per_s = " << format_double(s.total_detected_flux) << "\n"
        << "base_visibility = " << format_double(v.base_visibility) << "\n"
        << "dip_center_cm1 = " << format_double(v.dip_center_cm1) << "\n"
        << "dip_fwhm_cm1 = " << format_double(v.dip_fwhm_cm1) << "\n"
        << "dip_floor = " << format_double(v.dip_floor) << "\n"
        << "opld_mm = " << format_double(v.opld_mm) << "\n"
        << "intensity_first_pass = " << format_double(v.intensity_first_pass) << "\n"
        << "intensity_second_pass = " << format_double(v.intensity_second_pass) << "\n"
        << "integration_time_s = " << format_double(a.integration_time_s) << "\n"
        << "pixel_pitch_nm = " << format_double(a.pixel_pitch_nm) << "\n"
        << "instrument_response_fwhm_nm = " << format_double(a.instrument_response_fwhm_nm)
        << "\n"
        << "gain_counts_per_photon = " << format_double(a.gain_counts_per_photon) << "\n"
        << "quantum_efficiency = " << format_double(a.quantum_efficiency) << "\n"
        << "grating_efficiency = " << format_double(a.grating_efficiency) << "\n"
        << "oversample = " << a.oversample << "\n"
        << "rng_seed = " << a.rng_seed << "\n"
        << "sample = " << sc.sample_name << "\n"
        << "frames = " << sc.frames << "\n";
    return out.str();
}

void write_scenario(const std::filesystem::path& path, const Scenario& sc) {
    auto out = open_out(path);
    out << "# acquisition scenario\n" << scenario_canonical_text(sc);
}

Scenario read_scenario(const std::filesystem::path& path) {
    const auto kv = read_key_values(path);
    Scenario sc = Scenario::nominal();
    auto num = [&](const char* key, double fallback) {
        const auto it = kv.find(key);
        return it == kv.end() ? fallback : parse_double(it->second, key);
    };
    auto str = [&](const char* key, const std::string& fallback) {
        const auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };
    auto& s = sc.source;
    s.pump_wavelength_nm = num("pump_wavelength_nm", s.pump_wavelength_nm);
    s.band_lo_nm = num("signal_band_lo_nm", s.band_lo_nm);
    s.band_hi_nm = num("signal_band_hi_nm", s.band_hi_nm);
    const auto shape = str("spectral_shape", "flat_top");
    if (shape == "flat_top") {
        s.shape = SourceModel::Shape::flat_top;
    } else if (shape == "gaussian") {
        s.shape = SourceModel::Shape::gaussian;
    } else {
        throw ConfigError("unknown spectral_shape: " + shape);
    }
    s.plateau_lo_nm = num("plateau_lo_nm", s.plateau_lo_nm);
    s.plateau_hi_nm = num("plateau_hi_nm", s.plateau_hi_nm);
    s.gaussian_center_nm = num("gaussian_center_nm", s.gaussian_center_nm);
    s.gaussian_fwhm_nm = num("gaussian_fwhm_nm", s.gaussian_fwhm_nm);
    s.total_detected_flux = num("total_detected_flux_per_s", s.total_detected_flux);
    auto& v = sc.visibility;
    v.base_visibility = num("base_visibility", v.base_visibility);
    v.dip_center_cm1 = num("dip_center_cm1", v.dip_center_cm1);
    v.dip_fwhm_cm1 = num("dip_fwhm_cm1", v.dip_fwhm_cm1);
    v.dip_floor = num("dip_floor", v.dip_floor);
    v.opld_mm = num("opld_mm", v.opld_mm);
    v.intensity_first_pass = num("intensity_first_pass", v.intensity_first_pass);
    v.intensity_second_pass = num("intensity_second_pass", v.intensity_second_pass);
    auto& a = sc.acquisition;
    a.integration_time_s = num("integration_time_s", a.integration_time_s);
    a.pixel_pitch_nm = num("pixel_pitch_nm", a.pixel_pitch_nm);
    a.instrument_response_fwhm_nm =
        num("instrument_response_fwhm_nm", a.instrument_response_fwhm_nm);
    a.gain_counts_per_photon = num("gain_counts_per_photon", a.gain_counts_per_photon);
    a.quantum_efficiency = num("quantum_efficiency", a.quantum_efficiency);
    a.grating_efficiency = num("grating_efficiency", a.grating_efficiency);
    a.oversample = static_cast<int>(num("oversample", a.oversample));
    a.rng_seed = static_cast<std::uint64_t>(num("rng_seed", 1.0));
    sc.sample_name = str("sample", "none");
    sc.frames = static_cast<std::size_t>(num("frames", 1.0));
    sc.source.validate();
    sc.visibility.validate();
    sc.acquisition.validate();
    return sc;
}

PeakLibrary read_peak_library(const std::filesystem::path& path) {
    auto in = open_in(path);
    PeakLibrary lib;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw FormatError(path.string() + ":" + std::to_string(lineno) +
                                  ": unterminated block name");
            }
            lib.entries.emplace_back(trim(t.substr(1, t.size() - 2)),
                                     std::vector<PeakEntry>{});
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos || trim(t.substr(0, eq)) != "peak") {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'peak = {center, tolerance, weight}'");
        }
        if (lib.entries.empty()) {
            throw FormatError(path.string() + ": peak entry before any [block]");
        }
        std::string rhs = trim(t.substr(eq + 1));
        if (!rhs.empty() && rhs.front() == '{') rhs.erase(rhs.begin());
        if (!rhs.empty() && rhs.back() == '}') rhs.pop_back();
        const auto cols = split(rhs, ',');
        if (cols.size() != 3) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": peak needs three values");
        }
        PeakEntry e;
        e.center_cm1 = parse_double(trim(cols[0]), path.string());
        e.tolerance_cm1 = parse_double(trim(cols[1]), path.string());
        e.weight = parse_double(trim(cols[2]), path.string());
        lib.entries.back().second.push_back(e);
    }
    lib.validate();
    return lib;
}

void write_peak_library(const std::filesystem::path& path, const PeakLibrary& lib) {
    lib.validate();
    auto out = open_out(path);
    out << "# polymer peak library\n";
    for (const auto& [name, peaks] : lib.entries) {
        out << "[" << name << "]\n";
        for (const auto& p : peaks) {
            out << "peak = {" << format_double(p.center_cm1) << ", "
                << format_double(p.tolerance_cm1) << ", " << format_double(p.weight) << "}\n";
        }
    }
}

} // namespace upspec
