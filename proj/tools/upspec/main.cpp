// upspec: simulate and analyze undetected-photon mid-IR spectroscopy runs.
//
// stdout carries data and output paths; diagnostics go to stderr.
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
// failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "upspec/calibration.hpp"
#include "upspec/crystal.hpp"
#include "upspec/errors.hpp"
#include "upspec/forward.hpp"
#include "upspec/io.hpp"
#include "upspec/noise.hpp"
#include "upspec/polymer.hpp"
#include "upspec/retrieval.hpp"
#include "upspec/svgplot.hpp"
#include "upspec/version.hpp"

namespace fs = std::filesystem;
using namespace upspec;

namespace {

// Resolve a config-ish path: as given, else under UPSPEC_CONFIG_DIR.
fs::path resolve_config_path(const std::string& given) {
    fs::path p(given);
    if (fs::exists(p)) return p;
    if (const char* dir = std::getenv("UPSPEC_CONFIG_DIR")) {
        fs::path alt = fs::path(dir) / p;
        if (fs::exists(alt)) return alt;
    }
    return p;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

std::optional<BandLimits> parse_band(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("band must be given as lo:hi");
    }
    BandLimits b{std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    b.validate();
    return b;
}

std::vector<fs::path> frame_files_in(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.size() < 2) {
        throw ConfigError("need at least two frame CSVs in " + dir.string());
    }
    return files;
}

// Envelopes of a set of frames, remapped to the ascending idler axis. The
// carrier and the analysis band are pinned from the first frame so every
// envelope lands on one grid.
FrameSeries envelope_series(const std::vector<fs::path>& files, const RetrievalConfig& rc) {
    FrameSeries series;
    std::optional<double> carrier;
    std::optional<BandLimits> band = rc.analysis_band;
    for (const auto& f : files) {
        Interferogram frame = read_interferogram(f);
        RetrievalConfig local = rc;
        if (!carrier) {
            if (frame.opld_mm > 0.0) {
                carrier = frame.opld_mm * 0.1;
            } else {
                carrier = detect_carrier(frame, rc);
            }
        }
        if (!band) {
            const std::size_t n_new = static_cast<std::size_t>(std::llround(
                rc.resample_factor * static_cast<double>(frame.spectrum.size())));
            band = detect_plateau_band(
                resample_to_uniform_wavenumber(frame.spectrum, n_new));
        }
        local.analysis_band = band;
        local.carrier_cycles = carrier;
        const Envelope env = extract_envelope(frame, local);
        const double nu_p = wavelength_to_wavenumber(rc.pump_wavelength_nm);
        Spectrum idler;
        idler.axis_kind = AxisKind::wavenumber_cm1;
        const std::size_t n = env.spectrum.size();
        idler.axis.resize(n);
        idler.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            idler.axis[i] = nu_p - env.spectrum.axis[n - 1 - i];
            idler.values[i] = env.spectrum.values[n - 1 - i];
        }
        series.base_integration_time_s = frame.config.integration_time_s;
        series.frames.push_back(std::move(idler));
    }
    return series;
}

RunManifest make_manifest(const std::string& sub, const std::string& config_path,
                          std::vector<std::string> inputs, std::uint64_t seed,
                          const std::string& canonical_config) {
    RunManifest m;
    m.subcommand = sub;
    m.config_path = config_path;
    m.inputs = std::move(inputs);
    m.seed = seed;
    m.version = std::string(kVersion);
    m.config_hash = fnv1a64(canonical_config);
    return m;
}

// ---- simulate -----------------------------------------------------------

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<std::size_t> frames_override,
                 std::optional<std::uint64_t> seed_override,
                 std::optional<std::string> sample_override) {
    Scenario sc = read_scenario(resolve_config_path(scenario_path));
    if (frames_override) sc.frames = *frames_override;
    if (seed_override) sc.acquisition.rng_seed = *seed_override;
    if (sample_override) sc.sample_name = *sample_override;
    if (sc.frames == 0) {
        throw ConfigError("scenario requests zero frames");
    }
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const SampleModel sample = sc.resolve_sample();
    auto frames =
        simulate_burst(sc.source, sc.visibility, sample, sc.acquisition, sc.frames);
    const auto manifest = make_manifest("simulate", scenario_path, {},
                                        sc.acquisition.rng_seed, scenario_canonical_text(sc));
    for (std::size_t i = 0; i < frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%05zu.csv", i);
        write_interferogram(dir / name, frames[i], manifest);
    }
    write_scenario(dir / "scenario.cfg", sc);
    std::cout << dir.string() << "\n";
    std::cout << frames.size() << " frames written\n";
    return 0;
}

// ---- retrieve -----------------------------------------------------------

RetrievalConfig retrieval_config_from(const std::string& config_path) {
    // baseline correction only runs when the user names non-absorbing
    // regions in the retrieval config
    RetrievalConfig rc;
    if (config_path.empty()) return rc;
    const auto kv = read_key_values(resolve_config_path(config_path));
    auto num = [&](const char* key, double fallback) {
        const auto it = kv.find(key);
        return it == kv.end() ? fallback : std::stod(it->second);
    };
    rc.pump_wavelength_nm = num("pump_wavelength_nm", rc.pump_wavelength_nm);
    rc.resample_factor = num("resample_factor", rc.resample_factor);
    rc.passband_half_ratio = num("passband_half_ratio", rc.passband_half_ratio);
    rc.band_taper = num("band_taper", rc.band_taper);
    rc.edge_exclusion = num("edge_exclusion", rc.edge_exclusion);
    rc.baseline_order = static_cast<int>(num("baseline_order", rc.baseline_order));
    rc.saturation_k = num("saturation_k", rc.saturation_k);
    rc.clip_floor = num("clip_floor", rc.clip_floor);
    rc.clip_ceiling = num("clip_ceiling", rc.clip_ceiling);
    if (kv.count("carrier_cycles")) rc.carrier_cycles = std::stod(kv.at("carrier_cycles"));
    if (kv.count("analysis_band_lo_cm1") && kv.count("analysis_band_hi_cm1")) {
        rc.analysis_band = BandLimits{std::stod(kv.at("analysis_band_lo_cm1")),
                                      std::stod(kv.at("analysis_band_hi_cm1"))};
    }
    if (kv.count("baseline_regions")) {
        // regions given as lo:hi pairs separated by spaces
        rc.baseline_regions.clear();
        std::istringstream is(kv.at("baseline_regions"));
        std::string tok;
        while (is >> tok) {
            if (auto b = parse_band(tok)) rc.baseline_regions.push_back(*b);
        }
    }
    return rc;
}

// A frame argument may be one CSV or a directory of frames to co-add.
Interferogram load_frames(const std::string& path) {
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw IoError("no frame CSVs in " + path);
        }
        std::vector<Interferogram> frames;
        frames.reserve(files.size());
        for (const auto& f : files) {
            frames.push_back(read_interferogram(f));
        }
        return average_frames(frames);
    }
    return read_interferogram(path);
}

int cmd_retrieve(const std::string& sample_path, const std::string& reference_path,
                 const std::string& config_path, const std::string& out_dir,
                 const std::string& plot_path) {
    const Interferogram sample = load_frames(sample_path);
    const Interferogram reference = load_frames(reference_path);
    RetrievalConfig rc = retrieval_config_from(config_path);
    const AbsorbanceSpectrum a = retrieve(sample, reference, rc);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const auto manifest = make_manifest("retrieve", config_path, {sample_path, reference_path},
                                        sample.config.rng_seed, config_path);
    const fs::path csv = dir / "absorbance.csv";
    write_absorbance_csv(csv, a, manifest);

    const PeakList peaks = detect_peaks(a);
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("band_lo_cm1", format_double(a.axis.front()));
    rows.emplace_back("band_hi_cm1", format_double(a.axis.back()));
    char hex[19];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(manifest.config_hash));
    rows.emplace_back("config_hash", hex);
    std::size_t n_sat = 0;
    for (auto s : a.saturated) n_sat += s;
    rows.emplace_back("saturated_points", std::to_string(n_sat));
    for (const auto& p : peaks.peaks) {
        rows.emplace_back("peak", "{" + format_double(p.position_cm1) + ", " +
                                      format_double(p.height) + ", " +
                                      format_double(p.width_cm1) + ", " +
                                      format_double(p.snr) + "}");
    }
    write_key_values(dir / "summary.txt", "retrieval summary", rows);

    if (!plot_path.empty()) {
        SvgPlot plot("Retrieved absorbance", "idler wavenumber (cm^-1)", "absorbance");
        std::vector<double> lo(a.size()), hi(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            lo[i] = a.values[i] - a.sigma[i];
            hi[i] = a.values[i] + a.sigma[i];
        }
        plot.add_band(a.axis, lo, hi, "orange");
        plot.add_line(a.axis, a.values, "darkorange");
        plot.save(plot_path);
    }
    std::cout << csv.string() << "\n";
    return 0;
}

// ---- allan / snr-scan -----------------------------------------------------

int cmd_allan(const std::string& frames_dir, const std::string& taus_csv,
              const std::string& out_csv, const std::string& plot_path,
              const std::string& exclude_s, double brightness_factor, bool with_snr_guide) {
    const auto files = frame_files_in(frames_dir);
    RetrievalConfig rc;
    FrameSeries series = envelope_series(files, rc);
    AllanConfig acfg;
    if (!exclude_s.empty()) {
        std::istringstream is(exclude_s);
        std::string tok;
        while (is >> tok) {
            if (auto b = parse_band(tok)) acfg.exclude.push_back(*b);
        }
    }
    std::vector<double> taus = parse_double_list(taus_csv);
    if (taus.empty()) {
        // default ladder: powers of two of the base time that still fit
        for (std::size_t k = 1; k * 2 <= series.frames.size(); k *= 2) {
            taus.push_back(series.base_integration_time_s * static_cast<double>(k));
        }
    }
    AllanCurve curve = snr_scan(series, taus, acfg);
    const auto manifest =
        make_manifest(with_snr_guide ? "snr-scan" : "allan", "", {frames_dir}, 0, taus_csv);
    write_allan_csv(out_csv, curve, manifest);

    if (brightness_factor > 0.0 && brightness_factor != 1.0) {
        AllanCurve bright = extrapolate_brightness(curve, brightness_factor);
        fs::path bright_path(out_csv);
        bright_path.replace_extension(".bright.csv");
        write_allan_csv(bright_path, bright, manifest);
        std::cout << bright_path.string() << "\n";
    }

    if (!plot_path.empty()) {
        SvgPlot plot("SNR scaling", "averaging time (s)", "SNR");
        plot.set_log_log(true, true);
        plot.add_points(curve.taus, curve.snr, "teal");
        if (with_snr_guide && !curve.taus.empty()) {
            // sqrt(tau) guide anchored at the first point
            std::vector<double> gx = curve.taus, gy(curve.taus.size());
            for (std::size_t i = 0; i < gx.size(); ++i) {
                gy[i] = curve.snr.front() * std::sqrt(gx[i] / gx.front());
            }
            plot.add_line(gx, gy, "blue", true);
            if (brightness_factor > 1.0) {
                std::vector<double> by(gy);
                for (auto& v : by) v *= std::sqrt(brightness_factor);
                plot.add_line(gx, by, "purple", true);
            }
        }
        plot.save(plot_path);
    }
    std::cout << out_csv << "\n";
    return 0;
}

// ---- calibrate-opld --------------------------------------------------------

int cmd_calibrate_opld(const std::string& oplds_csv, const std::string& scenario_path,
                       const std::string& out_csv, const std::string& plot_path,
                       int frames_per_point, std::uint64_t seed) {
    SimContext ctx = SimContext::nominal();
    if (!scenario_path.empty()) {
        const Scenario sc = read_scenario(resolve_config_path(scenario_path));
        ctx.source = sc.source;
        ctx.visibility = sc.visibility;
        ctx.acquisition = sc.acquisition;
    }
    OpldScanConfig cfg;
    if (!oplds_csv.empty()) cfg.oplds_mm = parse_double_list(oplds_csv);
    cfg.frames_per_point = frames_per_point;
    cfg.seed = seed;
    const auto points = opld_scan(cfg, ctx);

    std::vector<ScanRow> rows;
    for (const auto& p : points) {
        if (!p.converged) {
            std::cerr << "opld " << p.opld_mm << " mm: fit failed: " << p.diagnostic << "\n";
        }
        rows.push_back(ScanRow{p.opld_mm, p.fwhm_cm1, p.visibility});
    }
    const auto manifest = make_manifest("calibrate-opld", scenario_path, {}, seed, oplds_csv);
    write_scan_csv(out_csv, rows, manifest);

    if (!plot_path.empty()) {
        SvgPlot plot("Visibility and resolution vs path difference", "OPLD (mm)",
                     "peak visibility");
        plot.set_secondary_axis("FWHM (cm^-1)");
        std::vector<double> x, vis, fw;
        for (const auto& r : rows) {
            x.push_back(r.opld_mm);
            vis.push_back(r.visibility);
            fw.push_back(r.fwhm_cm1);
        }
        plot.add_points(x, vis, "purple");
        plot.add_line(x, vis, "purple");
        plot.add_points(x, fw, "goldenrod", true);
        plot.add_line(x, fw, "goldenrod", false, true);
        plot.save(plot_path);
    }
    std::cout << out_csv << "\n";
    return 0;
}

// ---- identify ---------------------------------------------------------------

int cmd_identify(const std::string& absorbance_path, const std::string& library_path,
                 const std::string& out_path, double threshold) {
    const AbsorbanceSpectrum a = read_absorbance_csv(absorbance_path);
    PeakLibrary lib =
        library_path.empty() ? builtin_library() : read_peak_library(resolve_config_path(library_path));
    const PeakList peaks = detect_peaks(a);
    const IdentificationResult result = match_polymer(peaks, lib, threshold);

    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("decision", result.decision ? *result.decision : "none");
    rows.emplace_back("threshold", format_double(result.threshold));
    for (const auto& s : result.ranked) {
        rows.emplace_back("score_" + s.name, format_double(s.score));
    }
    for (const auto& p : peaks.peaks) {
        rows.emplace_back("peak", "{" + format_double(p.position_cm1) + ", " +
                                      format_double(p.height) + ", " +
                                      format_double(p.width_cm1) + ", " +
                                      format_double(p.snr) + "}");
    }
    if (!out_path.empty()) {
        write_key_values(out_path, "identification report", rows);
        std::cout << out_path << "\n";
    }
    std::cout << "decision = " << (result.decision ? *result.decision : "none") << "\n";
    for (const auto& s : result.ranked) {
        std::cout << s.name << " = " << format_double(s.score) << "\n";
    }
    return 0;
}

// ---- optimize-crystal ---------------------------------------------------------

int cmd_optimize_crystal(double alpha, const std::string& curve_csv,
                         const std::string& plot_path) {
    const double l_opt_cm = optimal_length(alpha);
    const double l_num = numeric_optimum(alpha, {l_opt_cm * 0.1, l_opt_cm * 4.0});
    std::cout << "optimal_length_mm = " << format_double(l_opt_cm * 10.0) << "\n";
    std::cout << "numeric_optimum_mm = " << format_double(l_num * 10.0) << "\n";

    const auto curve = crystal_curve(alpha, 0.05 * l_opt_cm, 4.0 * l_opt_cm, 200);
    if (!curve_csv.empty()) {
        std::ofstream out(curve_csv, std::ios::binary);
        if (!out) throw IoError("cannot write " + curve_csv);
        out << "length_mm,snr_normalized\n";
        for (std::size_t i = 0; i < curve.length_cm.size(); ++i) {
            out << format_double(curve.length_cm[i] * 10.0) << ","
                << format_double(curve.snr_normalized[i]) << "\n";
        }
        std::cout << curve_csv << "\n";
    }
    if (!plot_path.empty()) {
        SvgPlot plot("Relative SNR vs crystal length", "length (mm)", "normalized SNR");
        std::vector<double> mm(curve.length_cm);
        for (auto& v : mm) v *= 10.0;
        plot.add_line(mm, curve.snr_normalized, "teal");
        plot.add_points({l_opt_cm * 10.0}, {1.0}, "orange");
        plot.save(plot_path);
    }
    return 0;
}

// ---- flux -----------------------------------------------------------------

int cmd_flux(const std::string& frame_path, double gain, double qe, double grating,
             const std::string& band_s, const std::string& out_path) {
    const Interferogram frame = read_interferogram(frame_path);
    FluxCalibration calib;
    calib.gain_counts_per_photon = gain > 0.0 ? gain : frame.config.gain_counts_per_photon;
    calib.quantum_efficiency = qe > 0.0 ? qe : frame.config.quantum_efficiency;
    calib.grating_efficiency = grating > 0.0 ? grating : frame.config.grating_efficiency;
    calib.pixel_pitch_nm = frame.config.pixel_pitch_nm;
    calib.bandwidth_nm =
        frame.spectrum.axis.back() - frame.spectrum.axis.front();
    const FluxReport rep = estimate_photon_flux(frame, calib, parse_band(band_s));

    std::vector<std::pair<std::string, std::string>> rows = {
        {"total_counts", format_double(rep.total_counts)},
        {"integration_time_s", format_double(rep.integration_time_s)},
        {"gain_counts_per_photon", format_double(rep.calibration.gain_counts_per_photon)},
        {"quantum_efficiency", format_double(rep.calibration.quantum_efficiency)},
        {"grating_efficiency", format_double(rep.calibration.grating_efficiency)},
        {"pixel_pitch_nm", format_double(rep.calibration.pixel_pitch_nm)},
        {"bandwidth_nm", format_double(rep.calibration.bandwidth_nm)},
        {"detected_photons_per_s", format_double(rep.detected_photons_per_s)},
        {"source_referred_photons_per_s",
         format_double(rep.source_referred_photons_per_s)},
    };
    if (!out_path.empty()) {
        write_key_values(out_path, "photon flux report", rows);
        std::cout << out_path << "\n";
    }
    for (const auto& [k, v] : rows) {
        std::cout << k << " = " << v << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"undetected-photon mid-IR spectroscopy toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate interferogram frames");
    std::string sim_scenario, sim_out = "frames";
    std::optional<std::size_t> sim_frames;
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::string> sim_sample;
    sim->add_option("--scenario", sim_scenario, "scenario config file")->required();
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--frames", sim_frames, "override frame count");
    sim->add_option("--seed", sim_seed, "override RNG seed");
    sim->add_option("--sample", sim_sample, "override sample (none|flat:<T>|ps|pp|pe|csv:<path>)");

    // retrieve
    auto* ret = app.add_subcommand("retrieve", "absorbance from a sample/reference frame pair");
    std::string ret_sample, ret_reference, ret_config, ret_out = "retrieval", ret_plot;
    ret->add_option("--sample", ret_sample, "sample interferogram CSV or burst directory")
        ->required();
    ret->add_option("--reference", ret_reference,
                    "reference interferogram CSV or burst directory")
        ->required();
    ret->add_option("--config", ret_config, "retrieval config file");
    ret->add_option("--out", ret_out, "output directory");
    ret->add_option("--plot", ret_plot, "write an SVG plot");

    // allan
    auto* allan = app.add_subcommand("allan", "Allan-Werle deviation of a frame burst");
    std::string allan_dir, allan_taus, allan_out = "allan.csv", allan_plot, allan_excl;
    allan->add_option("--frames", allan_dir, "directory of frame CSVs")->required();
    allan->add_option("--taus", allan_taus, "comma-separated averaging times (s)");
    allan->add_option("--out", allan_out, "output CSV");
    allan->add_option("--plot", allan_plot, "write an SVG plot");
    allan->add_option("--exclude", allan_excl, "excluded bands, space-separated lo:hi (cm^-1)");

    // snr-scan
    auto* scan = app.add_subcommand("snr-scan", "SNR vs averaging time with guides");
    std::string scan_dir, scan_taus, scan_out = "snr.csv", scan_plot, scan_excl;
    double scan_bright = 0.0;
    scan->add_option("--frames", scan_dir, "directory of frame CSVs")->required();
    scan->add_option("--taus", scan_taus, "comma-separated averaging times (s)");
    scan->add_option("--out", scan_out, "output CSV");
    scan->add_option("--plot", scan_plot, "write an SVG plot");
    scan->add_option("--exclude", scan_excl, "excluded bands, space-separated lo:hi (cm^-1)");
    scan->add_option("--brightness-factor", scan_bright,
                     "also write the curve extrapolated to this flux factor");

    // calibrate-opld
    auto* cal = app.add_subcommand("calibrate-opld", "resolution/visibility vs path difference");
    std::string cal_oplds, cal_scenario, cal_out = "opld_scan.csv", cal_plot;
    int cal_frames = 0;
    std::uint64_t cal_seed = 1;
    cal->add_option("--oplds", cal_oplds, "comma-separated path differences (mm)");
    cal->add_option("--scenario", cal_scenario, "instrument scenario config");
    cal->add_option("--out", cal_out, "output CSV");
    cal->add_option("--plot", cal_plot, "write an SVG plot");
    cal->add_option("--frames-per-point", cal_frames, "noisy frames per point (0 = noiseless)");
    cal->add_option("--seed", cal_seed, "scan RNG seed");

    // identify
    auto* ident = app.add_subcommand("identify", "match an absorbance spectrum against a library");
    std::string id_abs, id_lib, id_out;
    double id_threshold = 0.6;
    ident->add_option("--absorbance", id_abs, "absorbance CSV")->required();
    ident->add_option("--library", id_lib, "peak library file (defaults to built-in)");
    ident->add_option("--out", id_out, "report file");
    ident->add_option("--threshold", id_threshold, "acceptance threshold");

    // optimize-crystal
    auto* copt = app.add_subcommand("optimize-crystal", "crystal length maximizing relative SNR");
    double alpha = 0.0;
    std::string copt_curve, copt_plot;
    copt->add_option("--alpha", alpha, "idler absorption coefficient (cm^-1)")->required();
    copt->add_option("--curve", copt_curve, "write the normalized SNR curve CSV");
    copt->add_option("--plot", copt_plot, "write an SVG plot");

    // flux
    auto* flux = app.add_subcommand("flux", "photon flux accounting for a frame");
    std::string flux_frame, flux_band, flux_out;
    double flux_gain = 0.0, flux_qe = 0.0, flux_grating = 0.0;
    flux->add_option("--frame", flux_frame, "interferogram CSV")->required();
    flux->add_option("--gain", flux_gain, "counts per detected photon");
    flux->add_option("--qe", flux_qe, "detector quantum efficiency");
    flux->add_option("--grating", flux_grating, "grating efficiency");
    flux->add_option("--band", flux_band, "wavelength band lo:hi (nm)");
    flux->add_option("--out", flux_out, "report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help / --version
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*sim) return cmd_simulate(sim_scenario, sim_out, sim_frames, sim_seed, sim_sample);
        if (*ret) return cmd_retrieve(ret_sample, ret_reference, ret_config, ret_out, ret_plot);
        if (*allan) return cmd_allan(allan_dir, allan_taus, allan_out, allan_plot, allan_excl,
                                     0.0, false);
        if (*scan) return cmd_allan(scan_dir, scan_taus, scan_out, scan_plot, scan_excl,
                                    scan_bright, true);
        if (*cal) return cmd_calibrate_opld(cal_oplds, cal_scenario, cal_out, cal_plot,
                                            cal_frames, cal_seed);
        if (*ident) return cmd_identify(id_abs, id_lib, id_out, id_threshold);
        if (*copt) return cmd_optimize_crystal(alpha, copt_curve, copt_plot);
        if (*flux) return cmd_flux(flux_frame, flux_gain, flux_qe, flux_grating, flux_band,
                                   flux_out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const FormatError& e) {
        std::cerr << "input format error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
