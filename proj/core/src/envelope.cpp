#include "upspec/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "upspec/errors.hpp"

namespace upspec {

namespace {

constexpr double kPi = std::numbers::pi;

// Raised-cosine (Tukey) band window evaluated at frequency f >= 0.
double band_window(double f, double lo, double hi, double taper_frac) {
    if (f < lo || f > hi) return 0.0;
    const double ramp = taper_frac * (hi - lo) / 2.0;
    if (ramp > 0.0) {
        if (f < lo + ramp) return 0.5 * (1.0 - std::cos(kPi * (f - lo) / ramp));
        if (f > hi - ramp) return 0.5 * (1.0 - std::cos(kPi * (hi - f) / ramp));
    }
    return 1.0;
}

// Smooth background estimate: Fourier low-pass with a cosine roll-off that
// reaches zero at f_cut. Captures the DC pedestal without touching the
// carrier band.
std::vector<double> lowpass_background(const std::vector<double>& x, double dnu, double f_cut) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
    detail::fft(buf, false);
    for (std::size_t k = 0; k < n; ++k) {
        const double fk = (k <= n / 2 ? static_cast<double>(k)
                                      : static_cast<double>(k) - static_cast<double>(n)) /
                          (static_cast<double>(n) * dnu);
        const double af = std::abs(fk);
        const double gain = af >= f_cut ? 0.0 : 0.5 * (1.0 + std::cos(kPi * af / f_cut));
        buf[k] *= gain;
    }
    detail::fft(buf, true);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
    return out;
}

// Burg reflection-coefficient recursion. Returns AR coefficients a[1..p] of
// the model x[n] = -sum_k a[k] x[n-k].
std::vector<double> burg_coefficients(const std::vector<double>& x, int order) {
    std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
    a[0] = 1.0;
    std::vector<double> f(x.begin() + 1, x.end());
    std::vector<double> b(x.begin(), x.end() - 1);
    for (int m = 1; m <= order; ++m) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            num += f[i] * b[i];
            den += f[i] * f[i] + b[i] * b[i];
        }
        const double k = den > 0.0 ? -2.0 * num / den : 0.0;
        std::vector<double> a_new(a);
        for (int i = 1; i <= m; ++i) {
            a_new[static_cast<std::size_t>(i)] =
                a[static_cast<std::size_t>(i)] + k * a[static_cast<std::size_t>(m - i)];
        }
        a = std::move(a_new);
        if (f.size() <= 1) break;
        std::vector<double> f_new(f.size() - 1), b_new(b.size() - 1);
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            f_new[i] = f[i + 1] + k * b[i + 1];
            b_new[i] = b[i] + k * f[i];
        }
        f = std::move(f_new);
        b = std::move(b_new);
    }
    return {a.begin() + 1, a.end()};
}

// Extend the record by m points per side with forward/backward AR prediction.
std::vector<double> ar_extend(const std::vector<double>& x, int order, std::size_t m) {
    const auto a = burg_coefficients(x, order);
    const std::size_t p = a.size();
    std::vector<double> out(x.size() + 2 * m, 0.0);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(m));
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = m + x.size() + j;
        double v = 0.0;
        for (std::size_t k = 0; k < p; ++k) v -= a[k] * out[i - 1 - k];
        out[i] = v;
    }
    for (std::size_t j = m; j-- > 0;) {
        double v = 0.0;
        for (std::size_t k = 0; k < p; ++k) v -= a[k] * out[j + 1 + k];
        out[j] = v;
    }
    return out;
}

struct FilterGeometry {
    std::size_t n = 0;        // record length
    std::size_t m = 0;        // extension per side
    std::size_t n_ext = 0;    // n + 2m
    double dnu = 0.0;
    double f_bg = 0.0;        // background low-pass cutoff
};

FilterGeometry geometry(const Spectrum& s, const EnvelopeFilter& filter) {
    FilterGeometry g;
    g.n = s.size();
    g.dnu = (s.axis.back() - s.axis.front()) / static_cast<double>(g.n - 1);
    const double h = filter.half_width();
    // Extension long enough that the taper roll-off is spectrally much
    // narrower than the passband.
    std::size_t m = static_cast<std::size_t>(std::ceil(3.5 / (h * g.dnu)));
    m = std::clamp(m, g.n / 10 + 1, g.n);
    g.m = m;
    g.n_ext = g.n + 2 * m;
    g.f_bg = std::min(2.5 / (static_cast<double>(g.n) * g.dnu), 0.9 * filter.passband.lo);
    return g;
}

} // namespace

EnvelopeFilter EnvelopeFilter::for_opld(double opld_mm, double half_ratio) {
    if (!(opld_mm > 0.0)) {
        throw ConfigError("path difference must be positive");
    }
    if (!(half_ratio > 0.0) || !(half_ratio < 1.0)) {
        throw ConfigError("passband half ratio must be in (0, 1)");
    }
    const double fc = opld_mm * 0.1; // cycles per cm^-1
    EnvelopeFilter f;
    f.passband = BandLimits{fc * (1.0 - half_ratio), fc * (1.0 + half_ratio)};
    return f;
}

void EnvelopeFilter::validate() const {
    passband.validate();
    if (!(passband.lo > 0.0)) {
        throw ConfigError("envelope passband must exclude zero frequency");
    }
    if (edge_exclusion_fraction < 0.0 || edge_exclusion_fraction > 0.25) {
        throw ConfigError("edge exclusion fraction must be in [0, 0.25]");
    }
    if (ar_order < 1 || ar_order > 32) {
        throw ConfigError("autoregressive order out of range");
    }
}

Spectrum analytic_envelope(const Spectrum& s, const EnvelopeFilter& filter) {
    s.validate();
    filter.validate();
    if (s.axis_kind != AxisKind::wavenumber_cm1 || !s.ascending()) {
        throw DomainError("analytic_envelope expects an ascending wavenumber spectrum");
    }
    if (s.size() < 16) {
        throw DomainError("record too short for envelope extraction");
    }
    const FilterGeometry g = geometry(s, filter);
    // uniformity check
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (std::abs((s.axis[i] - s.axis[i - 1]) - g.dnu) > 1e-6 * g.dnu + 1e-12) {
            throw DomainError("analytic_envelope requires a uniform grid");
        }
    }
    const double fc = filter.center();
    if (g.dnu > 1.0 / (4.0 * fc)) {
        throw ConfigError("grid does not resolve the carrier (need >= 4 samples per period)");
    }
    if (filter.passband.hi >= 0.5 / g.dnu) {
        throw ConfigError("passband exceeds the Nyquist frequency of the grid");
    }

    const auto background = lowpass_background(s.values, g.dnu, g.f_bg);
    std::vector<double> detrended(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        detrended[i] = s.values[i] - background[i];
    }

    auto extended = ar_extend(detrended, filter.ar_order, g.m);

    // taper the outer 60% of each extension wing
    const std::size_t mt = (g.m * 3) / 5;
    for (std::size_t i = 0; i < mt; ++i) {
        const double w = 0.5 * (1.0 - std::cos(kPi * (static_cast<double>(i) + 0.5) /
                                               static_cast<double>(mt)));
        extended[i] *= w;
        extended[g.n_ext - 1 - i] *= w;
    }

    std::vector<std::complex<double>> buf(g.n_ext);
    for (std::size_t i = 0; i < g.n_ext; ++i) buf[i] = extended[i];
    detail::fft(buf, false);
    for (std::size_t k = 0; k < g.n_ext; ++k) {
        const double fk = (k <= g.n_ext / 2 ? static_cast<double>(k)
                                            : static_cast<double>(k) - static_cast<double>(g.n_ext)) /
                          (static_cast<double>(g.n_ext) * g.dnu);
        const double w = fk > 0.0
                             ? band_window(fk, filter.passband.lo, filter.passband.hi, filter.band_taper)
                             : 0.0;
        buf[k] *= 2.0 * w;
    }
    detail::fft(buf, true);

    const std::size_t edge = static_cast<std::size_t>(
        std::floor(filter.edge_exclusion_fraction * static_cast<double>(g.n)));
    Spectrum out;
    out.axis_kind = AxisKind::wavenumber_cm1;
    out.axis.reserve(g.n - 2 * edge);
    out.values.reserve(g.n - 2 * edge);
    for (std::size_t i = edge; i < g.n - edge; ++i) {
        out.axis.push_back(s.axis[i]);
        out.values.push_back(std::abs(buf[g.m + i]));
    }
    return out;
}

double envelope_noise_gain(const EnvelopeFilter& filter, double sample_spacing) {
    filter.validate();
    if (!(sample_spacing > 0.0)) {
        throw DomainError("sample spacing must be positive");
    }
    // In-phase variance of the filtered analytic noise for unit white noise:
    //   var = 2 * spacing * integral W(f)^2 df
    // where the Tukey band integrates to width * (1 - 5 alpha / 8).
    const double width = filter.passband.hi - filter.passband.lo;
    const double power = width * (1.0 - 5.0 * filter.band_taper / 8.0);
    return std::sqrt(2.0 * sample_spacing * power);
}

double estimate_sample_noise(const Spectrum& record, const EnvelopeFilter& filter) {
    record.validate();
    const std::size_t n = record.size();
    if (n < 32) return 0.0;
    const double span = std::abs(record.axis.back() - record.axis.front());
    const double d = span / static_cast<double>(n - 1);
    const double nyq = 0.5 / d;
    const double lo = filter.passband.hi * 1.15;
    const double hi = std::min(filter.passband.hi * 2.2, 0.85 * nyq);
    if (hi <= lo) return 0.0;

    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = record.values[i];
    detail::fft(buf, false);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double fk = static_cast<double>(k) / (static_cast<double>(n) * d);
        if (fk >= lo && fk <= hi) {
            acc += std::norm(buf[k]);
            ++count;
        }
    }
    if (count < 4) return 0.0;
    // E|X_k|^2 = n * sigma^2 for white noise
    return std::sqrt(acc / (static_cast<double>(count) * static_cast<double>(n)));
}

} // namespace upspec
