#include "upspec/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "upspec/errors.hpp"

namespace upspec {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMarginL = 70.0, kMarginR = 70.0, kMarginT = 40.0, kMarginB = 55.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string fmt_tick(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

} // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::set_log_log(bool log_x, bool log_y) {
    log_x_ = log_x;
    log_y_ = log_y;
}

void SvgPlot::set_secondary_axis(std::string label) {
    has_y2_ = true;
    y2_label_ = std::move(label);
}

void SvgPlot::add_line(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& color, bool dashed, bool secondary) {
    Series s;
    s.x = x;
    s.y = y;
    s.color = color;
    s.kind = Series::Kind::line;
    s.dashed = dashed;
    s.secondary = secondary;
    series_.push_back(std::move(s));
}

void SvgPlot::add_points(const std::vector<double>& x, const std::vector<double>& y,
                         const std::string& color, bool secondary) {
    Series s;
    s.x = x;
    s.y = y;
    s.color = color;
    s.kind = Series::Kind::points;
    s.secondary = secondary;
    series_.push_back(std::move(s));
}

void SvgPlot::add_band(const std::vector<double>& x, const std::vector<double>& y_lo,
                       const std::vector<double>& y_hi, const std::string& color) {
    Series s;
    s.x = x;
    s.y = y_lo;
    s.y2 = y_hi;
    s.color = color;
    s.kind = Series::Kind::band;
    series_.push_back(std::move(s));
}

void SvgPlot::save(const std::filesystem::path& path) const {
    if (series_.empty()) throw DomainError("plot has no series");

    auto tx = [&](double v) { return log_x_ ? std::log10(std::max(v, 1e-300)) : v; };
    auto ty = [&](double v) { return log_y_ ? std::log10(std::max(v, 1e-300)) : v; };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0, y20 = x0, y21 = -x0;
    for (const auto& s : series_) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            double& lo = s.secondary ? y20 : y0;
            double& hi = s.secondary ? y21 : y1;
            lo = std::min(lo, ty(s.y[i]));
            hi = std::max(hi, ty(s.y[i]));
            if (s.kind == Series::Kind::band) {
                lo = std::min(lo, ty(s.y2[i]));
                hi = std::max(hi, ty(s.y2[i]));
            }
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    if (has_y2_ && !(y21 > y20)) y21 = y20 + 1.0;
    const double px = 0.04 * (x1 - x0), py = 0.06 * (y1 - y0);
    x0 -= px;
    x1 += px;
    y0 -= py;
    y1 += py;
    if (has_y2_) {
        const double p2 = 0.06 * (y21 - y20);
        y20 -= p2;
        y21 += p2;
    }

    const double plot_w = kWidth - kMarginL - kMarginR;
    const double plot_h = kHeight - kMarginT - kMarginB;
    auto mapx = [&](double v) { return kMarginL + (tx(v) - x0) / (x1 - x0) * plot_w; };
    auto mapy = [&](double v, bool sec) {
        const double lo = sec ? y20 : y0;
        const double hi = sec ? y21 : y1;
        return kMarginT + plot_h - (ty(v) - lo) / (hi - lo) * plot_h;
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write plot: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title_ << "</text>\n";

    // frame
    out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks (5 per axis)
    for (int i = 0; i <= 5; ++i) {
        const double fx = x0 + (x1 - x0) * i / 5.0;
        const double sx = kMarginL + plot_w * i / 5.0;
        const double label = log_x_ ? std::pow(10.0, fx) : fx;
        out << "<line x1=\"" << sx << "\" y1=\"" << kMarginT + plot_h << "\" x2=\"" << sx
            << "\" y2=\"" << kMarginT + plot_h + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx << "\" y=\"" << kMarginT + plot_h + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_tick(label) << "</text>\n";
        const double fy = y0 + (y1 - y0) * i / 5.0;
        const double sy = kMarginT + plot_h - plot_h * i / 5.0;
        const double ylabel = log_y_ ? std::pow(10.0, fy) : fy;
        out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << sy << "\" x2=\"" << kMarginL
            << "\" y2=\"" << sy << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << sy + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_tick(ylabel) << "</text>\n";
        if (has_y2_) {
            const double fy2 = y20 + (y21 - y20) * i / 5.0;
            out << "<text x=\"" << kMarginL + plot_w + 8 << "\" y=\"" << sy + 4
                << "\" text-anchor=\"start\" font-size=\"11\">" << fmt_tick(fy2) << "</text>\n";
        }
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label_ << "</text>\n";
    out << "<text x=\"18\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << kHeight / 2 << ")\">" << y_label_ << "</text>\n";
    if (has_y2_) {
        out << "<text x=\"" << kWidth - 14 << "\" y=\"" << kHeight / 2
            << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(90 "
            << kWidth - 14 << " " << kHeight / 2 << ")\">" << y2_label_ << "</text>\n";
    }

    for (const auto& s : series_) {
        if (s.kind == Series::Kind::band) {
            out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.3\" stroke=\"none\" "
                << "points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << fmt(mapx(s.x[i])) << "," << fmt(mapy(s.y2[i], false)) << " ";
            }
            for (std::size_t i = s.x.size(); i-- > 0;) {
                out << fmt(mapx(s.x[i])) << "," << fmt(mapy(s.y[i], false)) << " ";
            }
            out << "\"/>\n";
        } else if (s.kind == Series::Kind::line) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
            if (s.dashed) out << " stroke-dasharray=\"6,4\"";
            out << " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << fmt(mapx(s.x[i])) << "," << fmt(mapy(s.y[i], s.secondary)) << " ";
            }
            out << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << "<circle cx=\"" << fmt(mapx(s.x[i])) << "\" cy=\""
                    << fmt(mapy(s.y[i], s.secondary)) << "\" r=\"3.5\" fill=\"" << s.color
                    << "\"/>\n";
            }
        }
    }
    out << "</svg>\n";
}

} // namespace upspec
