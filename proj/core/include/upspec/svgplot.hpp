#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace upspec {

// Minimal deterministic SVG line-plot writer used for the optional figure
// outputs. Data CSVs remain the contract; these plots are for quick looks.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label);

    void set_log_log(bool log_x, bool log_y);
    void set_secondary_axis(std::string label); // right-hand y axis

    void add_line(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& color, bool dashed = false, bool secondary = false);
    void add_points(const std::vector<double>& x, const std::vector<double>& y,
                    const std::string& color, bool secondary = false);
    // Shaded band between y_lo and y_hi.
    void add_band(const std::vector<double>& x, const std::vector<double>& y_lo,
                  const std::vector<double>& y_hi, const std::string& color);

    void save(const std::filesystem::path& path) const;

private:
    struct Series {
        std::vector<double> x, y, y2;
        std::string color;
        enum class Kind { line, points, band } kind = Kind::line;
        bool dashed = false;
        bool secondary = false;
    };

    std::string title_, x_label_, y_label_, y2_label_;
    bool log_x_ = false, log_y_ = false, has_y2_ = false;
    std::vector<Series> series_;
};

} // namespace upspec
