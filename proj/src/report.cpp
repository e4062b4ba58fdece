#include "riskball/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "riskball/cohort_csv.hpp"

namespace riskball::eval {

namespace {

constexpr double kW = 640.0, kH = 420.0;
constexpr double kMarginLeft = 60.0, kMarginBottom = 40.0, kMarginTop = 40.0, kMarginRight = 20.0;

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string svg_open(const std::string& title) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" +
         num(kH) + "\" viewBox=\"0 0 " + num(kW) + " " + num(kH) + "\">\n";
    s += "<rect width=\"" + num(kW) + "\" height=\"" + num(kH) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kW / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
         title + "</text>\n";
    return s;
}

std::string svg_axes() {
    std::string s;
    s += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kH - kMarginBottom) + "\" x2=\"" +
         num(kW - kMarginRight) + "\" y2=\"" + num(kH - kMarginBottom) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
         num(kMarginLeft) + "\" y2=\"" + num(kH - kMarginBottom) + "\" stroke=\"black\"/>\n";
    return s;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("write_csv: cannot open " + tmp);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out << ',';
            out << header[i];
        }
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ',';
                out << row[i];
            }
            out << '\n';
        }
        if (!out) throw std::runtime_error("write_csv: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string csv_cell(double v) { return cohort::format_double(v); }

Histogram Histogram::build(const std::vector<double>& values, std::size_t bins) {
    if (values.empty() || bins == 0) throw std::invalid_argument("Histogram: empty input");
    Histogram h;
    h.lo = *std::min_element(values.begin(), values.end());
    h.hi = *std::max_element(values.begin(), values.end());
    if (h.hi <= h.lo) h.hi = h.lo + 1.0;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - h.lo) / (h.hi - h.lo) * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
    }
    return h;
}

std::size_t Histogram::total() const {
    std::size_t n = 0;
    for (std::size_t c : counts) n += c;
    return n;
}

std::string svg_histogram(const Histogram& hist, const std::string& title,
                          const std::string& color) {
    std::string s = svg_open(title) + svg_axes();
    const std::size_t bins = hist.counts.size();
    const double plot_w = kW - kMarginLeft - kMarginRight;
    const double plot_h = kH - kMarginTop - kMarginBottom;
    const std::size_t peak = std::max<std::size_t>(
        1, *std::max_element(hist.counts.begin(), hist.counts.end()));
    const double bar_w = plot_w / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double h = plot_h * static_cast<double>(hist.counts[b]) / static_cast<double>(peak);
        s += "<rect x=\"" + num(kMarginLeft + static_cast<double>(b) * bar_w) + "\" y=\"" +
             num(kH - kMarginBottom - h) + "\" width=\"" + num(bar_w * 0.92) + "\" height=\"" +
             num(h) + "\" fill=\"" + color + "\"/>\n";
    }
    s += "<text x=\"" + num(kMarginLeft) + "\" y=\"" + num(kH - 12.0) + "\" font-size=\"12\">" +
         num(hist.lo) + "</text>\n";
    s += "<text x=\"" + num(kW - kMarginRight) + "\" y=\"" + num(kH - 12.0) +
         "\" text-anchor=\"end\" font-size=\"12\">" + num(hist.hi) + "</text>\n";
    s += "</svg>\n";
    return s;
}

std::string svg_scatter(const std::vector<std::array<double, 2>>& points,
                        const std::vector<int>& classes,
                        const std::vector<std::string>& class_names, const std::string& title) {
    static const char* palette[] = {"#4878cf", "#6acc65", "#d65f5f", "#956cb4",
                                    "#c4ad66", "#77bedb"};
    std::string s = svg_open(title) + svg_axes();
    double lo_x = -1.0, hi_x = 1.0, lo_y = -1.0, hi_y = 1.0;
    for (const auto& p : points) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    }
    const double plot_w = kW - kMarginLeft - kMarginRight;
    const double plot_h = kH - kMarginTop - kMarginBottom;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double x = kMarginLeft + (points[i][0] - lo_x) / (hi_x - lo_x) * plot_w;
        const double y = kH - kMarginBottom - (points[i][1] - lo_y) / (hi_y - lo_y) * plot_h;
        const char* color = palette[static_cast<std::size_t>(classes[i]) % 6];
        s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"2.5\" fill=\"" + color +
             "\" fill-opacity=\"0.7\"/>\n";
    }
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        const double y = kMarginTop + 16.0 * static_cast<double>(c);
        s += "<circle cx=\"" + num(kW - 120.0) + "\" cy=\"" + num(y) + "\" r=\"4\" fill=\"" +
             palette[c % 6] + "\"/>\n";
        s += "<text x=\"" + num(kW - 110.0) + "\" y=\"" + num(y + 4.0) + "\" font-size=\"12\">" +
             class_names[c] + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string svg_curves(const std::map<int, double>& a, const std::string& label_a,
                       const std::map<int, double>& b, const std::string& label_b,
                       const std::string& title) {
    std::string s = svg_open(title) + svg_axes();
    double lo_x = 0.0, hi_x = 1.0, lo_y = 0.0, hi_y = 1e-9;
    for (const auto& m : {a, b}) {
        for (const auto& [x, y] : m) {
            hi_x = std::max(hi_x, static_cast<double>(x));
            hi_y = std::max(hi_y, y);
        }
    }
    const double plot_w = kW - kMarginLeft - kMarginRight;
    const double plot_h = kH - kMarginTop - kMarginBottom;
    auto polyline = [&](const std::map<int, double>& m, const char* color) {
        if (m.empty()) return std::string();
        std::string pts;
        for (const auto& [x, y] : m) {
            const double px = kMarginLeft + (static_cast<double>(x) - lo_x) / (hi_x - lo_x) * plot_w;
            const double py = kH - kMarginBottom - (y - lo_y) / (hi_y - lo_y) * plot_h;
            pts += num(px) + "," + num(py) + " ";
        }
        return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    };
    s += polyline(a, "#d65f5f");
    s += polyline(b, "#4878cf");
    s += "<text x=\"" + num(kW - 180.0) + "\" y=\"" + num(kMarginTop + 8.0) +
         "\" font-size=\"12\" fill=\"#d65f5f\">" + label_a + "</text>\n";
    s += "<text x=\"" + num(kW - 180.0) + "\" y=\"" + num(kMarginTop + 24.0) +
         "\" font-size=\"12\" fill=\"#4878cf\">" + label_b + "</text>\n";
    s += "</svg>\n";
    return s;
}

std::string svg_boxplot(const std::vector<rl::PolicyReport::GroupStats>& groups,
                        const std::string& title) {
    std::string s = svg_open(title) + svg_axes();
    const double plot_w = kW - kMarginLeft - kMarginRight;
    const double plot_h = kH - kMarginTop - kMarginBottom;
    const double slot = plot_w / std::max<double>(1.0, static_cast<double>(groups.size()));
    auto y_of = [&](double v) { return kH - kMarginBottom - v * plot_h; };
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& st = groups[g];
        const double cx = kMarginLeft + slot * (static_cast<double>(g) + 0.5);
        const double half = slot * 0.25;
        s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(y_of(st.min)) + "\" x2=\"" + num(cx) +
             "\" y2=\"" + num(y_of(st.max)) + "\" stroke=\"black\"/>\n";
        s += "<rect x=\"" + num(cx - half) + "\" y=\"" + num(y_of(st.q3)) + "\" width=\"" +
             num(2 * half) + "\" height=\"" + num(std::max(1.0, y_of(st.q1) - y_of(st.q3))) +
             "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
        s += "<line x1=\"" + num(cx - half) + "\" y1=\"" + num(y_of(st.median)) + "\" x2=\"" +
             num(cx + half) + "\" y2=\"" + num(y_of(st.median)) +
             "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + num(cx) + "\" y=\"" + num(kH - 12.0) +
             "\" text-anchor=\"middle\" font-size=\"10\">" + st.name + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

void save_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("save_text: cannot open " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace riskball::eval
