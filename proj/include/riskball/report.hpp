#pragma once

#include <map>
#include <string>
#include <vector>

#include "riskball/analyses.hpp"
#include "riskball/policy.hpp"

namespace riskball::eval {

// CSV writing with the project-wide float formatting; writes are atomic
// (temp file + rename).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string csv_cell(double v);

struct Histogram {
    double lo = 0.0, hi = 1.0;
    std::vector<std::size_t> counts;

    static Histogram build(const std::vector<double>& values, std::size_t bins);
    std::size_t total() const;
};

// Self-contained SVG figures (no external plotting dependency).
std::string svg_histogram(const Histogram& hist, const std::string& title,
                          const std::string& color = "#4878cf");
std::string svg_scatter(const std::vector<std::array<double, 2>>& points,
                        const std::vector<int>& classes,
                        const std::vector<std::string>& class_names, const std::string& title);
std::string svg_curves(const std::map<int, double>& a, const std::string& label_a,
                       const std::map<int, double>& b, const std::string& label_b,
                       const std::string& title);
std::string svg_boxplot(const std::vector<rl::PolicyReport::GroupStats>& groups,
                        const std::string& title);

void save_text(const std::string& path, const std::string& content);

}  // namespace riskball::eval
