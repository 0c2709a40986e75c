#pragma once

// Minimal standalone SVG charts for error curves and Diff histograms.

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ecdnn/metrics.hpp"

namespace ecdnn {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const Series> series);

/// Bars left of zero are drawn red, the rest blue.
std::string histogram_svg(const std::string& title, const Histogram& histogram);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ecdnn
