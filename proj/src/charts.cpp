#include "ecdnn/charts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <iomanip>
#include <sstream>

#include "ecdnn/error.hpp"

namespace ecdnn {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 64;
constexpr double kRight = 160;
constexpr double kTop = 40;
constexpr double kBottom = 48;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& svg, const std::string& title) {
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& x_label, const std::string& y_label) {
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        svg << "<text x=\"" << f.px(xv) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
            << std::setprecision(3) << xv << "</text>\n";
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << yv
            << "</text>\n";
    }
    svg << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << (kTop + kHeight - kBottom) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const Series> series) {
    Frame f{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            f.x0 = std::min(f.x0, x);
            f.x1 = std::max(f.x1, x);
            f.y0 = std::min(f.y0, y);
            f.y1 = std::max(f.y1, y);
        }
    if (f.x0 > f.x1) f = {0, 1, 0, 1};
    if (f.x1 == f.x0) f.x1 = f.x0 + 1;
    if (f.y1 == f.y0) f.y1 = f.y0 + 1;

    std::ostringstream svg;
    header(svg, title);
    axes(svg, f, x_label, y_label);
    std::size_t i = 0;
    for (const auto& s : series) {
        const char* color = kPalette[i % std::size(kPalette)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : s.points) svg << f.px(x) << ',' << f.py(y) << ' ';
        svg << "\"/>\n";
        const double ly = kTop + 16.0 * static_cast<double>(i);
        svg << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 30
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kWidth - kRight + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
        ++i;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string histogram_svg(const std::string& title, const Histogram& h) {
    std::size_t max_count = 1;
    for (const auto& b : h.bins) max_count = std::max(max_count, b.count);
    Frame f{h.bins.empty() ? 0.0 : h.bins.front().lo, h.bins.empty() ? 1.0 : h.bins.back().hi, 0.0,
            static_cast<double>(max_count)};
    std::ostringstream svg;
    header(svg, title);
    axes(svg, f, "Diff", "count");
    for (const auto& b : h.bins) {
        const double x = f.px(b.lo);
        const double w = std::max(1.0, f.px(b.hi) - x - 1.0);
        const double y = f.py(static_cast<double>(b.count));
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << f.py(0) - y
            << "\" fill=\"" << (b.hi <= 0.0 ? "#d62728" : "#1f77b4") << "\"/>\n";
    }
    svg << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop << "\">negative: " << std::setprecision(3)
        << h.negative_fraction * 100.0 << "%</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ecdnn
