#include "dgest/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace dgest {

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write_file: cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("atomic_write_file: write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string CsvTable::to_string() const {
    std::string out;
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += row[c];
        }
        out += '\n';
    }
    return out;
}

namespace {

struct AxisMap {
    double lo, hi;      // log10 range
    double px0, px1;    // pixel range

    double operator()(double v) const {
        const double t = (std::log10(v) - lo) / (hi - lo);
        return px0 + t * (px1 - px0);
    }
};

} // namespace

std::string render_loglog_svg(const std::vector<PlotSeries>& series, const std::string& title) {
    const int width = 640, height = 480;
    const double ml = 70, mr = 160, mt = 40, mb = 50;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) {
            if (v <= 0.0) continue;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmin < xmax)) { xmin = 0.1; xmax = 1.0; }
    if (!(ymin < ymax)) { ymin = 0.1; ymax = 1.0; }

    const AxisMap xm{std::floor(std::log10(xmin)), std::ceil(std::log10(xmax)), ml,
                     width - mr};
    const AxisMap ym{std::floor(std::log10(ymin)), std::ceil(std::log10(ymax)), height - mb,
                     mt};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_double(0.5 * width) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\">" + title + "</text>\n";

    // frame
    svg += "<rect x=\"" + format_double(ml) + "\" y=\"" + format_double(mt) + "\" width=\"" +
           format_double(width - ml - mr) + "\" height=\"" + format_double(height - mt - mb) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    // decade ticks
    for (int d = static_cast<int>(xm.lo); d <= static_cast<int>(xm.hi); ++d) {
        const double px = xm(std::pow(10.0, d));
        svg += "<line x1=\"" + format_double(px) + "\" y1=\"" + format_double(height - mb) +
               "\" x2=\"" + format_double(px) + "\" y2=\"" + format_double(height - mb + 6) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_double(px) + "\" y=\"" + format_double(height - mb + 22) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" +
               std::to_string(d) + "</text>\n";
    }
    for (int d = static_cast<int>(ym.lo); d <= static_cast<int>(ym.hi); ++d) {
        const double py = ym(std::pow(10.0, d));
        svg += "<line x1=\"" + format_double(ml - 6) + "\" y1=\"" + format_double(py) +
               "\" x2=\"" + format_double(ml) + "\" y2=\"" + format_double(py) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_double(ml - 10) + "\" y=\"" + format_double(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
               std::to_string(d) + "</text>\n";
    }
    svg += "<text x=\"" + format_double(0.5 * (ml + width - mr)) + "\" y=\"" +
           format_double(height - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">h</text>\n";

    double legend_y = mt + 16;
    for (const auto& s : series) {
        std::string pts;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (s.y[i] <= 0.0) continue;
            if (!pts.empty()) pts += ' ';
            pts += format_double(xm(s.x[i])) + "," + format_double(ym(s.y[i]));
        }
        svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1.5\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") +
               "/>\n";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (s.y[i] <= 0.0) continue;
            svg += "<circle cx=\"" + format_double(xm(s.x[i])) + "\" cy=\"" +
                   format_double(ym(s.y[i])) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
        }
        svg += "<line x1=\"" + format_double(width - mr + 12) + "\" y1=\"" +
               format_double(legend_y - 4) + "\" x2=\"" + format_double(width - mr + 36) +
               "\" y2=\"" + format_double(legend_y - 4) + "\" stroke=\"" + s.color +
               "\" stroke-width=\"1.5\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") +
               "/>\n";
        svg += "<text x=\"" + format_double(width - mr + 42) + "\" y=\"" +
               format_double(legend_y) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label + "</text>\n";
        legend_y += 18;
    }
    svg += "</svg>\n";
    return svg;
}

std::string field_to_csv(const DgFunction& u) {
    const DgSpace& sp = *u.space;
    std::string out = "element,xi,eta,x,y,value\n";
    for (int e = 0; e < sp.mesh().n_elements(); ++e) {
        const ElementMap map = sp.mesh().element_map(e);
        const EvalResult v = evaluate_at_cell_points(u, e);
        for (size_t q = 0; q < sp.cell_points().size(); ++q) {
            const Vec2 ref = sp.cell_points()[q];
            const Vec2 x = map.value(ref);
            out += std::to_string(e) + "," + format_double(ref.x) + "," + format_double(ref.y) +
                   "," + format_double(x.x) + "," + format_double(x.y) + "," +
                   format_double(v.value[q]) + "\n";
        }
    }
    return out;
}

} // namespace dgest
