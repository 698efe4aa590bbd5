// Output plumbing: deterministic CSV tables, static SVG convergence plots,
// atomic file writes, field dumps.
#pragma once

#include "dgest/fespace.hpp"

#include <string>
#include <vector>

namespace dgest {

// Writes content to path via a temp file and rename; creates directories.
void atomic_write_file(const std::string& path, const std::string& content);

// %.12g formatting, stable across runs for identical doubles.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x;  // meshsize
    std::vector<double> y;  // error or estimator
    bool dashed = false;
    std::string color = "#1f77b4";
};

// log-log convergence plot; axes are powers of ten.
std::string render_loglog_svg(const std::vector<PlotSeries>& series, const std::string& title);

// element id, reference point, physical point, value
std::string field_to_csv(const DgFunction& u);

} // namespace dgest
