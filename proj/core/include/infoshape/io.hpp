#pragma once

#include <string>
#include <vector>

namespace infoshape {

/// Shortest decimal string that round-trips the double exactly (via
/// std::to_chars). All artifact files use this so reruns are byte-identical
/// and reloads are bitwise lossless.
std::string format_double(double v);

/// strtod with full-string validation; throws ParseError.
double parse_double(const std::string& token);
long long parse_int(const std::string& token);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

/// Minimal line plot: one polyline per series over a shared x axis, written
/// as a standalone SVG. Presentation plumbing only.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series);

}  // namespace infoshape
