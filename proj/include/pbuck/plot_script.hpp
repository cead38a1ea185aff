#pragma once

// gnuplot script for a trace CSV: a 2x2 multiplot with output voltage,
// per-unit current difference, inductor currents and duty cycles.

#include "pbuck/errors.hpp"
#include "pbuck/trace_csv.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pbuck {

inline constexpr std::array<std::string_view, 8> kPlotColumns = {"t", "Vo", "e", "e2", "iL1", "iL2", "d1", "d2"};

/// Builds the script text from an already-read CSV header line.
inline std::string plot_script_for_header(const std::string& header_line, const std::string& csv_path,
                                          const std::string& image_path) {
    const auto header = split_csv_line(header_line);
    for (auto col : kPlotColumns) {
        if (std::find(header.begin(), header.end(), col) == header.end()) {
            throw FormatError("CSV header is missing column '" + std::string(col) + "'");
        }
    }
    const std::string data = "'" + csv_path + "'";
    std::string s;
    s += "# gnuplot script generated by pbuck from " + csv_path + "\n";
    s += "set datafile separator ','\n";
    s += "set terminal pngcairo size 1200,900 enhanced\n";
    s += "set output '" + image_path + "'\n";
    s += "set grid\n";
    s += "set xlabel 'time [s]'\n";
    s += "set multiplot layout 2,2 title 'Parallel buck converters'\n";
    s += "\n";
    s += "set title 'Output voltage'\n";
    s += "set ylabel 'V_o [V]'\n";
    s += "plot " + data + " using 't':'Vo' with lines lw 2 title 'V_o', \\\n";
    s += "     " + data + " using 't':(column('Vo') + column('e')) with lines dt 2 title 'V_{ref}'\n";
    s += "\n";
    s += "set title 'Difference between per-unit currents'\n";
    s += "set ylabel 'i_{L1}/I_{1m} - i_{L2}/I_{2m}'\n";
    s += "plot " + data + " using 't':'e2' with lines lw 2 title 'e_2'\n";
    s += "\n";
    s += "set title 'Inductor currents'\n";
    s += "set ylabel 'current [A]'\n";
    s += "plot " + data + " using 't':'iL1' with lines title 'i_{L1}', \\\n";
    s += "     " + data + " using 't':'iL2' with lines title 'i_{L2}'\n";
    s += "\n";
    s += "set title 'Duty cycles'\n";
    s += "set ylabel 'duty'\n";
    s += "set yrange [-0.05:1.05]\n";
    s += "plot " + data + " using 't':'d1' with lines title 'd_1', \\\n";
    s += "     " + data + " using 't':'d2' with lines title 'd_2'\n";
    s += "\n";
    s += "unset multiplot\n";
    return s;
}

/// Reads the header of `csv_path` and returns the script text. The image is
/// written next to the CSV with a .png extension when gnuplot runs it.
inline std::string emit_plot_script(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open CSV '" + csv_path.string() + "'");
    std::string header;
    if (!std::getline(in, header)) throw FormatError("CSV '" + csv_path.string() + "' has no header");
    auto image = csv_path;
    image.replace_extension(".png");
    return plot_script_for_header(header, csv_path.generic_string(), image.generic_string());
}

}  // namespace pbuck
