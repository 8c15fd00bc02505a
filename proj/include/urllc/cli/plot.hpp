#pragma once

// Plot scripts. Each figure is emitted as a standalone matplotlib script with
// the table embedded, rendering to SVG next to the script.

#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "urllc/cli/csv.hpp"

namespace urllc::cli {

enum class Figure { fig2, fig3, fig4, fig5 };

inline const char* expected_schema(Figure f) {
    switch (f) {
        case Figure::fig2: return "sweep_snr";
        case Figure::fig3: return "sweep_kappa";
        case Figure::fig4: return "latency";
        case Figure::fig5: return "goodput";
    }
    return "";
}

inline const char* to_string(Figure f) {
    switch (f) {
        case Figure::fig2: return "fig2";
        case Figure::fig3: return "fig3";
        case Figure::fig4: return "fig4";
        case Figure::fig5: return "fig5";
    }
    return "";
}

namespace detail {

inline double cell_number(const CsvTable& t, std::size_t row, const std::string& col) {
    const auto& s = t.rows[row][t.column(col)];
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw DataError("row " + std::to_string(row + 1) + ": column " + col + " is not numeric: '" + s + "'");
    }
    return v;
}

inline std::string py_list(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_prob(v[i]);
    }
    return out + "]";
}

// Groups rows by a label and collects (x, y) series in file order.
struct Series {
    std::vector<double> x;
    std::vector<double> y;
};

inline std::string series_block(const std::map<std::string, Series>& groups) {
    std::string out = "SERIES = {\n";
    for (const auto& [label, s] : groups) {
        out += "    \"" + label + "\": (" + py_list(s.x) + ",\n        " + py_list(s.y) + "),\n";
    }
    return out + "}\n";
}

}  // namespace detail

/// Python source that draws `figure` from `table` and saves `svg_name`.
inline std::string plot_script(const CsvTable& table, Figure figure, const std::string& svg_name) {
    if (table.schema != expected_schema(figure)) {
        throw DataError(std::string("figure ") + to_string(figure) + " needs a " + expected_schema(figure) +
                        " table, got " + table.schema);
    }
    if (table.version != 1) throw DataError("unsupported " + table.schema + " version " + std::to_string(table.version));

    std::map<std::string, detail::Series> groups;
    std::string xlabel, ylabel, title;
    bool log_x = false, log_y = false, shade_x = false, shade_y = false;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        switch (figure) {
            case Figure::fig2: {
                const std::string label = row[table.column("scheme")] + "/" + row[table.column("policy")];
                groups[label].x.push_back(detail::cell_number(table, r, "snr_db"));
                groups[label].y.push_back(detail::cell_number(table, r, "epsilon"));
                break;
            }
            case Figure::fig3: {
                const std::string label = "kappa=" + row[table.column("kappa")];
                groups[label].x.push_back(detail::cell_number(table, r, "n"));
                groups[label].y.push_back(detail::cell_number(table, r, "n_p_opt"));
                break;
            }
            case Figure::fig4:
            case Figure::fig5: {
                if (row[table.column("feasible")] != "1") continue;
                const std::string col = figure == Figure::fig4 ? "latency_ms" : "goodput_bpcu";
                auto& s = groups[figure == Figure::fig4 ? "latency" : "goodput"];
                s.x.push_back(detail::cell_number(table, r, "epsilon_target"));
                s.y.push_back(detail::cell_number(table, r, col));
                break;
            }
        }
    }
    switch (figure) {
        case Figure::fig2:
            xlabel = "P [dB]"; ylabel = "outage probability"; title = "Outage versus SNR";
            log_y = shade_y = true;
            break;
        case Figure::fig3:
            xlabel = "blocklength n"; ylabel = "optimal pilot count"; title = "Pilot count versus blocklength";
            break;
        case Figure::fig4:
            xlabel = "target outage"; ylabel = "latency [ms]"; title = "Latency versus reliability";
            log_x = shade_x = true;
            break;
        case Figure::fig5:
            xlabel = "target outage"; ylabel = "goodput [bpcu]"; title = "Goodput versus reliability";
            log_x = shade_x = true;
            break;
    }

    std::string py;
    py += "#!/usr/bin/env python3\n";
    py += "# generated from a " + table.schema + " v1 table\n";
    py += "import os\n";
    py += "import matplotlib\n";
    py += "matplotlib.use(\"Agg\")\n";
    py += "import matplotlib.pyplot as plt\n\n";
    py += detail::series_block(groups);
    py += "\nfig, ax = plt.subplots(figsize=(6.4, 4.4))\n";
    py += "for label, (xs, ys) in SERIES.items():\n";
    py += "    ax.plot(xs, ys, marker=\"o\", markersize=3, label=label)\n";
    if (log_x) py += "ax.set_xscale(\"log\")\n";
    if (log_y) py += "ax.set_yscale(\"log\")\n";
    if (shade_y) py += "ax.axhspan(ax.get_ylim()[0], 1e-3, color=\"tab:green\", alpha=0.12, label=\"URR\")\n";
    if (shade_x) py += "ax.axvspan(ax.get_xlim()[0], 1e-3, color=\"tab:green\", alpha=0.12, label=\"URR\")\n";
    py += "ax.set_xlabel(\"" + xlabel + "\")\n";
    py += "ax.set_ylabel(\"" + ylabel + "\")\n";
    py += "ax.set_title(\"" + title + "\")\n";
    py += "ax.grid(True, which=\"both\", alpha=0.3)\n";
    py += "ax.legend(fontsize=8)\n";
    py += "fig.tight_layout()\n";
    py += "out = os.path.join(os.path.dirname(os.path.abspath(__file__)), \"" + svg_name + "\")\n";
    py += "fig.savefig(out, format=\"svg\")\n";
    py += "print(out)\n";
    return py;
}

}  // namespace urllc::cli
