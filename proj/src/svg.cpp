#include "qbl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

namespace qbl {

namespace {

constexpr double kWidth = 880, kHeight = 520;
constexpr double kLeft = 72, kRight = 200, kTop = 28, kBottom = 52;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.6g", x);
    return buffer;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    double screen_lo = 0.0, screen_hi = 1.0;
    double to_screen(double v) const {
        if (hi == lo) return 0.5 * (screen_lo + screen_hi);
        return screen_lo + (v - lo) / (hi - lo) * (screen_hi - screen_lo);
    }
};

struct Series {
    std::string policy;
    std::vector<SweepRow> rows;
};

}  // namespace

std::string render_sweep_svg(const ExperimentConfig& config, std::span<const SweepRow> rows) {
    // Group by policy, keeping first-appearance order.
    std::vector<Series> series;
    for (const SweepRow& row : rows) {
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const Series& s) { return s.policy == row.policy; });
        if (it == series.end()) {
            series.push_back(Series{row.policy, {}});
            it = series.end() - 1;
        }
        it->rows.push_back(row);
    }
    for (Series& s : series)
        std::sort(s.rows.begin(), s.rows.end(),
                  [](const SweepRow& a, const SweepRow& b) { return a.k < b.k; });

    const double n_arms = static_cast<double>(config.instance.n_arms());
    const double horizon = static_cast<double>(config.T);

    // Reference curve fitted to the query-first series, when present.
    bool have_reference = false;
    double fit_c = 0.0;
    for (const Series& s : series) {
        if (s.policy == "query_then_ucbv") {
            fit_c = fit_envelope_constant(s.rows, n_arms, horizon);
            have_reference = true;
        }
    }

    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 0.0;
    bool first_point = true;
    const auto include = [&](double x, double y) {
        if (first_point) {
            x_lo = x_hi = x;
            y_lo = y_hi = y;
            first_point = false;
            return;
        }
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
    };
    for (const Series& s : series) {
        for (const SweepRow& row : s.rows) {
            include(static_cast<double>(row.k), row.ci95_lo);
            include(static_cast<double>(row.k), row.ci95_hi);
        }
    }
    if (have_reference) {
        for (const SweepRow& row : series[0].rows)
            include(static_cast<double>(row.k),
                    fit_c * regret_envelope(n_arms, horizon, static_cast<double>(row.k)));
    }
    if (first_point) include(0.0, 0.0);
    include(x_lo, 0.0);  // keep the zero line visible
    const double y_pad = (y_hi - y_lo) > 0 ? 0.06 * (y_hi - y_lo) : 1.0;
    y_lo -= y_pad;
    y_hi += y_pad;
    if (x_hi == x_lo) x_hi = x_lo + 1.0;

    Axis x{x_lo, x_hi, kLeft, kWidth - kRight};
    Axis y{y_lo, y_hi, kHeight - kBottom, kTop};  // screen y grows downward

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes and ticks.
    const std::string axis_style = "stroke=\"#222\" stroke-width=\"1\"";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" +
           num(kWidth - kRight) + "\" y2=\"" + num(kHeight - kBottom) + "\" " + axis_style +
           "/>\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(kHeight - kBottom) + "\" " + axis_style + "/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
        const double sx = x.to_screen(xv);
        svg += "<line x1=\"" + num(sx) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" +
               num(sx) + "\" y2=\"" + num(kHeight - kBottom + 5) + "\" " + axis_style + "/>\n";
        svg += "<text x=\"" + num(sx) + "\" y=\"" + num(kHeight - kBottom + 18) +
               "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">" +
               num(xv) + "</text>\n";
        const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
        const double sy = y.to_screen(yv);
        svg += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(sy) + "\" x2=\"" + num(kLeft) +
               "\" y2=\"" + num(sy) + "\" " + axis_style + "/>\n";
        svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(sy + 4) +
               "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">" + num(yv) +
               "</text>\n";
    }
    // Zero line.
    if (y_lo < 0.0 && y_hi > 0.0) {
        const double zero = y.to_screen(0.0);
        svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(zero) + "\" x2=\"" +
               num(kWidth - kRight) + "\" y2=\"" + num(zero) +
               "\" stroke=\"#bbb\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n";
    }
    svg += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 14) +
           "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">k (query "
           "budget)</text>\n";
    svg += "<text x=\"16\" y=\"" + num((kTop + kHeight - kBottom) / 2) +
           "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 " +
           num((kTop + kHeight - kBottom) / 2) + ")\">mean pseudo-regret</text>\n";

    // Reference curve under the data series.
    if (have_reference) {
        std::string points;
        const int samples = 200;
        for (int i = 0; i <= samples; ++i) {
            const double kv = x_lo + (x_hi - x_lo) * i / samples;
            const double yv = fit_c * regret_envelope(n_arms, horizon, kv);
            points += num(x.to_screen(kv)) + "," + num(y.to_screen(yv)) + " ";
        }
        svg += "<polyline id=\"reference\" fill=\"none\" stroke=\"#777\" stroke-width=\"1.5\" "
               "stroke-dasharray=\"6,4\" points=\"" +
               points + "\"/>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        // CI band.
        std::string band;
        for (const SweepRow& row : series[s].rows)
            band += num(x.to_screen(static_cast<double>(row.k))) + "," +
                    num(y.to_screen(row.ci95_hi)) + " ";
        for (auto it = series[s].rows.rbegin(); it != series[s].rows.rend(); ++it)
            band += num(x.to_screen(static_cast<double>(it->k))) + "," +
                    num(y.to_screen(it->ci95_lo)) + " ";
        svg += "<polygon fill=\"" + std::string(color) + "\" fill-opacity=\"0.15\" "
               "stroke=\"none\" points=\"" + band + "\"/>\n";
        // Mean line.
        std::string points;
        for (const SweepRow& row : series[s].rows)
            points += num(x.to_screen(static_cast<double>(row.k))) + "," +
                      num(y.to_screen(row.mean_pseudo_regret)) + " ";
        svg += "<polyline id=\"series-" + series[s].policy + "\" fill=\"none\" stroke=\"" +
               color + "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    }

    // Legend.
    double legend_y = kTop + 10;
    const double legend_x = kWidth - kRight + 14;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg += "<line x1=\"" + num(legend_x) + "\" y1=\"" + num(legend_y - 4) + "\" x2=\"" +
               num(legend_x + 22) + "\" y2=\"" + num(legend_y - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(legend_x + 28) + "\" y=\"" + num(legend_y) +
               "\" font-family=\"monospace\" font-size=\"11\">" + series[s].policy +
               "</text>\n";
        legend_y += 18;
    }
    if (have_reference) {
        svg += "<line x1=\"" + num(legend_x) + "\" y1=\"" + num(legend_y - 4) + "\" x2=\"" +
               num(legend_x + 22) + "\" y2=\"" + num(legend_y - 4) +
               "\" stroke=\"#777\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
        svg += "<text x=\"" + num(legend_x + 28) + "\" y=\"" + num(legend_y) +
               "\" font-family=\"monospace\" font-size=\"11\">envelope fit c=" + num(fit_c) +
               "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace qbl
