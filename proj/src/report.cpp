#include "nots/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "nots/errors.hpp"
#include "nots/experiment.hpp"

namespace nots {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
const char* kDashes[] = {"", "8,4", "2,3", "10,3,2,3"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else if (c == '"') o += "&quot;";
        else o += c;
    }
    return o;
}

}  // namespace

std::vector<SeriesSummary> summarize(const std::vector<TrialResult>& results) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<TrialResult>> groups;
    for (const auto& r : results) {
        if (!groups.count(r.algorithm)) order.push_back(r.algorithm);
        groups[r.algorithm].push_back(r);
    }
    std::vector<SeriesSummary> out;
    for (const auto& name : order) {
        const auto& g = groups[name];
        out.push_back({name, regret_curves(g), static_cast<int>(g.size())});
    }
    return out;
}

std::string regret_svg(const std::vector<SeriesSummary>& series, bool average, const PlotGeometry& geo) {
    if (series.empty()) throw ValidationError("nothing to plot");
    std::size_t t_max = 0;
    double lo = 0.0, hi = 0.0;
    for (const auto& s : series) {
        const auto& m = average ? s.curve.mean_average : s.curve.mean_cumulative;
        const auto& sd = average ? s.curve.std_average : s.curve.std_cumulative;
        t_max = std::max(t_max, m.size());
        for (std::size_t t = 0; t < m.size(); ++t) {
            lo = std::min(lo, m[t] - sd[t]);
            hi = std::max(hi, m[t] + sd[t]);
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    hi += 0.05 * (hi - lo);
    const double pw = geo.width - geo.left - geo.right, ph = geo.height - geo.top - geo.bottom;
    auto px = [&](std::size_t t) {
        return t_max <= 1 ? geo.left + 0.5 * pw : geo.left + pw * double(t - 1) / double(t_max - 1);
    };
    auto py = [&](double v) { return geo.top + ph * (hi - v) / (hi - lo); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(geo.width) + "\" height=\"" + num(geo.height) +
         "\" viewBox=\"0 0 " + num(geo.width) + " " + num(geo.height) + "\" data-ymin=\"" + tick_label(lo) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(geo.left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + std::string(average ? "Average regret" : "Cumulative regret") + "</text>\n";
    // Plot frame and ticks.
    s += "<rect x=\"" + num(geo.left) + "\" y=\"" + num(geo.top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = lo + (hi - lo) * i / 5.0;
        const double y = py(v);
        s += "<line x1=\"" + num(geo.left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(geo.left) + "\" y2=\"" + num(y) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(geo.left - 8) + "\" y=\"" + num(y + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(v) + "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double tv = t_max <= 1 ? 1.0 : 1.0 + (double(t_max) - 1.0) * i / 5.0;
        const double x = t_max <= 1 ? px(1) : geo.left + pw * i / 5.0;
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(geo.top + ph) + "\" x2=\"" + num(x) + "\" y2=\"" +
             num(geo.top + ph + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(x) + "\" y=\"" + num(geo.top + ph + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(tv) + "</text>\n";
        if (t_max <= 1) break;
    }
    s += "<text x=\"" + num(geo.left + pw / 2) + "\" y=\"" + num(geo.height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration t</text>\n";
    s += "<text transform=\"translate(16 " + num(geo.top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         std::string(average ? "R_t / t" : "R_t") + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& ser = series[k];
        const auto& m = average ? ser.curve.mean_average : ser.curve.mean_cumulative;
        const auto& sd = average ? ser.curve.std_average : ser.curve.std_cumulative;
        const std::string color = kColors[k % 8];
        const std::string name = escape(ser.algorithm);
        const bool band = std::any_of(sd.begin(), sd.end(), [](double v) { return v > 0.0; });
        if (band) {
            std::string pts;
            for (std::size_t t = 0; t < m.size(); ++t) pts += num(px(t + 1)) + "," + num(py(m[t] + sd[t])) + " ";
            for (std::size_t t = m.size(); t-- > 0;) pts += num(px(t + 1)) + "," + num(py(m[t] - sd[t])) + " ";
            pts.pop_back();
            s += "<polygon class=\"band\" data-series=\"" + name + "\" points=\"" + pts + "\" fill=\"" + color +
                 "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
        }
        std::string pts;
        for (std::size_t t = 0; t < m.size(); ++t) pts += num(px(t + 1)) + "," + num(py(m[t])) + " ";
        pts.pop_back();
        const std::string dash = kDashes[k % 4];
        s += "<polyline class=\"mean\" data-series=\"" + name + "\" points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"2\"" + (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
    }
    s += "<g class=\"legend\">\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double y = geo.top + 14 + 20.0 * k;
        const double x = geo.width - geo.right + 15;
        const std::string dash = kDashes[k % 4];
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x + 28) + "\" y2=\"" + num(y) +
             "\" stroke=\"" + kColors[k % 8] + "\" stroke-width=\"2\"" +
             (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
        s += "<text x=\"" + num(x + 34) + "\" y=\"" + num(y + 4) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
             escape(series[k].algorithm) + "</text>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

std::string final_regret_table(const std::vector<SeriesSummary>& series) {
    std::string s;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %6s %6s %14s %14s\n", "algorithm", "trials", "T", "mean R_T", "std R_T");
    s += buf;
    for (const auto& ser : series) {
        const auto& c = ser.curve;
        std::snprintf(buf, sizeof buf, "%-12s %6d %6zu %14.6g %14.6g\n", ser.algorithm.c_str(), ser.trials,
                      c.mean_cumulative.size(), c.mean_cumulative.back(), c.std_cumulative.back());
        s += buf;
    }
    return s;
}

std::string report_directory(const std::string& dir) {
    const auto base = std::filesystem::path(dir);
    const auto results = parse_trials_csv(read_file((base / "trials.csv").string()));
    const auto series = summarize(results);
    write_file((base / "cumulative_regret.svg").string(), regret_svg(series, false));
    write_file((base / "average_regret.svg").string(), regret_svg(series, true));
    return final_regret_table(series);
}

}  // namespace nots
