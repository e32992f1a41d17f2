#pragma once

#include <string>
#include <vector>

#include "nots/bandit.hpp"

namespace nots {

struct SeriesSummary {
    std::string algorithm;
    RegretCurve curve;
    int trials;
};

/// Groups results by algorithm (first-appearance order) and summarizes each.
std::vector<SeriesSummary> summarize(const std::vector<TrialResult>& results);

struct PlotGeometry {
    double width = 800, height = 500;
    double left = 70, right = 170, top = 40, bottom = 55;
};

/// SVG line plot of mean curves with +-1 std bands. `average` selects R_t / t.
std::string regret_svg(const std::vector<SeriesSummary>& series, bool average, const PlotGeometry& geo = {});

/// Terminal table of final mean +- std cumulative regret.
std::string final_regret_table(const std::vector<SeriesSummary>& series);

/// Reads trials.csv from dir, writes cumulative_regret.svg and
/// average_regret.svg there, and returns the table.
std::string report_directory(const std::string& dir);

}  // namespace nots
