#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prmix/bench.hpp"
#include "prmix/support_search.hpp"

namespace prmix::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line chart; nonpositive values are dropped.
std::string loglog_svg(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<Series>& series);

/// Parses the per-cell CSV written by bench::write_cells_csv.
std::vector<bench::CellRow> read_cells_csv(std::istream& in);

/// One SVG per metric (err_f, err_L1, kl_contrast), lines are medians over
/// seeds per (scenario, gamma). Throws DataError when there are no checkpoints.
std::vector<std::filesystem::path> rate_plots(const std::vector<bench::CellRow>& cells,
                                              const std::filesystem::path& dir);

/// Stem plot of a mixing distribution.
std::string stem_svg(const std::string& title, std::span<const double> support,
                     std::span<const double> weights);

/// Fitted mixture density over a histogram of the data (unit bars for counts).
std::string mixture_svg(const std::string& title, const FittedMixture& mixture,
                        std::span<const double> data);

}  // namespace prmix::plot
