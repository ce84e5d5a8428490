#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace prmix::datasets {

/// The 82 galaxy velocities (km/s divided by 1000), sorted as distributed.
std::vector<double> galaxy_velocities();

/// Defaulted-installment counts as (value, frequency). The last row is the
/// censored ">= 16" bin, recorded at 16.
std::vector<std::pair<int, int>> defaults_frequencies();

constexpr int kDefaultsTopValue = 16;

/// How to treat the censored top bin: 33 observations at y = 16, or none.
enum class TopBin { Expand, Drop };
TopBin parse_top_bin(std::string_view text);

/// Frequency table expanded in value order.
std::vector<double> defaults_installments(TopBin top = TopBin::Expand);

}  // namespace prmix::datasets
