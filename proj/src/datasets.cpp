#include "prmix/datasets.hpp"

#include <string>

#include "prmix/errors.hpp"

namespace prmix::datasets {

std::vector<double> galaxy_velocities() {
  return {
      9.172, 9.35, 9.483, 9.558, 9.775, 10.227, 10.406, 16.084,
      16.17, 18.419, 18.552, 18.6, 18.927, 19.052, 19.07, 19.33,
      19.343, 19.349, 19.44, 19.473, 19.529, 19.541, 19.547, 19.663,
      19.846, 19.856, 19.863, 19.914, 19.918, 19.973, 19.989, 20.166,
      20.175, 20.179, 20.196, 20.215, 20.221, 20.415, 20.629, 20.795,
      20.821, 20.846, 20.875, 20.986, 21.137, 21.492, 21.701, 21.814,
      21.921, 21.96, 22.185, 22.209, 22.242, 22.249, 22.314, 22.374,
      22.495, 22.746, 22.747, 22.888, 22.914, 23.206, 23.241, 23.263,
      23.484, 23.538, 23.542, 23.666, 23.706, 23.711, 24.129, 24.285,
      24.289, 24.366, 24.717, 24.99, 25.633, 26.96, 26.995, 32.065,
      32.789, 34.279,
  };
}

std::vector<std::pair<int, int>> defaults_frequencies() {
  return {{0, 3002}, {1, 502}, {2, 187}, {3, 138}, {4, 233}, {5, 160},
          {6, 107},  {7, 80},  {8, 59},  {9, 53},  {10, 41}, {11, 28},
          {12, 34},  {13, 10}, {14, 13}, {15, 11}, {16, 33}};
}

std::vector<double> defaults_installments(TopBin top) {
  std::vector<double> out;
  for (const auto& [value, count] : defaults_frequencies()) {
    if (value == kDefaultsTopValue && top == TopBin::Drop) continue;
    out.insert(out.end(), static_cast<std::size_t>(count), static_cast<double>(value));
  }
  return out;
}

TopBin parse_top_bin(std::string_view text) {
  if (text == "expand") return TopBin::Expand;
  if (text == "drop") return TopBin::Drop;
  throw ConfigError("top_bin must be 'expand' or 'drop', got '" + std::string(text) + "'");
}

}  // namespace prmix::datasets
