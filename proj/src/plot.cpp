#include "prmix/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <array>
#include <map>
#include <sstream>
#include <tuple>

#include "prmix/errors.hpp"
#include "prmix/io.hpp"

namespace prmix::plot {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::string open_svg(const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  return s.str();
}

void axes(std::ostringstream& s, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
    << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << kHeight - 10
    << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  s << "<text x=\"16\" y=\"" << num((kTop + kHeight - kBottom) / 2)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << num((kTop + kHeight - kBottom) / 2)
    << ")\">" << escape(ylabel) << "</text>\n";
  (void)f;
}

// Ticks at "nice" values for a linear axis.
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
  return out;
}

void tick_marks(std::ostringstream& s, const Frame& f, const std::vector<double>& xt,
                const std::vector<double>& yt, bool log_axes) {
  for (double t : xt) {
    const double x = f.px(t);
    s << "<line x1=\"" << num(x) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(x)
      << "\" y2=\"" << num(kHeight - kBottom + 5) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(x) << "\" y=\"" << num(kHeight - kBottom + 18)
      << "\" text-anchor=\"middle\">" << label_num(log_axes ? std::pow(10.0, t) : t) << "</text>\n";
  }
  for (double t : yt) {
    const double y = f.py(t);
    s << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
      << label_num(log_axes ? std::pow(10.0, t) : t) << "</text>\n";
  }
}

std::vector<double> decade_ticks(double lo, double hi) {
  std::vector<double> out;
  for (double t = std::ceil(lo); t <= std::floor(hi); t += 1.0) out.push_back(t);
  if (out.empty()) out = {lo, hi};
  return out;
}

}  // namespace

std::string loglog_svg(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0 && s.y[i] > 0)) continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) throw DataError("nothing positive to plot on log axes");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  Frame f{x0, x1, y0 - pad, y1 + pad};

  std::ostringstream s;
  s << open_svg(title);
  axes(s, f, xlabel, ylabel);
  tick_marks(s, f, decade_ticks(f.x0, f.x1), decade_ticks(f.y0, f.y1), true);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (!(series[k].x[i] > 0 && series[k].y[i] > 0)) continue;
      const double px = f.px(std::log10(series[k].x[i]));
      const double py = f.py(std::log10(series[k].y[i]));
      pts += num(px) + "," + num(py) + " ";
      s << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    s << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(k);
    s << "<line x1=\"" << num(kWidth - kRight + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
      << num(kWidth - kRight + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\"/>\n"
      << "<text x=\"" << num(kWidth - kRight + 34) << "\" y=\"" << num(ly) << "\">"
      << escape(series[k].label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<bench::CellRow> read_cells_csv(std::istream& in) {
  std::vector<bench::CellRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("scenario,gamma,seed,n,", 0) != 0) {
        throw DataError("cells csv:" + std::to_string(line_no) + ": unexpected header");
      }
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    bench::CellRow r;
    double seed = 0, n = 0;
    if (f.size() != 7 || !io::parse_double(f[1], r.gamma) || !io::parse_double(f[2], seed) ||
        !io::parse_double(f[3], n) || !io::parse_double(f[4], r.err_f) ||
        !io::parse_double(f[5], r.err_l1) || !io::parse_double(f[6], r.kl_contrast)) {
      throw DataError("cells csv:" + std::to_string(line_no) + ": malformed row");
    }
    r.scenario = f[0];
    r.seed = static_cast<std::uint64_t>(seed);
    r.n = static_cast<std::size_t>(n);
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::filesystem::path> rate_plots(const std::vector<bench::CellRow>& cells,
                                              const std::filesystem::path& dir) {
  if (cells.empty()) throw DataError("rate plots need at least one checkpoint");
  // (scenario, gamma) -> n -> values per metric
  std::map<std::pair<std::string, double>, std::map<std::size_t, std::array<std::vector<double>, 3>>> groups;
  for (const auto& c : cells) {
    auto& v = groups[{c.scenario, c.gamma}][c.n];
    v[0].push_back(c.err_f);
    v[1].push_back(c.err_l1);
    v[2].push_back(c.kl_contrast);
  }
  const char* metrics[] = {"err_f", "err_L1", "kl_contrast"};
  const char* ylabels[] = {"median |f_n - f*|", "median L1(m_n, m_f*)", "median K(m, m_n) - K*"};
  std::vector<std::filesystem::path> out;
  for (int m = 0; m < 3; ++m) {
    std::vector<Series> series;
    for (const auto& [key, by_n] : groups) {
      Series s;
      s.label = key.first + ", gamma " + label_num(key.second);
      for (const auto& [n, v] : by_n) {
        s.x.push_back(static_cast<double>(n));
        s.y.push_back(bench::median(v[m]));
      }
      series.push_back(std::move(s));
    }
    const auto path = dir / (std::string("rate_") + metrics[m] + ".svg");
    io::write_text(path, loglog_svg(std::string("PR error: ") + metrics[m], "n", ylabels[m], series));
    out.push_back(path);
  }
  return out;
}

std::string stem_svg(const std::string& title, std::span<const double> support,
                     std::span<const double> weights) {
  if (support.empty() || support.size() != weights.size()) throw DataError("stem plot needs matching support and weights");
  double x0 = *std::min_element(support.begin(), support.end());
  double x1 = *std::max_element(support.begin(), support.end());
  const double pad = x1 > x0 ? 0.05 * (x1 - x0) : 1.0;
  const double wmax = *std::max_element(weights.begin(), weights.end());
  Frame f{x0 - pad, x1 + pad, 0.0, wmax > 0 ? 1.1 * wmax : 1.0};
  std::ostringstream s;
  s << open_svg(title);
  axes(s, f, "support point u", "weight f(u)");
  tick_marks(s, f, linear_ticks(f.x0, f.x1), linear_ticks(f.y0, f.y1), false);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double x = f.px(support[i]);
    s << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(x) << "\" y2=\""
      << num(f.py(weights[i])) << "\" stroke=\"" << kColors[0] << "\" stroke-width=\"2\"/>\n"
      << "<circle cx=\"" << num(x) << "\" cy=\"" << num(f.py(weights[i])) << "\" r=\"4\" fill=\""
      << kColors[0] << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string mixture_svg(const std::string& title, const FittedMixture& mixture,
                        std::span<const double> data) {
  if (data.empty()) throw DataError("mixture plot needs data");
  const bool counts = mixture.kernel.family() == KernelFamily::Poisson;
  const double dmin = *std::min_element(data.begin(), data.end());
  const double dmax = *std::max_element(data.begin(), data.end());
  const auto n = static_cast<double>(data.size());

  // Histogram as a density: unit-width bars for counts, ~sqrt(n) bins otherwise.
  double lo = dmin, width = 1.0;
  std::size_t bins = 1;
  if (counts) {
    lo = dmin - 0.5;
    bins = static_cast<std::size_t>(dmax - dmin) + 1;
  } else {
    bins = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(std::sqrt(n))), 5, 60);
    width = dmax > dmin ? (dmax - dmin) / static_cast<double>(bins) : 1.0;
    lo = dmin;
  }
  std::vector<double> height(bins, 0.0);
  for (double y : data) {
    auto b = static_cast<std::size_t>(std::floor((y - lo) / width));
    height[std::min(b, bins - 1)] += 1.0 / (n * width);
  }

  const double pad = counts ? 0.5 : 0.1 * std::max(dmax - dmin, 1.0);
  const double x0 = lo - (counts ? 0.0 : pad), x1 = lo + width * static_cast<double>(bins) + (counts ? 0.0 : pad);
  std::vector<double> cx, cy;
  if (counts) {
    for (double y = std::ceil(std::max(0.0, x0)); y <= x1; y += 1.0) {
      cx.push_back(y);
      cy.push_back(std::exp(mixture.log_density(y)));
    }
  } else {
    for (int i = 0; i <= 400; ++i) {
      const double y = x0 + (x1 - x0) * i / 400.0;
      cx.push_back(y);
      cy.push_back(std::exp(mixture.log_density(y)));
    }
  }
  double ymax = *std::max_element(height.begin(), height.end());
  for (double v : cy) ymax = std::max(ymax, v);
  Frame f{x0, x1, 0.0, 1.1 * ymax};

  std::ostringstream s;
  s << open_svg(title);
  axes(s, f, "y", "density");
  tick_marks(s, f, linear_ticks(f.x0, f.x1), linear_ticks(f.y0, f.y1), false);
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + width * static_cast<double>(b);
    s << "<rect x=\"" << num(f.px(a)) << "\" y=\"" << num(f.py(height[b])) << "\" width=\""
      << num(f.px(a + width) - f.px(a)) << "\" height=\"" << num(f.py(0) - f.py(height[b]))
      << "\" fill=\"#cccccc\" stroke=\"white\"/>\n";
  }
  std::string pts;
  for (std::size_t i = 0; i < cx.size(); ++i) {
    pts += num(f.px(cx[i])) + "," + num(f.py(cy[i])) + " ";
    if (counts) {
      s << "<circle cx=\"" << num(f.px(cx[i])) << "\" cy=\"" << num(f.py(cy[i])) << "\" r=\"3\" fill=\""
        << kColors[1] << "\"/>\n";
    }
  }
  s << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << kColors[1] << "\" stroke-width=\"2\"/>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace prmix::plot
